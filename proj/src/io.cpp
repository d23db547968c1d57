#include "hdist/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace hdist {

namespace {

template <class T>
T get(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("field '") + key + "': " + e.what());
  }
}

MultiIndex alpha_from_json(const Json& a, int expected) {
  std::vector<int> e;
  try {
    e = a.get<std::vector<int>>();
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("alpha: ") + ex.what());
  }
  if (static_cast<int>(e.size()) != expected)
    throw InputError("alpha has length " + std::to_string(e.size()) + ", expected " +
                     std::to_string(expected));
  for (int x : e)
    if (x < 0) throw InputError("negative exponent in alpha");
  return MultiIndex(e);
}

cplx complex_from_json(const Json& t) { return {get<double>(t, "re"), get<double>(t, "im")}; }

Json complex_to_json(cplx z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

ProjPoint point_from_json(const Json& p, int k) {
  if (!p.is_array() || static_cast<int>(p.size()) != k + 1)
    throw InputError("point needs k + 1 homogeneous coordinates");
  CVector x(k + 1);
  for (int i = 0; i <= k; ++i) x(i) = complex_from_json(p[i]);
  if (!(x.norm() > 0.0)) throw InputError("point has all coordinates zero");
  return normalize_point(x);
}

Json point_to_json(const ProjPoint& x) {
  Json a = Json::array();
  for (int i = 0; i < x.size(); ++i) a.push_back(complex_to_json(x(i)));
  return a;
}

}  // namespace

Json jet_to_json(const JetMap& j) {
  Json terms = Json::array();
  for (int c = 0; c < j.dim_out(); ++c) {
    for (const auto& [alpha, v] : j.component(c)) {
      terms.push_back(Json{{"out", c}, {"alpha", alpha.entries()}, {"re", v.real()}, {"im", v.imag()}});
    }
  }
  return Json{{"dim_in", j.dim_in()}, {"dim_out", j.dim_out()}, {"degree_cap", j.degree_cap()},
              {"terms", terms}};
}

JetMap jet_from_json(const Json& j) {
  const int din = get<int>(j, "dim_in");
  const int dout = get<int>(j, "dim_out");
  const int cap = get<int>(j, "degree_cap");
  if (din < 1 || dout < 1 || cap < 1) throw InputError("jet dimensions and cap must be positive");
  JetMap out(din, dout, cap);
  const Json terms = get<Json>(j, "terms");
  if (!terms.is_array()) throw InputError("terms must be an array");
  for (const auto& t : terms) {
    const int c = get<int>(t, "out");
    if (c < 0 || c >= dout) throw InputError("term output index out of range");
    const MultiIndex alpha = alpha_from_json(get<Json>(t, "alpha"), din);
    if (alpha.order() < 1 || alpha.order() > cap) throw InputError("term order outside 1..degree_cap");
    out.add(c, alpha, complex_from_json(t));
  }
  return out;
}

Json spectrum_to_json(const LyapunovSpectrum& s) {
  return Json{{"exponents", s.exponents()}, {"multiplicities", s.multiplicities()}};
}

LyapunovSpectrum spectrum_from_json(const Json& j) {
  try {
    return LyapunovSpectrum(get<std::vector<double>>(j, "exponents"),
                            get<std::vector<int>>(j, "multiplicities"));
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    throw InputError(std::string("spectrum: ") + e.what());
  }
}

Json params_to_json(const ConstraintParams& c) {
  Json j{{"a", c.a},         {"b", c.b},       {"gamma", c.gamma},   {"epsilon", c.epsilon},
         {"gamma_check", c.gamma_check},       {"expert_mode", c.expert_mode},
         {"ratio", c.ratio}, {"p_star", c.p_star}, {"q", c.q},       {"m", c.m},
         {"M", c.M},         {"theta", c.theta}, {"beta", c.beta}};
  for (const auto& f : c.flags) j[f.name] = f.pass;
  return j;
}

Json chain_to_json(const ContractionChain& c) {
  Json maps = Json::array();
  for (const auto& m : c.maps) maps.push_back(jet_to_json(m));
  Json params{{"epsilon", c.epsilon}};
  if (c.gamma != 0.0) params["applied_shift"] = c.gamma;
  return Json{{"window", {c.n_min, c.n_max()}},
              {"spectrum", spectrum_to_json(c.spectrum)},
              {"params", params},
              {"blocks", c.spectrum.multiplicities()},
              {"maps", maps},
              {"radii", c.radii},
              {"extension", to_string(c.policy)}};
}

ContractionChain chain_from_json(const Json& j) {
  ContractionChain c;
  const auto window = get<std::vector<int>>(j, "window");
  if (window.size() != 2 || window[1] < window[0]) throw InputError("window must be [n_min, n_max]");
  c.n_min = window[0];
  c.spectrum = spectrum_from_json(get<Json>(j, "spectrum"));
  const Json params = get<Json>(j, "params");
  c.epsilon = get<double>(params, "epsilon");
  if (!(c.epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (params.contains("applied_shift")) c.gamma = get<double>(params, "applied_shift");
  if (j.contains("blocks") && get<std::vector<int>>(j, "blocks") != c.spectrum.multiplicities())
    throw InputError("blocks disagree with the spectrum multiplicities");
  const Json maps = get<Json>(j, "maps");
  if (!maps.is_array()) throw InputError("maps must be an array");
  for (const auto& m : maps) {
    JetMap w = jet_from_json(m);
    if (w.dim_in() != c.spectrum.k() || w.dim_out() != c.spectrum.k())
      throw InputError("map dimension differs from the spectrum dimension");
    c.maps.push_back(std::move(w));
  }
  const int expected = window[1] - window[0] + 1;
  if (c.size() != expected) throw InputError("number of maps differs from the window length");
  c.radii = get<std::vector<double>>(j, "radii");
  if (c.size() != static_cast<int>(c.radii.size())) throw InputError("number of radii differs from the window length");
  for (double r : c.radii)
    if (!(r > 0.0)) throw InputError("radii must be positive");
  try {
    c.policy = parse_extension_policy(j.contains("extension") ? get<std::string>(j, "extension") : "constant");
  } catch (const InvalidArgument& e) {
    throw InputError(e.what());
  }
  return c;
}

Json endomorphism_to_json(const EndomorphismInput& e) {
  Json comps = Json::array();
  for (const auto& p : e.f.components()) {
    Json terms = Json::array();
    for (const auto& [alpha, v] : p)
      terms.push_back(Json{{"alpha", alpha.entries()}, {"re", v.real()}, {"im", v.imag()}});
    comps.push_back(terms);
  }
  Json j{{"k", e.f.k()}, {"d", e.f.d()}, {"components", comps}, {"point", point_to_json(e.point)}};
  j["branch"] = e.rule == BranchRule::Nearest ? "nearest" : "seeded";
  if (e.spectrum) j["spectrum"] = spectrum_to_json(*e.spectrum);
  if (e.equilibrium_seed) j["equilibrium_seed"] = point_to_json(*e.equilibrium_seed);
  return j;
}

EndomorphismInput endomorphism_from_json(const Json& j) {
  const int k = get<int>(j, "k");
  const int d = get<int>(j, "d");
  if (k < 1 || d < 2) throw InputError("need k >= 1 and d >= 2");
  const Json comps = get<Json>(j, "components");
  if (!comps.is_array() || static_cast<int>(comps.size()) != k + 1)
    throw InputError("components must list k + 1 polynomials");
  std::vector<Poly> polys;
  for (const auto& c : comps) {
    if (!c.is_array()) throw InputError("each component is an array of monomials");
    Poly p;
    for (const auto& t : c) {
      const MultiIndex alpha = alpha_from_json(get<Json>(t, "alpha"), k + 1);
      p[alpha] += complex_from_json(t);
    }
    polys.push_back(std::move(p));
  }
  std::optional<ProjectiveEndomorphism> f;
  try {
    f.emplace(k, d, std::move(polys));
  } catch (const Error& e) {
    throw InputError(std::string("endomorphism: ") + e.what());
  }
  ProjPoint point = CVector::Zero(k + 1);
  point(k) = 1.0;
  if (j.contains("point")) point = point_from_json(j.at("point"), k);
  std::optional<LyapunovSpectrum> spec;
  if (j.contains("spectrum")) spec = spectrum_from_json(j.at("spectrum"));
  BranchRule rule = BranchRule::Seeded;
  if (j.contains("branch")) {
    const auto b = get<std::string>(j, "branch");
    if (b == "nearest") {
      rule = BranchRule::Nearest;
    } else if (b != "seeded") {
      throw InputError("branch must be 'seeded' or 'nearest'");
    }
  }
  std::optional<ProjPoint> eq;
  if (j.contains("equilibrium_seed")) eq = point_from_json(j.at("equilibrium_seed"), k);
  return EndomorphismInput{*f, point, spec, rule, eq};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw InvalidArgument("csv row width differs from header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::ostringstream os;
  auto line = [&os](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return os.str();
}

}  // namespace hdist
