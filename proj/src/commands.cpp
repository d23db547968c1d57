#include "hdist/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "hdist/chain.hpp"
#include "hdist/io.hpp"
#include "hdist/normalform.hpp"
#include "hdist/repelling.hpp"
#include "hdist/spectrum.hpp"
#include "hdist/theorem_a.hpp"

namespace hdist {

namespace {

constexpr int kDefaultDiagramSamples = 1000;
constexpr int kDefaultDistortionSamples = 200;
constexpr int kDefaultEquilibriumSamples = 4000;
constexpr int kEquilibriumDepth = 30;
constexpr int kConvexityPairs = 50;
constexpr int kConvexityIndex = 8;

std::string hex(std::uint64_t x) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << x;
  return os.str();
}

Json config_json(const RunConfig& cfg, int samples) {
  Json j{{"version", kVersion},
         {"subcommand", cfg.subcommand},
         {"input", cfg.input},
         {"config_hash", hex(config_hash(cfg))},
         {"seed", cfg.seed},
         {"window", cfg.window},
         {"samples", samples},
         {"tol", cfg.tol},
         {"n_max", cfg.n_max}};
  j["gamma"] = cfg.gamma ? Json(*cfg.gamma) : Json(nullptr);
  j["epsilon"] = cfg.epsilon ? Json(*cfg.epsilon) : Json(nullptr);
  return j;
}

std::string csv_preamble(const RunConfig& cfg) {
  return "# hdist " + std::string(kVersion) + " " + cfg.subcommand +
         " config_hash=" + hex(config_hash(cfg)) + " seed=" + std::to_string(cfg.seed) + "\n";
}

std::string output_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

std::pair<double, double> admissible_parameters(const LyapunovSpectrum& spec) {
  try {
    return suggest_parameters(spec);
  } catch (const InvalidArgument& e) {
    throw PipelineError("validate_constraints", e.what());
  }
}

Json alpha_list(const std::vector<MultiIndex>& v) {
  Json a = Json::array();
  for (const auto& m : v) a.push_back(m.entries());
  return a;
}

std::string alpha_string(const MultiIndex& m) {
  std::string s = "(";
  for (int i = 0; i < m.size(); ++i) s += (i ? "," : "") + std::to_string(m[i]);
  return s + ")";
}

std::string bool_string(bool b) { return b ? "1" : "0"; }

}  // namespace

std::uint64_t config_hash(const RunConfig& cfg) {
  std::ostringstream os;
  os << cfg.subcommand << '\n' << cfg.input << '\n';
  os << (cfg.gamma ? format_double(*cfg.gamma) : "-") << '\n';
  os << (cfg.epsilon ? format_double(*cfg.epsilon) : "-") << '\n';
  os << cfg.window << '\n' << cfg.samples << '\n' << cfg.seed << '\n';
  os << format_double(cfg.tol) << '\n' << cfg.n_max << '\n' << kVersion << '\n';
  std::ifstream in(cfg.input, std::ios::binary);
  if (in) os << std::string(std::istreambuf_iterator<char>(in), {});
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

int cmd_resonance(const RunConfig& cfg, std::ostream& out) {
  const Json in = read_json_file(cfg.input);
  const LyapunovSpectrum spec =
      spectrum_from_json(in.contains("exponents") ? in : in.contains("spectrum") ? in.at("spectrum") : in);
  const double a = gap_constant(spec);
  const auto [sg, se] = admissible_parameters(spec);
  const double gamma = cfg.gamma.value_or(sg);
  const double eps = cfg.epsilon.value_or(se);
  const ConstraintParams params = validate_constraints(spec, gamma, eps);
  const ResonanceReport shifted = shifted_resonance_check(spec, gamma, eps);

  Json res = Json::array();
  for (int j = 0; j < spec.l(); ++j) {
    const auto r = resonant_indices(spec, j);
    res.push_back(Json{{"j", j + 1}, {"alphas", alpha_list(r)}});
    out << "R_" << j + 1 << " = {";
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? ", " : "") << alpha_string(r[i]);
    out << "}\n";
  }
  Json viol = Json::array();
  for (const auto& v : shifted.violations)
    viol.push_back(Json{{"j", v.j + 1}, {"alpha", v.alpha.entries()}, {"defect", v.defect}});
  Json report{{"config", config_json(cfg, 0)},
              {"spectrum", spectrum_to_json(spec)},
              {"resonant", res},
              {"gap_a", a},
              {"suggested", {{"gamma", sg}, {"epsilon", se}}},
              {"params", params_to_json(params)},
              {"shifted_check",
               {{"b", shifted.b},
                {"min_margin", std::isfinite(shifted.min_margin) ? Json(shifted.min_margin) : Json(nullptr)},
                {"violations", viol}}}};
  write_text_file(output_path(cfg, "resonance.json"), report.dump(2) + "\n");
  out << "gap a = " << format_double(a) << "\n";
  out << "suggested gamma = " << format_double(sg) << ", epsilon = " << format_double(se) << "\n";
  for (const auto& f : params.flags) out << f.name << ": " << (f.pass ? "pass" : "FAIL") << "\n";
  out << "shifted violations: " << shifted.violations.size() << "\n";
  return params.all_pass() || (params.expert_mode && [&] {
           for (const auto& f : params.flags)
             if (!f.pass && f.name != "base_nonresonant") return false;
           return true;
         }())
             ? kExitPass
             : kExitValidation;
}

int cmd_normalize(const RunConfig& cfg, std::ostream& out) {
  const Json in = read_json_file(cfg.input);
  ContractionChain chain = chain_from_json(in);
  const ChainReport rep = validate_chain(chain, 64, cfg.seed);
  if (!rep.pass()) {
    out << "chain validation failed\n" << rep.summary() << "\n";
    return kExitValidation;
  }
  double gamma;
  double eps = cfg.epsilon.value_or(chain.epsilon);
  if (cfg.gamma) {
    gamma = *cfg.gamma;
  } else if (in.at("params").contains("gamma")) {
    gamma = in.at("params").at("gamma").get<double>();
  } else {
    const auto [g, e] = admissible_parameters(chain.spectrum);
    gamma = g;
    if (!cfg.epsilon) eps = std::min(eps, e);
  }
  const int samples = cfg.samples > 0 ? cfg.samples : kDefaultDiagramSamples;
  const NormalizationResult res = normalize(chain, gamma, eps);
  const DiagramReport diag = verify_diagram(res, samples, cfg.seed, cfg.tol);

  Json phi = Json::array();
  for (int n = res.n_min; n <= res.n_max + 1; ++n)
    phi.push_back(Json{{"n", n}, {"map", jet_to_json(res.phi.at(n))}});
  Json rows = Json::array();
  CsvTable csv({"index", "residual", "lip_min", "lip_max", "r_n"});
  for (const auto& r : diag.rows) {
    rows.push_back(Json{{"n", r.n},
                        {"residual", r.residual},
                        {"containment", r.containment},
                        {"lip_min", r.lip_min},
                        {"lip_max", r.lip_max},
                        {"band_low", r.band_low},
                        {"band_high", r.band_high},
                        {"pass", r.pass}});
    csv.add({std::to_string(r.n), format_double(r.residual), format_double(r.lip_min),
             format_double(r.lip_max), format_double(res.radius(r.n))});
  }
  Json report{{"config", config_json(cfg, samples)},
              {"gamma", gamma},
              {"epsilon", eps},
              {"params", params_to_json(res.params)},
              {"window", {res.n_min, res.n_max}},
              {"phi", phi},
              {"radii", res.radii},
              {"degree_residuals", res.degree_residuals},
              {"coefficient_residuals", res.coefficient_residuals},
              {"increments", res.increments},
              {"ratios", res.ratios},
              {"diagram", {{"max_residual", diag.max_residual}, {"rows", rows}}},
              {"pass", diag.pass()}};
  write_text_file(output_path(cfg, "normalize.json"), report.dump(2) + "\n");
  write_text_file(output_path(cfg, "normalize.csv"), csv_preamble(cfg) + csv.str());

  out << "gamma = " << format_double(gamma) << ", epsilon = " << format_double(eps)
      << ", p* = " << res.params.p_star << "\n";
  if (chain.k() == 1) {
    const int n0 = std::clamp(0, res.n_min, res.n_max);
    const cplx c2 = res.phi.at(n0).coeff(0, MultiIndex({2}));
    out << "phi_" << n0 << " quadratic coefficient: " << format_double(c2.real())
        << (c2.imag() != 0.0 ? " + " + format_double(c2.imag()) + "i" : "") << "\n";
  }
  out << "tail steps = " << res.increments.size() << ", max diagram residual = "
      << format_double(diag.max_residual) << "\n";
  out << (diag.pass() ? "PASS" : "FAIL") << "\n";
  return diag.pass() ? kExitPass : kExitValidation;
}

int cmd_theorem_a(const RunConfig& cfg, std::ostream& out) {
  const EndomorphismInput spec = endomorphism_from_json(read_json_file(cfg.input));
  if (spec.f.k() > 2) throw InputError("theorem-a supports k = 1 and k = 2");
  if (cfg.window < 0) throw InputError("window must be nonnegative");
  const int samples = cfg.samples > 0 ? cfg.samples : kDefaultDistortionSamples;
  OrbitOptions oo;
  oo.rule = spec.rule;
  const BackwardOrbit orbit = backward_orbit(spec.f, spec.point, cfg.window + 2, cfg.seed, oo);
  TheoremAOptions to;
  to.window = cfg.window;
  to.spectrum = spec.spectrum;
  to.gamma = cfg.gamma;
  to.epsilon = cfg.epsilon;
  const LyapunovSpectrum estimate = group_exponents(
      cocycle_exponents(build_cocycle(spec.f, orbit, 0, cfg.window, 2).linear));
  if (!to.gamma || !to.epsilon) {
    const auto [g, e] = admissible_parameters(spec.spectrum.value_or(estimate));
    if (!to.gamma) to.gamma = g;
    if (!to.epsilon) to.epsilon = e;
  }
  const TheoremAData data = assemble_theorem_A(spec.f, orbit, to);
  const TheoremAReport rep = verify_theorem_A(data, samples, cfg.seed);

  const int nc = std::min(kConvexityIndex, cfg.window);
  std::mt19937_64 rng(cfg.seed + 1);
  Json conv = Json::array();
  bool conv_ok = true;
  for (double t : {0.25, 0.5, 1.0}) {
    int passed = 0;
    double worst = 0.0;
    std::string violated;
    for (int i = 0; i < kConvexityPairs; ++i) {
      const ProjPoint p = sample_branch_point(data, nc, t, rng);
      const ProjPoint q = sample_branch_point(data, nc, t, rng);
      const ConvexityResult cr = convexity_defect(data, nc, t, p, q);
      if (cr.pass) ++passed;
      if (!cr.pass && violated.empty()) violated = cr.violated;
      if (cr.bound > 0.0) worst = std::max(worst, cr.length / cr.bound);
    }
    conv_ok = conv_ok && passed == kConvexityPairs;
    conv.push_back(Json{{"t", t}, {"n", nc}, {"pairs", kConvexityPairs}, {"passed", passed},
                        {"worst_length_over_bound", worst}, {"first_violation", violated}});
  }

  CsvTable csv({"n", "lip_low", "lip_high", "bound_low", "bound_high", "residual", "pass"});
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    csv.add({std::to_string(r.n), format_double(r.lip_low), format_double(r.lip_high),
             format_double(r.bound_low), format_double(r.bound_high), format_double(r.residual),
             bool_string(r.pass)});
    rows.push_back(Json{{"n", r.n}, {"lip_low", r.lip_low}, {"lip_high", r.lip_high},
                        {"bound_low", r.bound_low}, {"bound_high", r.bound_high},
                        {"residual", r.residual}, {"residual_tol", r.residual_tol}, {"pass", r.pass}});
  }
  const bool pass = rep.pass() && conv_ok;
  Json report{
      {"config", config_json(cfg, samples)},
      {"spectrum", spectrum_to_json(data.spectrum)},
      {"estimated_exponents", cocycle_exponents(data.cocycle.linear)},
      {"gamma", data.gamma},
      {"epsilon", data.epsilon},
      {"orbit", {{"depth", orbit.depth()}, {"c", orbit.c},
                 {"max_residual", *std::max_element(orbit.residuals.begin(), orbit.residuals.end())}}},
      {"cocycle_linear_check", data.cocycle.linear_check},
      {"oseledec", {{"mode", data.oseledec.mode == OseledecMode::ExactDiagonal ? "exact-diagonal" : "finite-time"},
                    {"leakage", data.oseledec.leakage},
                    {"band_margin", data.oseledec.band_margin},
                    {"h", data.oseledec.h}}},
      {"chain_valid", data.chain_report.pass()},
      {"r_hat", data.r_hat},
      {"rho_hat", data.rho_hat},
      {"h_hat", data.h_hat},
      {"chart_distortion", data.chart_distortion},
      {"h_eps0", data.h_eps0},
      {"n_hat", data.n_hat},
      {"rows", rows},
      {"d_blocks_ok", rep.d_blocks_ok},
      {"slow", {{"r", rep.r_slow}, {"rho", rep.rho_slow}, {"h_inverse", rep.h_inverse_slow}}},
      {"convexity", conv},
      {"pass", pass}};
  write_text_file(output_path(cfg, "theorem_a.json"), report.dump(2) + "\n");
  write_text_file(output_path(cfg, "theorem_a.csv"), csv_preamble(cfg) + csv.str());

  out << "exponents:";
  for (int j = 0; j < data.spectrum.l(); ++j)
    out << " " << format_double(data.spectrum.exponent(j)) << " (x" << data.spectrum.multiplicity(j) << ")";
  out << "\ngamma = " << format_double(data.gamma) << ", epsilon = " << format_double(data.epsilon)
      << ", r_hat = " << format_double(data.r_hat) << ", h_hat = " << format_double(data.h_hat)
      << ", n_hat = " << data.n_hat << "\n";
  int ok = 0;
  for (const auto& r : rep.rows) ok += r.pass;
  out << "rows passing: " << ok << "/" << rep.rows.size() << "\n";
  out << "convexity: " << (conv_ok ? "pass" : "FAIL") << "\n";
  out << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kExitPass : kExitValidation;
}

int cmd_repelling(const RunConfig& cfg, std::ostream& out) {
  const EndomorphismInput spec = endomorphism_from_json(read_json_file(cfg.input));
  if (!spec.f.is_polynomial()) throw InputError("repelling needs a polynomial map of P^1");
  RepellingOptions ro;
  ro.n_max = cfg.n_max;
  if (ro.n_max < 1 || ro.n_max > ro.n_cap)
    throw InputError("n-max must lie in [1, " + std::to_string(ro.n_cap) + "]");
  ro.samples = cfg.samples > 0 ? cfg.samples : kDefaultEquilibriumSamples;
  ro.depth = kEquilibriumDepth;
  ro.seed = cfg.seed;
  const RepellingResult res =
      repelling_experiment(spec.f, spec.equilibrium_seed.value_or(spec.point), ro);

  CsvTable csv({"n", "count", "S_n", "lambda_hat", "gap"});
  Json rows = Json::array();
  for (const auto& r : res.rows) {
    csv.add({std::to_string(r.n), std::to_string(r.count), format_double(r.s_n),
             format_double(r.lambda_hat), format_double(r.gap)});
    rows.push_back(Json{{"n", r.n}, {"count", r.count}, {"repelling_count", r.repelling_count},
                        {"S_n", r.s_n}, {"lambda_hat", r.lambda_hat}, {"gap", r.gap},
                        {"max_residual", r.max_residual}, {"reliable", r.reliable}});
  }
  Json report{{"config", config_json(cfg, ro.samples)},
              {"convention", "log of the modulus of the complex derivative; every repelling "
                             "solution of P^n(z) = z is counted, including lower periods"},
              {"equilibrium_depth", ro.depth},
              {"lambda_hat", res.lambda_hat},
              {"rows", rows}};
  write_text_file(output_path(cfg, "repelling.json"), report.dump(2) + "\n");
  write_text_file(output_path(cfg, "repelling.csv"), csv_preamble(cfg) + csv.str());
  out << csv.str();
  for (const auto& r : res.rows)
    if (!r.reliable) out << "row " << r.n << " unreliable (residual " << format_double(r.max_residual) << ")\n";
  return kExitPass;
}

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.subcommand == "resonance") return cmd_resonance(cfg, out);
    if (cfg.subcommand == "normalize") return cmd_normalize(cfg, out);
    if (cfg.subcommand == "theorem-a") return cmd_theorem_a(cfg, out);
    if (cfg.subcommand == "repelling") return cmd_repelling(cfg, out);
    err << "unknown subcommand " << cfg.subcommand << "\n";
    return kExitInput;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const PipelineError& e) {
    err << "pipeline error " << e.what() << "\n";
    return e.stage() == "validate_constraints" ? kExitValidation : kExitPipeline;
  } catch (const ToleranceConflict& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DynamicsError& e) {
    err << "dynamics error: " << e.what() << "\n";
    return kExitDynamics;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "pipeline error: " << e.what() << "\n";
    return kExitPipeline;
  }
}

}  // namespace hdist
