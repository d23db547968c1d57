#include "hdist/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hdist {

std::string to_string(ExtensionPolicy p) {
  switch (p) {
    case ExtensionPolicy::Constant: return "constant";
    case ExtensionPolicy::Periodic: return "periodic";
    case ExtensionPolicy::Reject: return "reject";
  }
  return "constant";
}

ExtensionPolicy parse_extension_policy(const std::string& s) {
  if (s == "constant") return ExtensionPolicy::Constant;
  if (s == "periodic") return ExtensionPolicy::Periodic;
  if (s == "reject") return ExtensionPolicy::Reject;
  throw InvalidArgument("unknown extension policy '" + s + "'");
}

int wrap_index(int n, int n_min, int n_max, ExtensionPolicy policy) {
  if (n >= n_min && n <= n_max) return n;
  switch (policy) {
    case ExtensionPolicy::Constant: return n < n_min ? n_min : n_max;
    case ExtensionPolicy::Periodic: {
      const int len = n_max - n_min + 1;
      const int r = ((n - n_min) % len + len) % len;
      return n_min + r;
    }
    case ExtensionPolicy::Reject: break;
  }
  throw InvalidArgument("index " + std::to_string(n) + " outside window [" +
                        std::to_string(n_min) + ", " + std::to_string(n_max) +
                        "] under reject policy");
}

double SlowSequence::at(int n) const {
  if (values.empty()) throw InvalidArgument("empty slow sequence");
  return values[wrap_index(n, n_min, n_max(), policy) - n_min];
}

SlowReport validate_slow(const SlowSequence& seq) {
  SlowReport rep;
  if (seq.values.empty()) throw InvalidArgument("empty slow sequence");
  // Relative slack for values that were produced by exact e^{+-eps} scaling.
  const double slack = 1e-12;
  for (std::size_t i = 0; i + 1 < seq.values.size(); ++i) {
    const double a = seq.values[i];
    const double b = seq.values[i + 1];
    if (!(a > 0.0) || !(b > 0.0)) {
      rep.pass = false;
      rep.violations.push_back(seq.n_min + static_cast<int>(i));
      rep.worst_log_ratio = std::numeric_limits<double>::infinity();
      continue;
    }
    const double lr = std::abs(std::log(b / a));
    rep.worst_log_ratio = std::max(rep.worst_log_ratio, lr);
    if (lr > seq.epsilon + slack) {
      rep.pass = false;
      rep.violations.push_back(seq.n_min + static_cast<int>(i));
    }
  }
  return rep;
}

std::vector<double> slow_minorant(const std::vector<double>& values, double epsilon) {
  std::vector<double> out(values);
  const double f = std::exp(epsilon);
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = std::min(out[i], out[i - 1] * f);
  for (std::size_t i = out.size(); i-- > 1;) out[i - 1] = std::min(out[i - 1], out[i] * f);
  return out;
}

std::vector<double> cyclic_slow_minorant(const std::vector<double>& values, double epsilon) {
  const int len = static_cast<int>(values.size());
  std::vector<double> out(values);
  for (int i = 0; i < len; ++i) {
    for (int m = 0; m < len; ++m) {
      const int d = std::min(std::abs(i - m), len - std::abs(i - m));
      out[i] = std::min(out[i], values[m] * std::exp(epsilon * d));
    }
  }
  return out;
}

double ContractionChain::theta() const { return std::exp(-spectrum.smallest() + 2.0 * epsilon); }

const JetMap& ContractionChain::map(int n) const {
  if (maps.empty()) throw InvalidArgument("empty chain");
  return maps[wrap_index(n, n_min, n_max(), policy) - n_min];
}

double ContractionChain::radius(int n) const {
  if (radii.size() != maps.size()) throw DimensionMismatch("chain radii and maps differ in length");
  if (policy == ExtensionPolicy::Periodic) {
    return cyclic_slow_minorant(radii, epsilon)[wrap_index(n, n_min, n_max(), policy) - n_min];
  }
  return radii[wrap_index(n, n_min, n_max(), policy) - n_min];
}

SlowSequence ContractionChain::radius_sequence() const {
  SlowSequence s;
  s.n_min = n_min;
  s.epsilon = epsilon;
  s.policy = policy;
  s.values = policy == ExtensionPolicy::Periodic ? cyclic_slow_minorant(radii, epsilon) : radii;
  return s;
}

JetMap extend(const ContractionChain& chain, int n) { return chain.map(n); }

bool ChainReport::pass() const {
  if (!radii.pass) return false;
  return std::all_of(indices.begin(), indices.end(), [](const ChainIndexReport& r) {
    return r.block_ok && r.singular_values_ok && r.lipschitz_ok;
  });
}

std::string ChainReport::summary() const {
  std::ostringstream os;
  int block = 0, sv = 0, lip = 0;
  for (const auto& r : indices) {
    block += !r.block_ok;
    sv += !r.singular_values_ok;
    lip += !r.lipschitz_ok;
  }
  os << "block failures " << block << ", singular-value failures " << sv
     << ", Lipschitz failures " << lip << ", radius slowness "
     << (radii.pass ? "ok" : "violated");
  return os.str();
}

double lipschitz_upper_bound(const JetMap& k, double rho) {
  const CMatrix a = k.linear_part();
  const double lin = a.size() == 0 ? 0.0 : Eigen::JacobiSVD<CMatrix>(a).singularValues()(0);
  return lin + nonlinear_lipschitz_bound(k, rho);
}

ChainReport validate_chain(const ContractionChain& chain, int n_samples, std::uint64_t seed) {
  if (chain.maps.empty()) throw InvalidArgument("empty chain");
  if (chain.radii.size() != chain.maps.size())
    throw DimensionMismatch("chain radii and maps differ in length");
  const auto& spec = chain.spectrum;
  ChainReport rep;
  rep.theta = chain.theta();
  for (int n = chain.n_min; n <= chain.n_max(); ++n) {
    const JetMap& w = chain.map(n);
    if (w.dim_in() != spec.k() || w.dim_out() != spec.k())
      throw DimensionMismatch("chain map dimension differs from spectrum");
    ChainIndexReport r;
    r.n = n;
    const CMatrix a = w.linear_part();
    for (int i = 0; i < spec.k(); ++i) {
      for (int j = 0; j < spec.k(); ++j) {
        if (spec.block_of(i) != spec.block_of(j)) r.off_block = std::max(r.off_block, std::abs(a(i, j)));
      }
    }
    r.block_ok = r.off_block <= 1e-14;
    for (int b = 0; b < spec.l(); ++b) {
      const int o = spec.offset(b);
      const int kb = spec.multiplicity(b);
      const auto sv = Eigen::JacobiSVD<CMatrix>(a.block(o, o, kb, kb)).singularValues();
      const double lo = -spec.exponent(b) - chain.epsilon;
      const double hi = -spec.exponent(b) + chain.epsilon;
      for (int i = 0; i < sv.size(); ++i) {
        const double ls = sv(i) > 0.0 ? std::log(sv(i)) : -std::numeric_limits<double>::infinity();
        r.singular_value_excess = std::max({r.singular_value_excess, ls - hi, lo - ls});
      }
    }
    r.singular_values_ok = r.singular_value_excess <= 1e-12;
    const double rho = chain.radius(n);
    r.lipschitz_bound = lipschitz_upper_bound(w, rho);
    r.lipschitz_ok = r.lipschitz_bound <= rep.theta * (1.0 + 1e-6);
    if (n_samples >= 2) {
      r.lipschitz_sampled = sampled_lipschitz(w, rho, n_samples, seed + static_cast<std::uint64_t>(n - chain.n_min)).max_ratio;
    }
    rep.indices.push_back(r);
  }
  rep.radii = validate_slow(chain.radius_sequence());
  return rep;
}

double tame_radius(const JetMap& k, double alpha, double beta, double eps_prime,
                   const CoeffBound& bound, bool self_map) {
  if (!(alpha > 0.0) || alpha > beta) throw InvalidArgument("tame_radius: need 0 < alpha <= beta");
  if (!(eps_prime > 0.0)) throw InvalidArgument("tame_radius: eps' must be positive");
  if (self_map && beta >= 1.0) throw InvalidArgument("tame_radius: only contractions self-map");
  const double r = bound.radius;
  if (k.is_linear() || bound.sup_bound == 0.0) return 0.5 * r;
  const double kappa_default = 1.0;
  const double kappa = std::min({(std::exp(eps_prime) - 1.0) * beta,
                                 (1.0 - std::exp(-eps_prime)) * alpha, kappa_default});
  return std::min(r * r / (cauchy_constant(k.dim_in()) * bound.sup_bound) * kappa, 0.5 * r);
}

double certified_band_radius(const JetMap& k, double eps_prime, double rho_max) {
  const auto sv = Eigen::JacobiSVD<CMatrix>(k.linear_part()).singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0)) throw SingularLinearPart("certified_band_radius: singular linear part");
  const double kappa = std::min((std::exp(eps_prime) - 1.0) * smax, (1.0 - std::exp(-eps_prime)) * smin);
  return radius_for_nonlinear_lipschitz(k, kappa, rho_max);
}

ContractionChain conjugate_chain(const std::vector<JetMap>& m, const ContractionChain& chain,
                                 double eps_prime) {
  if (static_cast<int>(m.size()) != chain.size() + 1)
    throw DimensionMismatch("conjugate_chain: need one more conjugating map than chain maps");
  const int k = chain.k();
  const CMatrix id = CMatrix::Identity(k, k);
  for (const auto& mi : m) {
    if ((mi.linear_part() - id).cwiseAbs().maxCoeff() > 0.0)
      throw InvalidArgument("conjugate_chain: conjugating maps must be tangent to the identity");
  }
  double worst = 0.0;
  for (int n = chain.n_min; n <= chain.n_max(); ++n)
    worst = std::max(worst, lipschitz_upper_bound(chain.map(n), chain.radius(n)));
  if (!(worst * std::exp(eps_prime) < std::exp(-chain.epsilon)))
    throw InvalidArgument("conjugate_chain: contraction margin violated");

  ContractionChain out = chain;
  std::vector<double> psi(chain.size());
  const double landing = std::exp(eps_prime) * std::sqrt(static_cast<double>(k));
  for (int n = chain.n_min; n <= chain.n_max(); ++n) {
    const int i = n - chain.n_min;
    const JetMap minv = formal_inverse(m[i]);
    out.maps[i] = compose(m[i + 1], compose(chain.map(n), minv));
    const double rho = chain.radius(n);
    psi[i] = std::min({certified_band_radius(m[i], eps_prime, rho),
                       certified_band_radius(minv, eps_prime, rho), rho / landing});
  }
  out.radii = slow_minorant(psi, chain.epsilon);
  return out;
}

}  // namespace hdist
