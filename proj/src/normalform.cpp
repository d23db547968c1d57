#include "hdist/normalform.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hdist/sampling.hpp"

namespace hdist {

namespace {

// Bi-Lipschitz margin used for the T maps at index n. At n = 0 the target
// band collapses to {1}, so those maps are certified almost isometric.
constexpr double kCentreBand = 2.5e-7;

double band_epsilon(int n, double epsilon) { return n == 0 ? kCentreBand : epsilon; }

JetMap with_identity_linear_part(JetMap y) {
  const int k = y.dim_in();
  for (int c = 0; c < y.dim_out(); ++c)
    for (int i = 0; i < k; ++i) y.set(c, MultiIndex::unit(k, i), c == i ? cplx{1.0, 0.0} : cplx{});
  return y;
}

ContractionChain promote(const ContractionChain& chain, int cap) {
  ContractionChain out = chain;
  for (auto& w : out.maps) {
    if (w.degree_cap() < cap) w = w.with_cap(cap);
  }
  return out;
}

}  // namespace

ContactResult improve_contact(const ContractionChain& shifted, const ConstraintParams& params,
                              double tail_tol) {
  ContactResult out;
  out.x = shifted;
  const int k = shifted.k();
  const int cap = shifted.maps.front().degree_cap();
  out.t1.n_min = shifted.n_min;
  out.t1.maps.assign(shifted.size() + 1, JetMap::identity(k, cap));
  for (int p = 2; p <= std::min(params.p_star, cap); ++p) {
    HomologicalSolution sol = solve_homological(out.x, p, params, tail_tol);
    KillResult kr = kill_degree(out.x, sol, params);
    if (kr.degree_residual > 1e-10) {
      std::ostringstream os;
      os << "degree " << p << " left a coefficient of size " << kr.degree_residual;
      throw PipelineError("kill_degree", os.str());
    }
    for (std::size_t i = 0; i < out.t1.maps.size(); ++i)
      out.t1.maps[i] = compose(kr.s.maps[i], out.t1.maps[i]);
    out.x = std::move(kr.chain);
    out.degree_residuals.push_back(kr.degree_residual);
    out.solutions.push_back(std::move(sol));
  }
  for (int n = shifted.n_min; n <= shifted.n_max() + 1; ++n) out.radii.push_back(out.x.radius(n));
  return out;
}

TailResult linearize_tail(const ContractionChain& x, const ConstraintParams& params, double tol,
                          int max_steps) {
  const std::string stage = "linearize_tail";
  const int k = x.k();
  const int cap = x.maps.front().degree_cap();
  const int q = params.q;
  for (const auto& w : x.maps) {
    for (int p = 2; p <= std::min(q, cap); ++p) {
      if (w.coeff_norm(p) > 1e-10) throw PipelineError(stage, "contact order below q + 1");
    }
  }
  if (!params.flag("tail_rate")) throw PipelineError(stage, "tail rate inequality fails");
  if (x.policy == ExtensionPolicy::Reject)
    throw PipelineError(stage, "reject policy leaves no effective window");

  const int n_min = x.n_min;
  const int n_max = x.n_max();
  const int len = x.size() + 1;
  std::vector<CMatrix> ainv(x.size());
  for (int i = 0; i < x.size(); ++i) ainv[i] = x.maps[i].linear_part().inverse();

  TailResult out;
  out.t2.n_min = n_min;
  std::vector<JetMap> y(len, JetMap::identity(k, cap));
  int rising = 0;
  for (int step = 1; step <= max_steps; ++step) {
    std::vector<JetMap> ny(len, JetMap::identity(k, cap));
    const int last = x.policy == ExtensionPolicy::Periodic ? n_max : n_max + 1;
    for (int n = n_min; n <= last; ++n) {
      const int s = wrap_index(n, n_min, n_max, x.policy) - n_min;
      int nx = n + 1;
      if (x.policy == ExtensionPolicy::Periodic) {
        nx = wrap_index(nx, n_min, n_max, x.policy);
      } else {
        nx = std::min(nx, n_max + 1);
      }
      ny[n - n_min] =
          with_identity_linear_part(left_multiply(ainv[s], compose(y[nx - n_min], x.maps[s])));
    }
    if (x.policy == ExtensionPolicy::Periodic) ny[len - 1] = ny[0];
    double inc = 0.0;
    double scale = 1.0;
    for (int i = 0; i < len; ++i) {
      inc = std::max(inc, max_coeff_difference(ny[i], y[i]));
      scale = std::max(scale, ny[i].coeff_norm());
    }
    y = std::move(ny);
    if (!out.increments.empty()) {
      const double prev = out.increments.back();
      out.ratios.push_back(prev > 0.0 ? inc / prev : 0.0);
      rising = inc >= prev && inc > 0.0 ? rising + 1 : 0;
    }
    out.increments.push_back(inc);
    out.steps = step;
    if (inc <= tol * scale) break;
    if (rising >= 3) throw PipelineError(stage, "increments stopped decreasing");
    if (step == max_steps) throw PipelineError(stage, "no convergence within the step limit");
  }
  out.t2.maps = std::move(y);
  return out;
}

double NormalizationResult::shifted_radius(int n) const {
  return radius(n) * std::exp(-n * gamma);
}

std::pair<double, double> phi_band(int n, double gamma, double epsilon) {
  const double a = std::abs(static_cast<double>(n));
  return {std::exp(n * gamma - 2.0 * a * epsilon), std::exp(n * gamma + 2.0 * a * epsilon)};
}

NormalizationResult normalize(const ContractionChain& chain_in, double gamma, double epsilon,
                              double tail_tol) {
  NormalizationResult res;
  res.params = validate_constraints(chain_in.spectrum, gamma, epsilon);
  {
    std::string failed;
    for (const auto& f : res.params.flags) {
      // A base resonance in expert mode is reported by the homological solver.
      if (!f.pass && f.name != "base_nonresonant") failed += (failed.empty() ? "" : ", ") + f.name;
    }
    if (!failed.empty()) throw PipelineError("validate_constraints", "failing: " + failed);
  }
  ContractionChain chain = promote(chain_in, res.params.p_star + 1);
  chain.epsilon = epsilon;
  res.input = chain;
  res.gamma = gamma;
  res.epsilon = epsilon;
  res.n_min = chain.n_min;
  res.n_max = chain.n_max();
  const int k = chain.k();
  const int cap = chain.maps.front().degree_cap();

  res.shifted = shift_spectrum(chain, gamma);
  ContactResult contact = improve_contact(res.shifted, res.params, tail_tol);
  TailResult tail = linearize_tail(contact.x, res.params);
  res.t1 = contact.t1;
  res.t2 = tail.t2;
  res.degree_residuals = contact.degree_residuals;
  res.increments = tail.increments;
  res.ratios = tail.ratios;

  std::vector<double> r;
  const double sk = std::sqrt(static_cast<double>(k));
  for (int n = res.n_min; n <= res.n_max + 1; ++n) {
    const double e = band_epsilon(n, epsilon);
    const double tau = contact.radii[n - res.n_min];
    const double rho = res.shifted.radius(n);
    const double r1 = certified_band_radius(res.t1.at(n), e, tau);
    const double grow = std::exp(e) * sk;
    const double r2 = certified_band_radius(res.t2.at(n), e, grow * tau);
    r.push_back(std::min({tau, rho, r1, r2 / grow}));
    res.band_epsilon.push_back(e);
  }
  res.radii = slow_minorant(r, epsilon);

  res.phi.n_min = res.n_min;
  for (int n = res.n_min; n <= res.n_max + 1; ++n) {
    const JetMap delta = JetMap::linear(std::exp(n * gamma) * CMatrix::Identity(k, k), cap);
    res.phi.maps.push_back(compose(res.t2.at(n), compose(res.t1.at(n), delta)));
  }
  for (int n = res.n_min; n <= res.n_max; ++n) {
    const JetMap& w = chain.map(n);
    const JetMap lhs = compose(res.phi.at(n + 1), w);
    const JetMap rhs = left_multiply(std::exp(gamma) * w.linear_part(), res.phi.at(n));
    res.coefficient_residuals.push_back(max_coeff_difference(lhs, rhs));
  }
  return res;
}

bool DiagramReport::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const DiagramRow& r) { return r.pass; });
}

DiagramReport verify_diagram(const NormalizationResult& res, int n_samples, std::uint64_t seed,
                             double residual_tol) {
  DiagramReport rep;
  const int k = res.input.k();
  for (int n = res.n_min; n <= res.n_max; ++n) {
    DiagramRow row;
    row.n = n;
    const JetMap& w = res.input.map(n);
    const CMatrix ag = std::exp(res.gamma) * w.linear_part();
    const JetMap& phi = res.phi.at(n);
    const JetMap& phi1 = res.phi.at(n + 1);
    const double rg = res.shifted_radius(n);
    const double rn = res.radius(n);
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(n - res.n_min));
    for (int s = 0; s < n_samples; ++s) {
      const CVector v = sample_polydisc(rng, k, rg);
      const CVector pv = evaluate(phi, v);
      row.residual = std::max(row.residual, (evaluate(phi1, evaluate(w, v)) - ag * pv).norm());
      row.containment = std::max(row.containment, sup_norm(pv) / (4.0 * rn));
    }
    const LipschitzRange lr = sampled_lipschitz(phi, rg, std::max(n_samples, 2),
                                                seed ^ (0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(n - res.n_min)));
    row.lip_min = lr.min_ratio;
    row.lip_max = lr.max_ratio;
    std::tie(row.band_low, row.band_high) = phi_band(n, res.gamma, res.epsilon);
    row.pass = row.residual <= residual_tol && row.containment < 1.0 &&
               row.lip_min >= row.band_low * (1.0 - 1e-6) &&
               row.lip_max <= row.band_high * (1.0 + 1e-6);
    rep.max_residual = std::max(rep.max_residual, row.residual);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace hdist
