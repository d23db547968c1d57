// End-to-end acceptance run: one PASS/FAIL line per criterion. Tolerances and
// runtime budgets are pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "hdist/commands.hpp"
#include "hdist/normalform.hpp"
#include "hdist/repelling.hpp"
#include "hdist/theorem_a.hpp"
#include "support.hpp"

using namespace hdist;
using hdist::testing::random_admissible_chain;
using hdist::testing::random_integer_jet;
using hdist::testing::random_invertible_jet;

namespace {

constexpr int kJetTrials = 100;
constexpr double kJetBudget = 5.0;
constexpr double kKoenigsTol = 1e-12;
constexpr int kSpectrumTrials = 100;
constexpr double kSpectrumBudget = 5.0;
constexpr int kChainCount = 20;
constexpr double kDegreeTol = 1e-10;
constexpr int kDiagramSamples = 1000;
constexpr double kDiagramTol = 1e-8;
constexpr double kDiagramBudget = 60.0;
constexpr double kRateSlack = 0.05;
constexpr int kWindow = 12;
constexpr int kDistortionSamples = 200;
constexpr double kDistortionBudget = 120.0;
constexpr int kConvexityPairs = 50;
constexpr int kConvexityIndex = 8;
constexpr double kSquareSumTol = 1e-9;
constexpr double kEquidistributionTol = 0.05;
constexpr double kRepellingBudget = 60.0;

const double L2 = std::log(2.0);
const double L4 = std::log(4.0);

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome jet_laws() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  int bad = 0;
  for (int trial = 0; trial < kJetTrials; ++trial) {
    const int k = 1 + trial % 3;
    const int cap = 2 + (trial / 3) % 5;
    const JetMap f = random_integer_jet(rng, k, k, cap);
    const JetMap g = random_integer_jet(rng, k, k, cap);
    const JetMap h = random_integer_jet(rng, k, k, cap);
    const JetMap id = JetMap::identity(k, cap);
    const JetMap s = random_invertible_jet(rng, k, cap);
    const JetMap si = formal_inverse(s);
    const bool ok = compose(compose(f, g), h) == compose(f, compose(g, h)) && compose(id, f) == f &&
                    compose(f, id) == f && compose(s, si) == id && compose(si, s) == id;
    bad += !ok;
  }
  const double t = seconds_since(t0);
  return {bad == 0 && t < kJetBudget, fmt("%.0f law failures over 100 jets, %.2f s", bad, t)};
}

Outcome koenigs() {
  ContractionChain c;
  c.n_min = -20;
  c.spectrum = LyapunovSpectrum({L2}, {1});
  c.epsilon = 0.001;
  const double lambda = 0.5;
  const double b = 0.1;
  JetMap w(1, 1, 2);
  w.set(0, MultiIndex({1}), lambda);
  w.set(0, MultiIndex({2}), b);
  c.maps.assign(41, w);
  c.radii.assign(41, 0.004);
  // phi(W z) = lambda phi(z) at order 2: b + c2 lambda^2 = lambda c2.
  const double oracle = b / (lambda - lambda * lambda);
  const NormalizationResult res = normalize(c, 0.0, 0.001);
  double worst = 0.0;
  for (int n = res.n_min; n <= res.n_max + 1; ++n)
    worst = std::max(worst, std::abs(res.phi.at(n).coeff(0, MultiIndex({2})) - oracle));
  return {res.params.expert_mode && worst <= kKoenigsTol,
          fmt("phi_0 quadratic = %.15f, oracle %.15f, worst error %.1e",
              res.phi.at(0).coeff(0, MultiIndex({2})).real(), oracle, worst)};
}

Outcome resonance_arithmetic() {
  const auto t0 = std::chrono::steady_clock::now();
  const LyapunovSpectrum base({L4, L2}, {1, 1});
  const auto r1 = resonant_indices(base, 0);
  bool ok = r1.size() == 1 && r1[0] == MultiIndex({0, 2}) && resonant_indices(base, 1).empty();
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int spectra = 0;
  int pairs = 0;
  int violations = 0;
  while (spectra < kSpectrumTrials) {
    const int l = 1 + static_cast<int>(rng() % 3);
    std::vector<double> ex;
    for (int i = 0; i < l; ++i) ex.push_back(u(rng));
    std::sort(ex.rbegin(), ex.rend());
    std::vector<int> mult(l, 1);
    if (l < 3 && rng() % 2) mult[0] = 2;
    std::optional<LyapunovSpectrum> s;
    std::pair<double, double> ge;
    try {
      s.emplace(ex, mult);
      ge = suggest_parameters(*s);
    } catch (const Error&) {
      continue;  // coincident exponents or no admissible shift: not a valid spectrum
    }
    ++spectra;
    std::vector<std::pair<double, double>> candidates{ge};
    for (int i = 0; i < 20; ++i) {
      const double g = unit(rng) * s->smallest() / 2.0;
      candidates.push_back({g, unit(rng) * g / 2.0});
    }
    for (const auto& [g, e] : candidates) {
      if (!(g > 0.0) || !(e > 0.0) || !validate_constraints(*s, g, e).all_pass()) continue;
      ++pairs;
      const ResonanceReport rep = shifted_resonance_check(*s, g, e);
      if (!rep.violations.empty() || rep.min_margin < rep.b) ++violations;
    }
  }
  const double t = seconds_since(t0);
  ok = ok && violations == 0 && t < kSpectrumBudget;
  return {ok, fmt("R_1 = {(0,2)}, R_2 = {}; %.0f admissible (gamma, eps) pairs, %.0f with violations, %.2f s",
                  pairs, violations, t)};
}

struct ChainRun {
  double worst_degree = 0.0;
  double worst_residual = 0.0;
  int band_failures = 0;
  int diagram_failures = 0;
  double worst_rate_excess = -1.0;
  double seconds = 0.0;
  bool ran = false;
};

const ChainRun& chain_set() {
  static ChainRun run;
  if (run.ran) return run;
  run.ran = true;
  const auto t0 = std::chrono::steady_clock::now();
  const LyapunovSpectrum spec({L4, L2}, {1, 1});
  const auto [g, e] = suggest_parameters(spec);
  const ConstraintParams params = validate_constraints(spec, g, e);
  std::mt19937_64 rng(404);
  for (int i = 0; i < kChainCount; ++i) {
    const ContractionChain c = random_admissible_chain(rng, spec, -20, 20, e);
    const ContactResult cr = improve_contact(shift_spectrum(c, g), params);
    // Coefficients left by each conjugation, measured before roundoff is cleared.
    for (double r : cr.degree_residuals) run.worst_degree = std::max(run.worst_degree, r);
    for (const auto& m : cr.x.maps)
      for (int p = 2; p <= params.p_star; ++p)
        run.worst_degree = std::max(run.worst_degree, homogeneous_part(m, p).coeff_norm());
    const NormalizationResult res = normalize(c, g, e);
    const DiagramReport d = verify_diagram(res, kDiagramSamples, 500 + i, kDiagramTol);
    run.worst_residual = std::max(run.worst_residual, d.max_residual);
    for (const auto& row : d.rows) {
      // For n < 0 the band is read with |n| on the epsilon term so that it stays ordered.
      const double lo = std::exp(row.n * g - 2.0 * std::abs(row.n) * e);
      const double hi = std::exp(row.n * g + 2.0 * std::abs(row.n) * e);
      run.band_failures += row.lip_min < lo * (1 - 1e-6) || row.lip_max > hi * (1 + 1e-6);
      run.diagram_failures += !row.pass;
    }
    for (std::size_t s = 1; s < res.ratios.size(); ++s)
      run.worst_rate_excess = std::max(run.worst_rate_excess, res.ratios[s] - res.params.beta);
  }
  run.seconds = seconds_since(t0);
  return run;
}

Outcome degree_cancellation() {
  const ChainRun& r = chain_set();
  return {r.worst_degree <= kDegreeTol, fmt("worst degree 2..p* coefficient %.2e over 20 chains", r.worst_degree)};
}

Outcome diagram() {
  const ChainRun& r = chain_set();
  return {r.worst_residual <= kDiagramTol && r.band_failures == 0 && r.diagram_failures == 0 &&
              r.seconds < kDiagramBudget,
          fmt("max residual %.2e, %.0f band failures, %.1f s for the chain set", r.worst_residual,
              r.band_failures, r.seconds)};
}

Outcome tail_rate() {
  const ChainRun& r = chain_set();
  return {r.worst_rate_excess <= kRateSlack,
          fmt("worst increment ratio minus beta %.3f (allowed %.2f)", r.worst_rate_excess, kRateSlack)};
}

struct OrbitCase {
  std::string name;
  ProjectiveEndomorphism f;
  ProjPoint x0;
  BranchRule rule;
};

std::vector<OrbitCase> orbit_cases() {
  const ProjectiveEndomorphism sq(1, 2, {Poly{{MultiIndex({2, 0}), 1.0}}, Poly{{MultiIndex({0, 2}), 1.0}}});
  const ProjectiveEndomorphism torus(
      2, 2, {Poly{{MultiIndex({2, 0, 0}), 1.0}}, Poly{{MultiIndex({0, 2, 0}), 1.0}}, Poly{{MultiIndex({0, 0, 2}), 1.0}}});
  CVector one(1), circ(1), tor(2);
  one << 1.0;
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  circ << std::polar(1.0, ang(rng));
  tor << std::polar(1.0, ang(rng)), std::polar(1.0, ang(rng));
  return {{"z^2 fixed point", sq, from_affine(one), BranchRule::Nearest},
          {"z^2 circle", sq, from_affine(circ), BranchRule::Seeded},
          {"[z^2:w^2:t^2] torus", torus, from_affine(tor), BranchRule::Seeded}};
}

std::vector<TheoremAData>& distortion_data() {
  static std::vector<TheoremAData> data;
  if (!data.empty()) return data;
  for (const auto& c : orbit_cases()) {
    OrbitOptions oo;
    oo.rule = c.rule;
    const BackwardOrbit o = backward_orbit(c.f, c.x0, kWindow + 2, 17, oo);
    TheoremAOptions opts;
    opts.window = kWindow;
    data.push_back(assemble_theorem_A(c.f, o, opts));
  }
  return data;
}

Outcome theorem_a() {
  const auto t0 = std::chrono::steady_clock::now();
  int rows = 0;
  int failures = 0;
  int constant_mismatch = 0;
  double worst_residual_ratio = 0.0;
  try {
    for (const auto& d : distortion_data()) {
      const TheoremAReport rep = verify_theorem_A(d, kDistortionSamples, 23);
      failures += !(rep.r_slow && rep.rho_slow && rep.h_inverse_slow && rep.d_blocks_ok);
      for (const auto& r : rep.rows) {
        ++rows;
        failures += !r.pass;
        const double lo = std::exp(r.n * (d.gamma - 2 * d.epsilon));
        const double hi = std::exp(r.n * (d.gamma + 3 * d.epsilon)) * d.h_hat;
        constant_mismatch += std::abs(r.bound_low / lo - 1) > 1e-12 || std::abs(r.bound_high / hi - 1) > 1e-12 ||
                             std::abs(r.residual_tol / (1e-7 * d.r_hat) - 1) > 1e-12;
        worst_residual_ratio = std::max(worst_residual_ratio, r.residual / (1e-7 * d.r_hat));
      }
      failures += static_cast<int>(rep.rows.size()) != kWindow - d.n_hat + 1;
    }
  } catch (const std::exception& e) {
    return {false, std::string("pipeline raised: ") + e.what()};
  }
  const double t = seconds_since(t0);
  return {failures == 0 && constant_mismatch == 0 && t < kDistortionBudget,
          fmt("%.0f rows over 3 orbits, %.0f failures, worst residual %.2e of 1e-7 r", rows, failures + constant_mismatch,
              worst_residual_ratio) +
              fmt(", %.1f s", t)};
}

Outcome convexity() {
  int total = 0;
  int failures = 0;
  double worst = 0.0;
  std::string first;
  try {
    std::mt19937_64 rng(808);
    for (const auto& d : distortion_data()) {
      for (double t : {0.25, 0.5, 1.0}) {
        for (int i = 0; i < kConvexityPairs; ++i) {
          const ProjPoint p = sample_branch_point(d, kConvexityIndex, t, rng);
          const ProjPoint q = sample_branch_point(d, kConvexityIndex, t, rng);
          const ConvexityResult c = convexity_defect(d, kConvexityIndex, t, p, q);
          ++total;
          if (!c.pass) {
            ++failures;
            if (first.empty()) first = c.violated;
          }
          worst = std::max(worst, c.length / (std::exp(5.0 * kConvexityIndex * d.epsilon) * d.h_hat * c.distance));
        }
      }
    }
  } catch (const std::exception& e) {
    return {false, std::string("pipeline raised: ") + e.what()};
  }
  return {failures == 0, fmt("%.0f pairs, %.0f failures, worst length / bound %.6f", total, failures, worst) +
                             (first.empty() ? "" : " (first: " + first + ")")};
}

Outcome repelling() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<cplx> sq{0.0, 0.0, 1.0};
  double worst = 0.0;
  for (int n = 1; n <= 10; ++n) {
    const RootSolve s = periodic_points(sq, n);
    const double sn = repelling_sum(classify_periodic_points(sq, n, s.roots), 2, n);
    worst = std::max(worst, std::abs(sn - (1.0 - std::ldexp(1.0, -n)) * L2));
  }
  const ProjectiveEndomorphism basilica(1, 2, {Poly{{MultiIndex({2, 0}), 1.0}, {MultiIndex({0, 2}), -1.0}},
                                               Poly{{MultiIndex({0, 2}), 1.0}}});
  CVector seed(2);
  seed << cplx(0.3, 0.2), 1.0;
  RepellingOptions o;
  o.n_max = 12;
  const RepellingResult r = repelling_experiment(basilica, normalize_point(seed), o);
  const RepellingRow& last = r.rows.back();
  const double t = seconds_since(t0);
  return {worst <= kSquareSumTol && last.n == 12 && last.reliable && last.gap <= kEquidistributionTol &&
              t < kRepellingBudget,
          fmt("z^2 worst |S_n - (1-2^-n) log 2| = %.1e; z^2-1: S_12 = %.6f, lambda = %.6f", worst, last.s_n,
              r.lambda_hat) +
              fmt(", %.1f s", t)};
}

Outcome resonance_refusal() {
  std::string messages[2];
  int codes[2];
  for (int i = 0; i < 2; ++i) {
    RunConfig cfg;
    cfg.subcommand = "normalize";
    cfg.input = hdist::testing::data_path("chain_resonant.json");
    cfg.gamma = 0.0;
    cfg.out_dir = (std::filesystem::temp_directory_path() / "hdist_acceptance").string();
    std::ostringstream out, err;
    codes[i] = run_command(cfg, out, err);
    messages[i] = err.str();
  }
  const bool located = messages[0].find("solve_homological") != std::string::npos &&
                       messages[0].find("j=1") != std::string::npos &&
                       messages[0].find("alpha=(0,2)") != std::string::npos;
  std::string line = messages[0].substr(0, messages[0].find('\n'));
  return {codes[0] == kExitPipeline && codes[1] == kExitPipeline && messages[0] == messages[1] && located,
          "exit " + std::to_string(codes[0]) + ": " + line};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"jet algebra laws", jet_laws},
      {"Koenigs coefficient", koenigs},
      {"resonance arithmetic", resonance_arithmetic},
      {"degree cancellation", degree_cancellation},
      {"conjugacy diagram", diagram},
      {"tail contraction rate", tail_rate},
      {"distortion along backward orbits", theorem_a},
      {"convexity defect", convexity},
      {"repelling-cycle sums", repelling},
      {"resonance refusal without shift", resonance_refusal},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("raised: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
