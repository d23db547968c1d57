// Distortion of inverse branches along a backward orbit: the chart cocycle is
// reduced to blocks, linearized as a contraction chain, and the resulting
// coordinates are checked against the two-sided distortion estimate.

#ifndef HDIST_THEOREM_A_HPP
#define HDIST_THEOREM_A_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hdist/chain.hpp"
#include "hdist/normalform.hpp"
#include "hdist/orbit.hpp"

namespace hdist {

struct TheoremAOptions {
  std::optional<double> gamma;    // default: suggest_parameters
  std::optional<double> epsilon;  // default: suggest_parameters
  std::optional<LyapunovSpectrum> spectrum;  // default: estimated from the cocycle
  int window = 12;                // N; chain indices run over [0, N]
  int degree_cap = 6;
  AtlasKind atlas = AtlasKind::Unitary;
  double tail_tol = 1e-12;
  int lookahead = 20;
  double max_leakage = 1e-6;
};

struct TheoremAData {
  TheoremAData(ProjectiveEndomorphism map, BackwardOrbit o) : f(std::move(map)), orbit(std::move(o)) {}

  ProjectiveEndomorphism f;
  BackwardOrbit orbit;
  CocycleData cocycle;
  OseledecData oseledec;
  LyapunovSpectrum spectrum{{1.0}, {1}};
  ContractionChain chain;
  ChainReport chain_report;
  NormalizationResult norm;
  double gamma = 0.0;
  double epsilon = 0.0;
  double r_hat = 0.0;
  double rho_hat = 0.0;
  double h_hat = 0.0;
  double chart_distortion = 0.0;
  double h_eps0 = 0.0;
  int n_hat = 0;
  int window = 0;

  /// D_n = e^{n gamma} A_{n-1} ... A_0 on the reduced cocycle.
  CMatrix d(int n) const;
  /// phi_n(C_n psi_{x_{-n}}^{-1}(p)).
  CVector phi(int n, const ProjPoint& p) const;
  /// Point p near x_{-n} with phi(n, p) = s, by Newton from `guess` (chart
  /// coordinates after C_n; the linear guess is used when empty).
  ProjPoint phi_inverse(int n, const CVector& s, const CVector* guess = nullptr) const;
  /// The inverse branch of f^n along the orbit applied to w near x_0, by
  /// stepwise Newton seeded from the jets.
  ProjPoint branch(int n, const ProjPoint& w) const;
  /// Chart radius whose chart ball is the ball of Fubini-Study radius r.
  double chart_radius(double fs_radius) const;
};

/// Builds the chain W_n = C_{n+1} o F_n^{-1} o C_n^{-1} over [0, N], runs the
/// normalization and derives r, rho, h and n_hat. Orbit depth must be >= N + 2.
TheoremAData assemble_theorem_A(const ProjectiveEndomorphism& f, const BackwardOrbit& orbit,
                                const TheoremAOptions& opts = {});

struct TheoremARow {
  int n = 0;
  double lip_low = 0.0;   // sampled min |phi(u) - phi(v)| / d(u, v)
  double lip_high = 0.0;
  double bound_low = 0.0;
  double bound_high = 0.0;
  double residual = 0.0;  // max |phi_n(branch(w)) - D_n phi_0(w)|
  double residual_tol = 0.0;
  bool pass = false;
};

struct TheoremAReport {
  std::vector<TheoremARow> rows;
  bool d_blocks_ok = true;
  double d_block_excess = 0.0;  // worst log-excess of |D_n v| outside its band
  bool r_slow = false;
  bool rho_slow = false;
  bool h_inverse_slow = false;
  bool pass() const;
};

TheoremAReport verify_theorem_A(const TheoremAData& data, int n_samples, std::uint64_t seed);

struct ConvexityResult {
  double length = 0.0;
  double distance = 0.0;
  double bound = 0.0;
  bool inclusion_segment = true;  // D_n^{-1} phi(p), D_n^{-1} phi(q) in the polydisc of radius t r
  bool inclusion_ball = true;     // path inside B_{x_{-n}}(t r e^{-n(gamma + 2 eps)})
  bool inclusion_image = true;    // f^n(path) inside B_{x_0}(sqrt(k) t r)
  bool pass = false;
  std::string violated;
};

/// Length of phi^{-1} of the segment between phi(p) and phi(q) at index n,
/// measured by a polyline with `segments` pieces.
ConvexityResult convexity_defect(const TheoremAData& data, int n, double t, const ProjPoint& p,
                                 const ProjPoint& q, int segments = 64);

/// A point of E^{-n}(t): the branch image of a seeded point of B_{x_0}(t r / h).
ProjPoint sample_branch_point(const TheoremAData& data, int n, double t, std::mt19937_64& rng);

}  // namespace hdist

#endif  // HDIST_THEOREM_A_HPP
