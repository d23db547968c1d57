// Linearization of a contraction chain: spectrum shift, degree-by-degree
// cancellation through homological equations, and tail linearization,
// assembled into phi_n = T2_n o T1_n o Delta_n.

#ifndef HDIST_NORMALFORM_HPP
#define HDIST_NORMALFORM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "hdist/chain.hpp"
#include "hdist/spectrum.hpp"

namespace hdist {

/// Per-index family over [n_min, n_min + maps.size() - 1].
struct JetFamily {
  int n_min = 0;
  std::vector<JetMap> maps;
  int n_max() const { return n_min + static_cast<int>(maps.size()) - 1; }
  const JetMap& at(int n) const;
};

/// Chain of W^gamma_n = Delta_{n+1} o W_n o Delta_n^{-1}. The result carries
/// the shifted spectrum and gamma; its radii are the largest slow radii below
/// rho_n on which the coefficient bound keeps Lip W^gamma_n <= theta e^gamma.
ContractionChain shift_spectrum(const ContractionChain& chain, double gamma);

struct HomologicalSolution {
  int degree = 0;
  /// H_n for n in [n_min, n_max + 1] of the chain.
  JetFamily h;
  int depth = 0;
  double tail_bound = 0.0;
  double residual = 0.0;
  int forward_terms = 0;
  int backward_terms = 0;
};

/// Solves G_n^(p) + H_{n+1} o A_n - A_n o H_n = 0 for p-homogeneous H on a
/// shifted chain. Monomials whose shifted defect exceeds b use the forward
/// series, those below -b the backward series; |defect| <= b is refused.
HomologicalSolution solve_homological(const ContractionChain& shifted, int p,
                                      const ConstraintParams& params, double tail_tol = 1e-12);

struct KillResult {
  ContractionChain chain;
  JetFamily s;
  /// Largest degree-p coefficient before it was cleared.
  double degree_residual = 0.0;
};

/// Conjugates by S_n = Id + H_n, giving S_{n+1} o G_n o S_n^{-1}, whose
/// degree-p part vanishes. Radii come from conjugate_chain with eps / p*.
KillResult kill_degree(const ContractionChain& shifted, const HomologicalSolution& sol,
                       const ConstraintParams& params);

struct ContactResult {
  ContractionChain x;
  JetFamily t1;
  std::vector<double> radii;  // over [n_min, n_max + 1]
  /// Worst degree-p coefficient left by each pass, p = 2 .. p*.
  std::vector<double> degree_residuals;
  std::vector<HomologicalSolution> solutions;
};

/// Kills degrees 2 .. p* in turn; T1_n = S^(p*)_n o ... o S^(2)_n.
ContactResult improve_contact(const ContractionChain& shifted, const ConstraintParams& params,
                              double tail_tol = 1e-12);

struct TailResult {
  JetFamily t2;
  std::vector<double> increments;
  std::vector<double> ratios;
  int steps = 0;
};

/// Limit of (A_{p,n})^{-1} o X_{p,n} in jet algebra, iterating
/// Y_n <- A_n^{-1} o Y_{n+1} o X_n until the increment falls below tol.
TailResult linearize_tail(const ContractionChain& x, const ConstraintParams& params,
                          double tol = 1e-14, int max_steps = 2000);

struct NormalizationResult {
  ContractionChain input;
  ContractionChain shifted;
  ConstraintParams params;
  double gamma = 0.0;
  double epsilon = 0.0;
  int n_min = 0;
  int n_max = 0;  // last chain index; the maps below extend to n_max + 1
  JetFamily t1;
  JetFamily t2;
  JetFamily phi;
  std::vector<double> radii;  // r_n over [n_min, n_max + 1]
  std::vector<double> degree_residuals;
  std::vector<double> increments;
  std::vector<double> ratios;
  std::vector<double> coefficient_residuals;  // per chain index
  /// Bi-Lipschitz margin the T maps were certified for, per index.
  std::vector<double> band_epsilon;

  double radius(int n) const { return radii.at(n - n_min); }
  double shifted_radius(int n) const;
};

/// Runs the full pipeline. Failures raise PipelineError tagged with the stage.
NormalizationResult normalize(const ContractionChain& chain, double gamma, double epsilon,
                              double tail_tol = 1e-12);

struct DiagramRow {
  int n = 0;
  double residual = 0.0;
  double containment = 0.0;  // max |phi_n(v)|_inf / (4 r_n)
  double lip_min = 0.0;
  double lip_max = 0.0;
  double band_low = 0.0;
  double band_high = 0.0;
  bool pass = false;
};

struct DiagramReport {
  std::vector<DiagramRow> rows;
  double max_residual = 0.0;
  bool pass() const;
};

/// Samples v in the polydisc of radius r_n e^{-n gamma} and measures
/// |phi_{n+1}(W_n v) - A^gamma_n phi_n(v)|, containment in the polydisc of
/// radius 4 r_n and the bi-Lipschitz band of phi_n.
DiagramReport verify_diagram(const NormalizationResult& res, int n_samples, std::uint64_t seed,
                             double residual_tol = 1e-8);

/// Bi-Lipschitz band [e^{n gamma - 2|n| eps}, e^{n gamma + 2|n| eps}] of phi_n.
std::pair<double, double> phi_band(int n, double gamma, double epsilon);

}  // namespace hdist

#endif  // HDIST_NORMALFORM_HPP
