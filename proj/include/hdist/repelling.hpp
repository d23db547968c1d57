// Periodic points of one-variable polynomials and the repelling-cycle sums
// compared against a Birkhoff estimate of the Lyapunov exponent.

#ifndef HDIST_REPELLING_HPP
#define HDIST_REPELLING_HPP

#include <cstdint>
#include <vector>

#include "hdist/projective.hpp"

namespace hdist {

/// Eigenvalues of the companion matrix of c_0 + c_1 z + ... + c_d z^d.
std::vector<cplx> companion_roots(const std::vector<cplx>& c);

/// Fixed point of P with the largest multiplier modulus; throws DynamicsError
/// when none is repelling.
cplx repelling_fixed_point(const std::vector<cplx>& coeffs);

/// All d^n solutions of P^n(z) = root, level by level.
std::vector<cplx> backward_tree(const std::vector<cplx>& coeffs, cplx root, int n);

/// c_0..c_d of a polynomial P; evaluates P^n and (P^n)' by iteration.
struct IteratedPolynomial {
  std::vector<cplx> coeffs;
  int n = 1;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  cplx value(cplx z) const;
  /// P^n(z) and (P^n)'(z).
  std::pair<cplx, cplx> value_and_derivative(cplx z) const;
  /// P'(z) for a single step.
  cplx step_derivative(cplx z) const;
  /// Newton correction (P^n(z) - z) / ((P^n)'(z) - 1), evaluated without
  /// overflow for escaping z.
  cplx newton_ratio(cplx z) const;
};

struct RootSolve {
  std::vector<cplx> roots;
  double max_residual = 0.0;    // max |P^n(z) - z| / max(1, |(P^n)'(z)|)
  double min_separation = 0.0;  // smallest distance between two roots
  bool companion = false;       // true when the companion matrix was used
  bool reliable = false;
};

/// All d^n solutions of P^n(z) = z: companion-matrix eigenvalues of the
/// expanded polynomial up to `companion_limit`, simultaneous (Aberth)
/// iteration on the implicit iterate beyond it or when polishing fails,
/// started from the backward tree of a repelling fixed point.
RootSolve periodic_points(const std::vector<cplx>& coeffs, int n, int companion_limit = 128);

struct PeriodicPointRecord {
  int period = 0;
  cplx point;
  cplx multiplier;            // (P^n)'(point)
  bool repelling = false;     // |multiplier| > 1 + floor
  double log_jacobian = 0.0;  // log |P'(point)|
};

std::vector<PeriodicPointRecord> classify_periodic_points(const std::vector<cplx>& coeffs, int n,
                                                          const std::vector<cplx>& roots,
                                                          double floor = 1e-9);

/// d^{-n} times the sum of log |P'| over the repelling records.
double repelling_sum(const std::vector<PeriodicPointRecord>& records, int d, int n);

/// Mean of log |P'(z)| over affine sample points.
double birkhoff_log_derivative(const std::vector<cplx>& coeffs, const std::vector<ProjPoint>& samples);

struct RepellingOptions {
  int n_max = 12;
  int n_cap = 12;
  int samples = 4000;
  int depth = 30;
  std::uint64_t seed = 1;
  double floor = 1e-9;
  int companion_limit = 128;
};

struct RepellingRow {
  int n = 0;
  int count = 0;            // solutions of P^n(z) = z, with multiplicity
  int repelling_count = 0;
  double s_n = 0.0;
  double lambda_hat = 0.0;
  double gap = 0.0;         // |S_n - lambda_hat|
  double max_residual = 0.0;
  bool reliable = false;
};

struct RepellingResult {
  std::vector<RepellingRow> rows;
  double lambda_hat = 0.0;
};

/// Runs n = 1..n_max for a polynomial endomorphism of P^1. The exponent
/// estimate uses `samples` points after `depth` random backward steps from
/// seed_point.
RepellingResult repelling_experiment(const ProjectiveEndomorphism& f, const ProjPoint& seed_point,
                                     const RepellingOptions& opts = {});

}  // namespace hdist

#endif  // HDIST_REPELLING_HPP
