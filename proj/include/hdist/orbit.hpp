// Backward orbits, equilibrium sampling, the chart cocycle of inverse branches
// and its block reduction.

#ifndef HDIST_ORBIT_HPP
#define HDIST_ORBIT_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "hdist/projective.hpp"
#include "hdist/spectrum.hpp"

namespace hdist {

enum class BranchRule {
  Seeded,   // pseudo-random preimage from the seed
  Nearest,  // preimage closest to the current point
};

struct OrbitOptions {
  BranchRule rule = BranchRule::Seeded;
  AtlasKind atlas = AtlasKind::Unitary;
  double critical_floor = 1e-10;
  int newton_iterations = 80;
  int starts_per_preimage = 4;
};

/// All preimages of x found by Newton from seeded starts, deduplicated and
/// sorted deterministically. Includes critical preimages.
std::vector<ProjPoint> preimages(const ProjectiveEndomorphism& f, const ProjPoint& x,
                                 std::mt19937_64& rng, const OrbitOptions& opts = {});

/// Newton refinement of y towards f(y) = x inside the chart centred at y.
ProjPoint refine_preimage(const ProjectiveEndomorphism& f, const ProjPoint& x, ProjPoint y,
                          int iterations = 80);

/// x_m for m in [-depth, future]: x_{-n-1} is a preimage of x_{-n} and
/// x_{m+1} = f(x_m) for m >= 0.
struct BackwardOrbit {
  std::vector<ProjPoint> past;    // x_0, x_{-1}, ..., x_{-depth}
  std::vector<ProjPoint> future;  // x_1, ..., x_{future}
  std::vector<double> residuals;  // FS distance f(x_{-n-1}) to x_{-n}
  std::vector<double> t;          // |(d f)^{-1}|^{-2} at x_{-n-1}, in charts
  std::vector<double> rho;        // min(c t, 1)
  double c = 0.0;
  std::uint64_t seed = 0;

  int depth() const { return static_cast<int>(past.size()) - 1; }
  int future_length() const { return static_cast<int>(future.size()); }
  const ProjPoint& point(int m) const;
};

BackwardOrbit backward_orbit(const ProjectiveEndomorphism& f, const ProjPoint& x0, int depth,
                             std::uint64_t seed, const OrbitOptions& opts = {}, int future = 0);

/// `count` points, each after `depth` random backward steps from seed_point.
std::vector<ProjPoint> sample_equilibrium(const ProjectiveEndomorphism& f,
                                          const ProjPoint& seed_point, int depth, int count,
                                          std::uint64_t seed, const OrbitOptions& opts = {});

/// Forward exponents by QR along `steps` forward iterates of every sample,
/// in decreasing order.
std::vector<double> estimate_exponents(const ProjectiveEndomorphism& f,
                                       const std::vector<ProjPoint>& samples, int steps = 1);

/// Mean of log |det d f| (in charts) over the samples.
double birkhoff_log_jacobian(const ProjectiveEndomorphism& f, const std::vector<ProjPoint>& samples);

/// Local inverse branches in charts along chain indices n in [n_min, n_max]:
/// F_n = psi_{x_{-n}}^{-1} o f o psi_{x_{-n-1}}, stored with its inverse jet.
struct CocycleData {
  int n_min = 0;
  std::vector<Chart> charts;    // chart at x_{-n}, n in [n_min, n_max + 1]
  std::vector<JetMap> forward;  // F_n
  std::vector<JetMap> inverse;  // F_n^{-1}
  std::vector<CMatrix> linear;  // d_0 F_n^{-1}
  double linear_check = 0.0;    // max |d_0 F_n^{-1} - (direct derivative)^{-1}|

  int n_max() const { return n_min + static_cast<int>(inverse.size()) - 1; }
  const Chart& chart(int n) const { return charts.at(n - n_min); }
};

CocycleData build_cocycle(const ProjectiveEndomorphism& f, const BackwardOrbit& orbit, int n_min,
                          int n_max, int degree_cap, AtlasKind atlas = AtlasKind::Unitary);

/// Exponents of a linear cocycle (inverse branches, so the values are the
/// contraction rates) by QR over the whole sequence, in decreasing order.
std::vector<double> cocycle_exponents(const std::vector<CMatrix>& a);

/// Groups exponents closer than tol into blocks of a spectrum.
LyapunovSpectrum group_exponents(const std::vector<double>& exps, double tol = 0.02);

enum class OseledecMode { ExactDiagonal, FiniteTime };

struct OseledecData {
  OseledecMode mode = OseledecMode::ExactDiagonal;
  int n_min = 0;
  std::vector<CMatrix> c;        // C_n, n in [n_min, n_max + 1]
  std::vector<CMatrix> reduced;  // C_{n+1} A_n C_n^{-1}, off-block part removed
  std::vector<double> h;         // fast sequence with |C_n| <= h_n
  double leakage = 0.0;          // largest off-block entry removed
  double band_margin = 0.0;      // min slack of block singular values, log units
  bool blocks_ok = false;
};

/// Block reduction of the linear cocycle a[n - n_min]. Uses C_n = Id when the
/// cocycle is already block diagonal inside the bands; otherwise finite-time
/// singular-vector filtrations over the look-ahead window.
OseledecData oseledec_reduce(const std::vector<CMatrix>& a, int n_min, const LyapunovSpectrum& spec,
                             double epsilon, int lookahead = 20, double max_leakage = 1e-6);

}  // namespace hdist

#endif  // HDIST_ORBIT_HPP
