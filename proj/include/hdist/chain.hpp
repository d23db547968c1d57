// Slow sequences and finite-window nonautonomous contraction chains.

#ifndef HDIST_CHAIN_HPP
#define HDIST_CHAIN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "hdist/jets.hpp"
#include "hdist/spectrum.hpp"

namespace hdist {

enum class ExtensionPolicy { Constant, Periodic, Reject };

std::string to_string(ExtensionPolicy p);
ExtensionPolicy parse_extension_policy(const std::string& s);

/// Maps an index outside [n_min, n_max] back into the window according to
/// the policy. Throws InvalidArgument for Reject.
int wrap_index(int n, int n_min, int n_max, ExtensionPolicy policy);

/// delta_n over [n_min, n_min + size - 1]. Fast sequences are stored as
/// their reciprocals.
struct SlowSequence {
  int n_min = 0;
  std::vector<double> values;
  double epsilon = 0.0;
  ExtensionPolicy policy = ExtensionPolicy::Constant;

  int n_max() const { return n_min + static_cast<int>(values.size()) - 1; }
  /// Value at n, extended beyond the window by the policy.
  double at(int n) const;
};

struct SlowReport {
  bool pass = true;
  /// Steps n (meaning the pair n, n+1) where the ratio leaves [e^-eps, e^eps].
  std::vector<int> violations;
  /// max |log(delta_{n+1}/delta_n)| over the window.
  double worst_log_ratio = 0.0;
};

SlowReport validate_slow(const SlowSequence& seq);

/// Largest eps-slow sequence lying below the given values.
std::vector<double> slow_minorant(const std::vector<double>& values, double epsilon);

/// Like slow_minorant but treating the sequence as cyclic.
std::vector<double> cyclic_slow_minorant(const std::vector<double>& values, double epsilon);

struct ContractionChain {
  int n_min = 0;
  std::vector<JetMap> maps;
  std::vector<double> radii;
  LyapunovSpectrum spectrum{{1.0}, {1}};
  double gamma = 0.0;
  double epsilon = 0.0;
  ExtensionPolicy policy = ExtensionPolicy::Constant;

  int n_max() const { return n_min + static_cast<int>(maps.size()) - 1; }
  int size() const { return static_cast<int>(maps.size()); }
  int k() const { return spectrum.k(); }
  double theta() const;

  /// W_n, extended beyond the window by the policy.
  const JetMap& map(int n) const;
  /// rho_n, extended beyond the window by the policy (periodic radii are
  /// flattened cyclically so they stay slow across the seam).
  double radius(int n) const;
  SlowSequence radius_sequence() const;
};

JetMap extend(const ContractionChain& chain, int n);

struct ChainIndexReport {
  int n = 0;
  bool block_ok = true;
  double off_block = 0.0;
  bool singular_values_ok = true;
  /// Worst violation of the block singular-value band, in log units (<= 0 is fine).
  double singular_value_excess = 0.0;
  bool lipschitz_ok = true;
  double lipschitz_bound = 0.0;
  double lipschitz_sampled = 0.0;
};

struct ChainReport {
  std::vector<ChainIndexReport> indices;
  SlowReport radii;
  double theta = 0.0;
  bool pass() const;
  std::string summary() const;
};

/// Checks block preservation, block singular values, Lip W_n <= theta on the
/// polydisc of radius rho_n (coefficient bound authoritative, sampled
/// diagnostic) and slowness of the radii.
ChainReport validate_chain(const ContractionChain& chain, int n_samples = 64,
                           std::uint64_t seed = 1);

/// Radius on which alpha e^-eps' |u-v| <= |K(u)-K(v)| <= beta e^eps' |u-v|,
/// from the Cauchy bound on the reference polydisc. Capped at r/2.
double tame_radius(const JetMap& k, double alpha, double beta, double eps_prime,
                   const CoeffBound& bound, bool self_map = false);

/// Largest radius (<= rho_max) on which K is e^{+-eps'}-close to its linear
/// part in the bi-Lipschitz sense, by the rigorous coefficient bound.
double certified_band_radius(const JetMap& k, double eps_prime, double rho_max);

/// Coefficient upper bound of Lip K on the polydisc of radius rho.
double lipschitz_upper_bound(const JetMap& k, double rho);

/// Conjugates L_n to M_{n+1} o L_n o M_n^{-1}. `m` holds M_n for
/// n in [n_min, n_max + 1]; every M_n must be tangent to the identity.
/// The returned chain carries the radii psi_n on which the M_n are
/// e^{+-eps'}-bi-Lipschitz and land inside rho_n.
ContractionChain conjugate_chain(const std::vector<JetMap>& m, const ContractionChain& chain,
                                 double eps_prime);

}  // namespace hdist

#endif  // HDIST_CHAIN_HPP
