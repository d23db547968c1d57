// Lyapunov-spectrum bookkeeping: resonances, the gap constant, the shifted
// spectrum and the admissibility constraints on (gamma, epsilon).

#ifndef HDIST_SPECTRUM_HPP
#define HDIST_SPECTRUM_HPP

#include <string>
#include <utility>
#include <vector>

#include "hdist/jets.hpp"

namespace hdist {

/// Distinct exponents Lambda_1 > ... > Lambda_l > 0 (nats) with multiplicities.
/// Block j occupies coordinates [offset(j), offset(j+1)).
class LyapunovSpectrum {
 public:
  LyapunovSpectrum(std::vector<double> exponents, std::vector<int> multiplicities);

  int k() const { return offsets_.back(); }
  int l() const { return static_cast<int>(exponents_.size()); }
  double exponent(int j) const { return exponents_[j]; }
  int multiplicity(int j) const { return multiplicities_[j]; }
  const std::vector<double>& exponents() const { return exponents_; }
  const std::vector<int>& multiplicities() const { return multiplicities_; }
  double largest() const { return exponents_.front(); }
  double smallest() const { return exponents_.back(); }

  int offset(int j) const { return offsets_[j]; }
  int block_of(int coordinate) const;
  /// lambda_1 >= ... >= lambda_k, each Lambda_j repeated k_j times.
  std::vector<double> repeated() const;

  /// Same multiplicities, every exponent lowered by gamma (must stay > 0).
  LyapunovSpectrum shifted(double gamma) const;

  friend bool operator==(const LyapunovSpectrum&, const LyapunovSpectrum&) = default;

 private:
  std::vector<double> exponents_;
  std::vector<int> multiplicities_;
  std::vector<int> offsets_;
};

/// Integer part [x] with a 1e-9 slack so that exact ratios such as
/// log 4 / log 2 land on the intended integer.
int integer_part(double x);

/// alpha . lambda - Lambda_j for the given spectrum.
double resonance_defect(const LyapunovSpectrum& spec, int j, const MultiIndex& alpha);

/// All multi-indices of length k with total order in [lo, hi].
std::vector<MultiIndex> multi_indices_between(int k, int lo, int hi);

/// j-resonant indices (j is 0-based): 2 <= |alpha| <= [Lambda_j/Lambda_l] and
/// |alpha . lambda - Lambda_j| <= tol.
std::vector<MultiIndex> resonant_indices(const LyapunovSpectrum& spec, int j, double tol = 1e-12);

/// Half the smallest non-resonant defect over 2 <= |alpha| <= [2 Lambda_1/Lambda_l],
/// capped at 0.99 ln 4. Throws ToleranceConflict when that minimum is
/// numerically zero.
double gap_constant(const LyapunovSpectrum& spec, double tol = 1e-12);

struct ConstraintFlag {
  std::string name;
  bool pass = false;
};

/// All constants derived from (spectrum, gamma, epsilon), plus one flag per
/// admissibility inequality.
struct ConstraintParams {
  double a = 0.0;
  double b = 0.0;
  double gamma = 0.0;
  double epsilon = 0.0;
  /// gamma used in the inequalities; a/4 in the gamma = 0 expert mode.
  double gamma_check = 0.0;
  bool expert_mode = false;
  double ratio = 0.0;  // Lambda_1^gamma / Lambda_l^gamma
  int p_star = 0;
  int q = 0;
  double m = 0.0;
  double M = 0.0;
  double theta = 0.0;
  double beta = 0.0;
  std::vector<ConstraintFlag> flags;

  bool all_pass() const;
  bool flag(const std::string& name) const;
};

/// Evaluates the admissibility inequalities. gamma = 0 selects the expert mode
/// (classical Koenigs regime): the epsilon inequalities and b use a/4 in place
/// of gamma, the pure gamma inequalities keep gamma = 0, and a
/// "base_nonresonant" flag is added.
ConstraintParams validate_constraints(const LyapunovSpectrum& spec, double gamma, double epsilon);

/// Deterministic halving search for an admissible (gamma, epsilon).
std::pair<double, double> suggest_parameters(const LyapunovSpectrum& spec);

struct ResonanceViolation {
  int j = 0;
  MultiIndex alpha;
  double defect = 0.0;
};

struct ResonanceReport {
  double b = 0.0;
  /// Smallest |defect| seen; +inf when the range is empty.
  double min_margin = 0.0;
  std::vector<ResonanceViolation> violations;
};

/// Checks alpha . lambda^gamma - Lambda_j^gamma outside [-b, b] for every j
/// and 2 <= |alpha| <= [Lambda_1^gamma / Lambda_l^gamma].
ResonanceReport shifted_resonance_check(const LyapunovSpectrum& spec, double gamma, double epsilon);

}  // namespace hdist

#endif  // HDIST_SPECTRUM_HPP
