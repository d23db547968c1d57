#include "hdist/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hdist {

LyapunovSpectrum::LyapunovSpectrum(std::vector<double> exponents, std::vector<int> multiplicities)
    : exponents_(std::move(exponents)), multiplicities_(std::move(multiplicities)) {
  if (exponents_.empty()) throw InvalidArgument("spectrum needs at least one exponent");
  if (exponents_.size() != multiplicities_.size())
    throw DimensionMismatch("exponents and multiplicities differ in length");
  offsets_.push_back(0);
  for (std::size_t j = 0; j < exponents_.size(); ++j) {
    if (!(exponents_[j] > 0.0) || !std::isfinite(exponents_[j]))
      throw InvalidArgument("exponents must be positive and finite");
    if (j > 0 && !(exponents_[j] < exponents_[j - 1]))
      throw InvalidArgument("exponents must be strictly decreasing");
    if (multiplicities_[j] <= 0) throw InvalidArgument("multiplicities must be positive");
    offsets_.push_back(offsets_.back() + multiplicities_[j]);
  }
}

int LyapunovSpectrum::block_of(int coordinate) const {
  if (coordinate < 0 || coordinate >= k()) throw InvalidArgument("coordinate out of range");
  int j = 0;
  while (offsets_[j + 1] <= coordinate) ++j;
  return j;
}

std::vector<double> LyapunovSpectrum::repeated() const {
  std::vector<double> out;
  out.reserve(k());
  for (int j = 0; j < l(); ++j) out.insert(out.end(), multiplicities_[j], exponents_[j]);
  return out;
}

LyapunovSpectrum LyapunovSpectrum::shifted(double gamma) const {
  std::vector<double> e(exponents_);
  for (double& x : e) x -= gamma;
  return LyapunovSpectrum(std::move(e), multiplicities_);
}

int integer_part(double x) { return static_cast<int>(std::floor(x + 1e-9)); }

double resonance_defect(const LyapunovSpectrum& spec, int j, const MultiIndex& alpha) {
  if (alpha.size() != spec.k()) throw DimensionMismatch("multi-index length differs from k");
  double s = 0.0;
  for (int b = 0; b < spec.l(); ++b) {
    int count = 0;
    for (int i = spec.offset(b); i < spec.offset(b + 1); ++i) count += alpha[i];
    s += count * spec.exponent(b);
  }
  return s - spec.exponent(j);
}

std::vector<MultiIndex> multi_indices_between(int k, int lo, int hi) {
  std::vector<MultiIndex> out;
  for (int p = std::max(lo, 0); p <= hi; ++p) {
    auto level = monomials_of_order(k, p);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

std::vector<MultiIndex> resonant_indices(const LyapunovSpectrum& spec, int j, double tol) {
  if (j < 0 || j >= spec.l()) throw InvalidArgument("block index out of range");
  if (tol < 0.0) throw InvalidArgument("negative tolerance");
  const int hi = integer_part(spec.exponent(j) / spec.smallest());
  std::vector<MultiIndex> out;
  for (const auto& alpha : multi_indices_between(spec.k(), 2, hi)) {
    if (std::abs(resonance_defect(spec, j, alpha)) <= tol) out.push_back(alpha);
  }
  return out;
}

double gap_constant(const LyapunovSpectrum& spec, double tol) {
  const int hi = integer_part(2.0 * spec.largest() / spec.smallest());
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& alpha : multi_indices_between(spec.k(), 2, hi)) {
    for (int j = 0; j < spec.l(); ++j) {
      const double d = std::abs(resonance_defect(spec, j, alpha));
      if (d <= tol) continue;
      if (d < 1e-9)
        throw ToleranceConflict("non-resonant index with defect " + std::to_string(d));
      min_gap = std::min(min_gap, d);
    }
  }
  return std::min(0.5 * min_gap, 0.99 * std::log(4.0));
}

bool ConstraintParams::all_pass() const {
  return std::all_of(flags.begin(), flags.end(), [](const ConstraintFlag& f) { return f.pass; });
}

bool ConstraintParams::flag(const std::string& name) const {
  for (const auto& f : flags)
    if (f.name == name) return f.pass;
  throw InvalidArgument("unknown constraint flag " + name);
}

ConstraintParams validate_constraints(const LyapunovSpectrum& spec, double gamma, double epsilon) {
  if (gamma < 0.0 || !(epsilon > 0.0)) throw InvalidArgument("need gamma >= 0 and epsilon > 0");
  ConstraintParams c;
  c.a = gap_constant(spec);
  c.gamma = gamma;
  c.epsilon = epsilon;
  c.expert_mode = gamma == 0.0;
  c.gamma_check = c.expert_mode ? c.a / 4.0 : gamma;
  const double g = c.gamma_check;
  c.b = 0.5 * std::min(g, c.a);

  const double l1 = spec.largest();
  const double ll = spec.smallest();
  const double l1g = l1 - gamma;
  const double llg = ll - gamma;
  if (llg > 0.0) {
    c.ratio = l1g / llg;
    c.q = integer_part(c.ratio) + 1;
  }
  c.p_star = c.q;
  c.theta = std::exp(-ll + 2.0 * epsilon);
  c.m = std::exp(-l1g - epsilon + gamma);
  c.M = std::exp(-llg + epsilon + gamma);
  c.beta = std::pow(c.M * std::exp(2.0 * epsilon), c.q + 1) / c.m;

  // The ratio inequalities use the actual shift; the epsilon inequalities use
  // gamma_check, which is a/4 in expert mode.
  const int ri = llg > 0.0 ? integer_part(c.ratio) : 0;
  c.flags = {
      {"gamma_below_half_smallest", gamma < ll / 2.0},
      {"gamma_resonance_room", gamma * (ri - 1) < c.a / 2.0},
      {"gamma_ratio_bound", llg > 0.0 && 4.0 * gamma * (c.ratio + 1.0) <= llg},
      {"epsilon_below_half_gamma", 2.0 * epsilon < g},
      {"contraction_margin", 4.0 * epsilon + 2.0 * g < ll},
      {"epsilon_gap_room", epsilon * (ri + 3) < c.b},
      {"tail_rate", llg > 0.0 && std::pow(c.M * std::exp(2.0 * epsilon), c.q + 1) <
                                     c.m * std::exp(-epsilon)},
  };
  if (c.expert_mode) {
    bool clean = true;
    for (int j = 0; j < spec.l(); ++j) clean = clean && resonant_indices(spec, j).empty();
    c.flags.push_back({"base_nonresonant", clean});
  }
  return c;
}

std::pair<double, double> suggest_parameters(const LyapunovSpectrum& spec) {
  constexpr double floor = 1e-9;
  for (double gamma = spec.smallest() / 4.0; gamma >= floor; gamma /= 2.0) {
    for (double eps = gamma / 4.0; eps >= floor; eps /= 2.0) {
      if (validate_constraints(spec, gamma, eps).all_pass()) return {gamma, eps};
    }
  }
  throw InvalidArgument("no admissible (gamma, epsilon) above 1e-9");
}

ResonanceReport shifted_resonance_check(const LyapunovSpectrum& spec, double gamma, double epsilon) {
  const ConstraintParams c = validate_constraints(spec, gamma, epsilon);
  ResonanceReport rep;
  rep.b = c.b;
  rep.min_margin = std::numeric_limits<double>::infinity();
  const LyapunovSpectrum sh = spec.shifted(gamma);
  const int hi = integer_part(sh.largest() / sh.smallest());
  for (const auto& alpha : multi_indices_between(spec.k(), 2, hi)) {
    for (int j = 0; j < spec.l(); ++j) {
      const double d = resonance_defect(sh, j, alpha);
      rep.min_margin = std::min(rep.min_margin, std::abs(d));
      if (std::abs(d) <= c.b) rep.violations.push_back({j, alpha, d});
    }
  }
  return rep;
}

}  // namespace hdist
