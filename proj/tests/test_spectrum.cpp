#include <doctest.h>

#include <cmath>
#include <random>

#include "hdist/spectrum.hpp"

using namespace hdist;

namespace {

const double L2 = std::log(2.0);
const double L3 = std::log(3.0);
const double L4 = std::log(4.0);

// Every alpha in N^k with lo <= |alpha| <= hi, by odometer (k <= 3).
std::vector<std::vector<int>> brute_indices(int k, int lo, int hi) {
  std::vector<std::vector<int>> out;
  for (int a = 0; a <= hi; ++a)
    for (int b = 0; b <= (k > 1 ? hi : 0); ++b)
      for (int c = 0; c <= (k > 2 ? hi : 0); ++c) {
        const int s = a + b + c;
        if (s < lo || s > hi) continue;
        std::vector<int> v{a, b, c};
        v.resize(k);
        out.push_back(v);
      }
  return out;
}

double brute_defect(const std::vector<double>& lam, double target, const std::vector<int>& a) {
  double s = -target;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * lam[i];
  return s;
}

LyapunovSpectrum random_spectrum(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 3.0);
  std::uniform_int_distribution<int> l_dist(1, 3);
  const int l = l_dist(rng);
  std::vector<double> ex;
  for (int i = 0; i < l; ++i) ex.push_back(u(rng));
  std::sort(ex.rbegin(), ex.rend());
  std::vector<int> mult(l, 1);
  if (l < 3 && std::bernoulli_distribution(0.5)(rng)) mult[0] = 2;
  return LyapunovSpectrum(ex, mult);
}

}  // namespace

TEST_CASE("spectrum layout") {
  LyapunovSpectrum s({L4, L2}, {1, 2});
  CHECK(s.k() == 3);
  CHECK(s.l() == 2);
  CHECK(s.offset(1) == 1);
  CHECK(s.block_of(2) == 1);
  CHECK(s.repeated() == std::vector<double>{L4, L2, L2});
  CHECK(s.shifted(0.1).exponent(1) == doctest::Approx(L2 - 0.1));
  CHECK_THROWS(s.shifted(L2));
  CHECK_THROWS(LyapunovSpectrum({L2, L4}, {1, 1}));
  CHECK_THROWS(LyapunovSpectrum({L2}, {0}));
}

TEST_CASE("integer part tolerates exact ratios") {
  CHECK(integer_part(L4 / L2) == 2);
  CHECK(integer_part(std::log(8.0) / L2) == 3);
  CHECK(integer_part(L3 / L2) == 1);
}

TEST_CASE("resonances of (log 4, log 2)") {
  LyapunovSpectrum s({L4, L2}, {1, 1});
  const auto r1 = resonant_indices(s, 0);
  REQUIRE(r1.size() == 1);
  CHECK(r1[0] == MultiIndex({0, 2}));
  CHECK(resonant_indices(s, 1).empty());
  CHECK(resonance_defect(s, 0, MultiIndex({1, 1})) == doctest::Approx(L2));
}

TEST_CASE("resonances agree with brute force") {
  const std::vector<LyapunovSpectrum> cases = {
      LyapunovSpectrum({3 * L2, L2}, {1, 1}), LyapunovSpectrum({L4, L2}, {1, 2}),
      LyapunovSpectrum({L3, L2}, {1, 1}), LyapunovSpectrum({std::log(6.0), L3, L2}, {1, 1, 1})};
  for (const auto& s : cases) {
    const auto lam = s.repeated();
    for (int j = 0; j < s.l(); ++j) {
      const int hi = static_cast<int>(std::floor(s.exponent(j) / s.smallest() + 1e-9));
      std::size_t expected = 0;
      for (const auto& a : brute_indices(s.k(), 2, hi))
        if (std::abs(brute_defect(lam, s.exponent(j), a)) < 1e-12) ++expected;
      CHECK(resonant_indices(s, j).size() == expected);
    }
  }
  // log 6 = log 3 + log 2
  CHECK(resonant_indices(cases[3], 0).size() == 1);
  CHECK(resonant_indices(cases[0], 0).size() == 1);  // (0, 3)
  CHECK(resonant_indices(cases[1], 0).size() == 3);  // all of order 2 in the second block
}

TEST_CASE("gap constant of (log 4, log 2) is half of log 2") {
  CHECK(gap_constant(LyapunovSpectrum({L4, L2}, {1, 1})) == doctest::Approx(L2 / 2.0));
  CHECK(gap_constant(LyapunovSpectrum({10.0}, {1})) == doctest::Approx(0.99 * L4));
}

TEST_CASE("derived constants") {
  LyapunovSpectrum s({L4, L2}, {1, 1});
  const double g = 0.04;
  const double e = 0.002;
  const ConstraintParams c = validate_constraints(s, g, e);
  const double ratio = (L4 - g) / (L2 - g);
  CHECK(c.ratio == doctest::Approx(ratio));
  CHECK(c.q == static_cast<int>(std::floor(ratio)) + 1);
  CHECK(c.p_star == c.q);
  CHECK(c.b == doctest::Approx(0.5 * std::min(g, L2 / 2.0)));
  CHECK(c.theta == doctest::Approx(std::exp(-L2 + 2 * e)));
  CHECK(c.m == doctest::Approx(std::exp(-(L4 - g) - e + g)));
  CHECK(c.M == doctest::Approx(std::exp(-(L2 - g) + e + g)));
  CHECK(c.beta == doctest::Approx(std::pow(c.M * std::exp(2 * e), c.q + 1) / c.m));
  CHECK(c.all_pass());
}

TEST_CASE("inadmissible shifts are flagged") {
  LyapunovSpectrum s({L2}, {1});
  CHECK_FALSE(validate_constraints(s, 0.5, 0.001).flag("gamma_below_half_smallest"));
  CHECK_FALSE(validate_constraints(s, 0.04, 0.03).flag("epsilon_below_half_gamma"));
  CHECK_THROWS_AS(validate_constraints(s, -0.1, 0.001), InvalidArgument);
}

TEST_CASE("expert mode records base resonances") {
  const ConstraintParams res = validate_constraints(LyapunovSpectrum({L4, L2}, {1, 1}), 0.0, 0.001);
  CHECK(res.expert_mode);
  CHECK(res.gamma_check == doctest::Approx(res.a / 4.0));
  CHECK_FALSE(res.flag("base_nonresonant"));
  const ConstraintParams clean = validate_constraints(LyapunovSpectrum({L2}, {1}), 0.0, 0.001);
  CHECK(clean.flag("base_nonresonant"));
  CHECK(clean.all_pass());
}

TEST_CASE("suggested parameters are admissible and deterministic") {
  LyapunovSpectrum s({L4, L2}, {1, 1});
  const auto [g, e] = suggest_parameters(s);
  CHECK(g == doctest::Approx(L2 / 16.0));
  CHECK(e == doctest::Approx(L2 / 256.0));
  CHECK(suggest_parameters(s) == std::make_pair(g, e));
  CHECK(validate_constraints(s, g, e).all_pass());
}

TEST_CASE("admissible shifts clear every resonance by at least b") {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const LyapunovSpectrum s = random_spectrum(rng);
    std::pair<double, double> ge;
    try {
      ge = suggest_parameters(s);
    } catch (const Error&) {
      continue;
    }
    const auto [g, e] = ge;
    const ResonanceReport rep = shifted_resonance_check(s, g, e);
    CHECK(rep.violations.empty());
    CHECK(rep.min_margin >= rep.b);
    // Independent minimum over the same range.
    const LyapunovSpectrum sh = s.shifted(g);
    const auto lam = sh.repeated();
    const int hi = static_cast<int>(std::floor(sh.largest() / sh.smallest() + 1e-9));
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& a : brute_indices(s.k(), 2, hi))
      for (int j = 0; j < s.l(); ++j) worst = std::min(worst, std::abs(brute_defect(lam, sh.exponent(j), a)));
    if (std::isinf(worst)) {
      CHECK(std::isinf(rep.min_margin));  // empty range: no resonance possible
    } else {
      CHECK(worst == doctest::Approx(rep.min_margin));
    }
    ++checked;
  }
  CHECK(checked >= 90);
}
