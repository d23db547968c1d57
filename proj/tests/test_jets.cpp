#include <doctest.h>

#include <cmath>
#include <random>

#include "hdist/jets.hpp"
#include "support.hpp"

using namespace hdist;
using hdist::testing::random_integer_jet;
using hdist::testing::random_invertible_jet;

namespace {

JetMap univariate(std::initializer_list<double> coeffs, int cap) {
  JetMap f(1, 1, cap);
  int p = 1;
  for (double c : coeffs) f.set(0, MultiIndex({p++}), c);
  return f;
}

// Direct term-by-term evaluation, independent of the library evaluator.
CVector evaluate_terms(const JetMap& f, const CVector& v) {
  CVector out = CVector::Zero(f.dim_out());
  for (int i = 0; i < f.dim_out(); ++i)
    for (const auto& [a, c] : f.component(i)) {
      cplx m = c;
      for (int j = 0; j < a.size(); ++j) m *= std::pow(v(j), a[j]);
      out(i) += m;
    }
  return out;
}

}  // namespace

TEST_CASE("multi-indices are graded lexicographic") {
  const auto m = monomials_of_order(2, 2);
  REQUIRE(m.size() == 3);
  CHECK(m[0] == MultiIndex({2, 0}));
  CHECK(m[1] == MultiIndex({1, 1}));
  CHECK(m[2] == MultiIndex({0, 2}));
  CHECK(MultiIndex({0, 1}) < MultiIndex({2, 0}));
  CHECK(monomials_of_order(3, 4).size() == 15);
  CHECK((MultiIndex({1, 2}) + MultiIndex({3, 0})) == MultiIndex({4, 2}));
}

TEST_CASE("composition of a univariate series") {
  const JetMap g = univariate({1.0, 1.0}, 4);
  CHECK(compose(g, g) == univariate({1.0, 2.0, 2.0, 1.0}, 4));
}

TEST_CASE("reversion of z + z^2 gives signed Catalan numbers") {
  const JetMap inv = formal_inverse(univariate({1.0, 1.0}, 6));
  CHECK(inv == univariate({1.0, -1.0, 2.0, -5.0, 14.0, -42.0}, 6));
}

TEST_CASE("reversion with a non-unit linear part") {
  // w = 2z + z^2  =>  z = w/2 - w^2/8 + w^3/16 - 5 w^4/128
  const JetMap inv = formal_inverse(univariate({2.0, 1.0}, 4));
  CHECK(max_coeff_difference(inv, univariate({0.5, -0.125, 0.0625, -5.0 / 128.0}, 4)) < 1e-15);
}

TEST_CASE("algebra laws hold exactly on integer jets") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 40; ++trial) {
    const int k = 1 + trial % 3;
    const int cap = 2 + trial % 4;
    const JetMap f = random_integer_jet(rng, k, k, cap);
    const JetMap g = random_integer_jet(rng, k, k, cap);
    const JetMap h = random_integer_jet(rng, k, k, cap);
    const JetMap id = JetMap::identity(k, cap);
    CHECK(compose(compose(f, g), h) == compose(f, compose(g, h)));
    CHECK(compose(id, f) == f);
    CHECK(compose(f, id) == f);
    const JetMap s = random_invertible_jet(rng, k, cap);
    const JetMap si = formal_inverse(s);
    CHECK(compose(s, si) == id);
    CHECK(compose(si, s) == id);
  }
}

TEST_CASE("composition agrees with evaluation to truncation order") {
  std::mt19937_64 rng(5);
  const JetMap f = random_integer_jet(rng, 2, 2, 4);
  const JetMap g = random_integer_jet(rng, 2, 2, 4);
  const JetMap fg = compose(f, g);
  CVector v(2);
  v << cplx(1e-4, 2e-4), cplx(-2e-4, 5e-5);
  const auto err = [&](const CVector& x) { return (evaluate(fg, x) - evaluate(f, evaluate(g, x))).norm(); };
  CHECK(err(v) < 1e-14);
  CHECK(err(v) / err(0.5 * v) > 25.0);  // the discrepancy is O(|v|^5)
}

TEST_CASE("evaluation and derivative") {
  std::mt19937_64 rng(8);
  const JetMap f = random_integer_jet(rng, 3, 2, 4);
  CVector v(3);
  v << cplx(0.3, -0.1), cplx(0.05, 0.2), cplx(-0.25, 0.0);
  CHECK((evaluate(f, v) - evaluate_terms(f, v)).norm() < 1e-13);
  const CMatrix j = jacobian(f, v);
  const double h = 1e-6;
  for (int c = 0; c < 3; ++c) {
    CVector e = CVector::Zero(3);
    e(c) = h;
    const CVector fd = (evaluate_terms(f, v + e) - evaluate_terms(f, v - e)) / (2.0 * h);
    CHECK((j.col(c) - fd).norm() < 1e-7);
  }
}

TEST_CASE("left multiplication equals composition with a linear map") {
  std::mt19937_64 rng(9);
  const JetMap f = random_integer_jet(rng, 2, 2, 3);
  CMatrix a(2, 2);
  a << 1.0, 2.0, cplx(0, 1), -3.0;
  CHECK(left_multiply(a, f) == compose(JetMap::linear(a, 3), f));
}

TEST_CASE("homogeneous parts reassemble the jet") {
  std::mt19937_64 rng(10);
  const JetMap f = random_integer_jet(rng, 2, 3, 5);
  JetMap sum = homogeneous_part(f, 1);
  for (int p = 2; p <= 5; ++p) sum = sum + homogeneous_part(f, p);
  CHECK(sum == f);
  CHECK(nonlinear_part(f) == f - homogeneous_part(f, 1));
  CHECK(f.with_cap(2) == (homogeneous_part(f, 1) + homogeneous_part(f, 2)).with_cap(2));
}

TEST_CASE("singular linear part is refused") {
  JetMap f(2, 2, 3);
  f.set(0, MultiIndex({1, 0}), 1.0);
  f.set(1, MultiIndex({1, 0}), 2.0);
  CHECK_THROWS_AS(formal_inverse(f), SingularLinearPart);
}

TEST_CASE("dimensional constant") {
  for (int k = 1; k <= 4; ++k) CHECK(cauchy_constant(k) == doctest::Approx(8.0 * std::pow(k, 1.5)));
}

TEST_CASE("nonlinear Lipschitz bound dominates sampled ratios") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const JetMap f = random_integer_jet(rng, 2, 2, 4);
    const JetMap nl = nonlinear_part(f);
    for (double rho : {0.01, 0.05, 0.2}) {
      const double bound = nonlinear_lipschitz_bound(f, rho);
      CHECK(sampled_lipschitz(nl, rho, 400, 7 + trial).max_ratio <= bound * (1 + 1e-12));
    }
    const double r = radius_for_nonlinear_lipschitz(f, 0.1, 1.0);
    CHECK(r > 0.0);
    CHECK(nonlinear_lipschitz_bound(f, r) <= 0.1 * (1 + 1e-9));
    CHECK(r <= radius_for_nonlinear_lipschitz(f, 0.2, 1.0));
  }
}

TEST_CASE("linear maps have no nonlinear Lipschitz constant") {
  CMatrix a = CMatrix::Identity(2, 2) * 0.5;
  const JetMap l = JetMap::linear(a, 3);
  CHECK(l.is_linear());
  CHECK(nonlinear_lipschitz_bound(l, 1.0) == 0.0);
  CHECK(radius_for_nonlinear_lipschitz(l, 0.1, 0.7) == doctest::Approx(0.7));
}
