// Generators shared by the test programs.

#ifndef HDIST_TESTS_SUPPORT_HPP
#define HDIST_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/SVD>

#include "hdist/chain.hpp"
#include "hdist/jets.hpp"
#include "hdist/spectrum.hpp"

namespace hdist::testing {

inline std::string data_path(const std::string& name) { return std::string(HDIST_TEST_DATA) + "/" + name; }

/// Small-integer coefficients keep every composition exact in binary64.
inline JetMap random_integer_jet(std::mt19937_64& rng, int k_in, int k_out, int cap, bool with_linear = true) {
  std::uniform_int_distribution<int> c(-2, 2);
  std::bernoulli_distribution keep(0.4);
  JetMap f(k_in, k_out, cap);
  for (int p = with_linear ? 1 : 2; p <= cap; ++p)
    for (const auto& a : monomials_of_order(k_in, p))
      for (int i = 0; i < k_out; ++i)
        if (keep(rng)) f.set(i, a, cplx(c(rng), c(rng)));
  return f;
}

/// Tangent to a diagonal of signed powers of two, so the formal inverse is
/// exact as well.
inline JetMap random_invertible_jet(std::mt19937_64& rng, int k, int cap) {
  std::uniform_int_distribution<int> e(-1, 1);
  std::bernoulli_distribution sign(0.5);
  JetMap f = random_integer_jet(rng, k, k, cap, false);
  for (int i = 0; i < k; ++i)
    f.set(i, MultiIndex::unit(k, i), (sign(rng) ? 1.0 : -1.0) * std::ldexp(1.0, e(rng)));
  return f;
}

inline CMatrix random_unitary(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<CMatrix> qr(m);
  return qr.householderQ() * CMatrix::Identity(n, n);
}

/// A chain over [n_min, n_max] with block-diagonal linear parts whose block
/// singular values sit within eps/2 of e^{-Lambda_j}, random nonlinear terms
/// of degrees 2..cap, and one constant radius on which Lip W_n <= theta.
inline ContractionChain random_admissible_chain(std::mt19937_64& rng, const LyapunovSpectrum& spec,
                                                int n_min, int n_max, double eps, int cap = 3,
                                                double scale = 0.3) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ContractionChain c;
  c.n_min = n_min;
  c.spectrum = spec;
  c.epsilon = eps;
  const int k = spec.k();
  const double theta = std::exp(-spec.smallest() + 2.0 * eps);
  double rho = 1.0;
  for (int n = n_min; n <= n_max; ++n) {
    CMatrix a = CMatrix::Zero(k, k);
    for (int b = 0; b < spec.l(); ++b) {
      const int o = spec.offset(b);
      const int kb = spec.multiplicity(b);
      const double s = std::exp(-spec.exponent(b) + 0.5 * eps * u(rng));
      a.block(o, o, kb, kb) = s * random_unitary(rng, kb);
    }
    JetMap w = JetMap::linear(a, cap);
    for (int p = 2; p <= cap; ++p)
      for (const auto& al : monomials_of_order(k, p))
        for (int i = 0; i < k; ++i) w.set(i, al, scale * cplx(u(rng), u(rng)));
    const double smax = Eigen::JacobiSVD<CMatrix>(a).singularValues()(0);
    rho = std::min(rho, radius_for_nonlinear_lipschitz(w, 0.99 * (theta - smax), 1.0));
    c.maps.push_back(std::move(w));
  }
  c.radii.assign(c.maps.size(), rho);
  return c;
}

}  // namespace hdist::testing

#endif  // HDIST_TESTS_SUPPORT_HPP
