// Truncated multivariate complex power series ("jets") fixing the origin.
//
// A JetMap stores, per output component, a sparse map from multi-indices to
// complex coefficients. Only orders 1..degree_cap are admitted; the constant
// term is implicitly zero. All operations are pure and return new values.

#ifndef HDIST_JETS_HPP
#define HDIST_JETS_HPP

#include <complex>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hdist/error.hpp"

namespace hdist {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Exponent vector alpha in N^k. Ordered graded-lexicographically: by total
/// order first, then lexicographically with larger leading exponents first
/// (so z1^2 < z1 z2 < z2^2 in storage order).
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries);
  static MultiIndex zero(int k) { return MultiIndex(std::vector<int>(k, 0)); }
  static MultiIndex unit(int k, int i);

  int size() const { return static_cast<int>(e_.size()); }
  int order() const { return order_; }
  int operator[](int i) const { return e_[i]; }
  const std::vector<int>& entries() const { return e_; }

  MultiIndex operator+(const MultiIndex& o) const;
  friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.e_ == b.e_; }
  friend bool operator<(const MultiIndex& a, const MultiIndex& b);

 private:
  std::vector<int> e_;
  int order_ = 0;
};

/// All multi-indices of length k with total order exactly p, in storage order.
std::vector<MultiIndex> monomials_of_order(int k, int p);

/// Scalar polynomial in k variables (a constant term is allowed here).
using Poly = std::map<MultiIndex, cplx>;

Poly poly_mul(const Poly& a, const Poly& b, int cap);
void poly_axpy(Poly& acc, cplx s, const Poly& x);
/// Power series of 1/p truncated at `cap`; requires p(0) != 0.
Poly poly_reciprocal(const Poly& p, int k, int cap);

class JetMap {
 public:
  JetMap(int dim_in, int dim_out, int degree_cap);

  static JetMap identity(int k, int degree_cap);
  static JetMap linear(const CMatrix& a, int degree_cap);
  /// Builds a jet from polynomial components, dropping constant terms and
  /// orders above the cap.
  static JetMap from_polys(int dim_in, const std::vector<Poly>& comps, int degree_cap);

  int dim_in() const { return dim_in_; }
  int dim_out() const { return static_cast<int>(comps_.size()); }
  int degree_cap() const { return cap_; }

  cplx coeff(int out, const MultiIndex& alpha) const;
  /// Sets a coefficient; exact zeros are not stored.
  void set(int out, const MultiIndex& alpha, cplx value);
  void add(int out, const MultiIndex& alpha, cplx value);

  const Poly& component(int out) const { return comps_[out]; }
  std::size_t term_count() const;

  CMatrix linear_part() const;
  bool is_linear() const;
  /// max |coefficient| over all stored terms (0 for the zero map).
  double coeff_norm() const;
  double coeff_norm(int order) const;

  JetMap with_cap(int degree_cap) const;

  friend bool operator==(const JetMap& a, const JetMap& b);
  friend JetMap operator+(const JetMap& a, const JetMap& b);
  friend JetMap operator-(const JetMap& a, const JetMap& b);
  friend JetMap operator*(cplx s, const JetMap& a);

 private:
  int dim_in_;
  int cap_;
  std::vector<Poly> comps_;
};

/// Truncation at the shared cap of F o G.
JetMap compose(const JetMap& f, const JetMap& g);
/// A o F for a matrix A.
JetMap left_multiply(const CMatrix& a, const JetMap& f);
/// The restriction of F to monomials of order p.
JetMap homogeneous_part(const JetMap& f, int p);
/// F minus its linear part.
JetMap nonlinear_part(const JetMap& f);
/// Compositional inverse up to O(cap + 1). Throws SingularLinearPart when the
/// linear part has condition number above `max_condition`.
JetMap formal_inverse(const JetMap& f, double max_condition = 1e12);

CVector evaluate(const JetMap& f, const CVector& v);
CMatrix jacobian(const JetMap& f, const CVector& v);

double max_coeff_difference(const JetMap& a, const JetMap& b);

/// Cauchy-type bound for F on the polydisc of radius r.
struct CoeffBound {
  double radius = 0.0;
  double sup_bound = 0.0;
  double second_derivative_bound = 0.0;
};

/// Dimensional constant of the second-derivative Cauchy estimate on the
/// polydisc of radius r/2 inside radius r: c = 8 k^{3/2}.
double cauchy_constant(int k);

/// s bounds sup|F| (Euclidean) on the polydisc of radius r via coefficients;
/// second_derivative_bound = c s / r^2.
CoeffBound cauchy_bound(const JetMap& f, double r);

/// Radius rho <= r/2 on which Lip(F - d_0F) <= kappa, from the Cauchy bound:
/// rho = kappa r^2 / (c s) capped at r/2. Linear maps get r/2.
double lipschitz_radius(const JetMap& f, const CoeffBound& bound, double kappa);

/// Rigorous upper bound of Lip(F - d_0F) on the polydisc of radius rho from
/// the coefficients: Frobenius norm of the entrywise derivative bounds.
double nonlinear_lipschitz_bound(const JetMap& f, double rho);

/// Largest rho in (0, rho_max] with nonlinear_lipschitz_bound(f, rho) <= kappa.
double radius_for_nonlinear_lipschitz(const JetMap& f, double kappa, double rho_max);

struct LipschitzRange {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
};

/// Min/max of |F(u)-F(v)|/|u-v| over seeded pseudo-random pairs in the
/// polydisc of the given radius. Half the pairs are independent, half are
/// close pairs probing the local derivative.
LipschitzRange sampled_lipschitz(const JetMap& f, double radius, int n_samples,
                                 std::uint64_t seed);

}  // namespace hdist

#endif  // HDIST_JETS_HPP
