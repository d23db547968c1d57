#include "hdist/jets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "hdist/sampling.hpp"

namespace hdist {

MultiIndex::MultiIndex(std::vector<int> entries) : e_(std::move(entries)) {
  for (int x : e_) {
    if (x < 0) throw InvalidArgument("negative multi-index entry");
    order_ += x;
  }
}

MultiIndex MultiIndex::unit(int k, int i) {
  std::vector<int> e(k, 0);
  e[i] = 1;
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
  if (o.size() != size()) throw DimensionMismatch("multi-index length mismatch");
  std::vector<int> e(e_);
  for (int i = 0; i < size(); ++i) e[i] += o.e_[i];
  return MultiIndex(std::move(e));
}

bool operator<(const MultiIndex& a, const MultiIndex& b) {
  if (a.order_ != b.order_) return a.order_ < b.order_;
  // Larger leading exponent sorts first within one order.
  return a.e_ > b.e_;
}

namespace {

void fill_monomials(int k, int p, int pos, std::vector<int>& cur,
                    std::vector<MultiIndex>& out) {
  if (pos == k - 1) {
    cur[pos] = p;
    out.emplace_back(cur);
    return;
  }
  for (int x = p; x >= 0; --x) {
    cur[pos] = x;
    fill_monomials(k, p - x, pos + 1, cur, out);
  }
}

}  // namespace

std::vector<MultiIndex> monomials_of_order(int k, int p) {
  std::vector<MultiIndex> out;
  if (k <= 0 || p < 0) return out;
  std::vector<int> cur(k, 0);
  fill_monomials(k, p, 0, cur, out);
  std::sort(out.begin(), out.end());
  return out;
}

Poly poly_mul(const Poly& a, const Poly& b, int cap) {
  Poly out;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) {
      if (ma.order() + mb.order() > cap) continue;
      out[ma + mb] += ca * cb;
    }
  }
  return out;
}

void poly_axpy(Poly& acc, cplx s, const Poly& x) {
  for (const auto& [m, c] : x) acc[m] += s * c;
}

Poly poly_reciprocal(const Poly& p, int k, int cap) {
  const MultiIndex zero = MultiIndex::zero(k);
  auto it = p.find(zero);
  if (it == p.end() || std::abs(it->second) == 0.0) {
    throw InvalidArgument("reciprocal of a series vanishing at the origin");
  }
  const cplx c0 = it->second;
  // 1/(c0 (1 + u)) = (1/c0) sum (-u)^m with u = (p - c0)/c0.
  Poly u;
  for (const auto& [m, c] : p) {
    if (m.order() > 0) u[m] = c / c0;
  }
  Poly result{{zero, 1.0}};
  Poly term{{zero, 1.0}};
  for (int m = 1; m <= cap; ++m) {
    term = poly_mul(term, u, cap);
    poly_axpy(result, (m % 2 == 0) ? 1.0 : -1.0, term);
  }
  for (auto& [m, c] : result) c /= c0;
  return result;
}

JetMap::JetMap(int dim_in, int dim_out, int degree_cap)
    : dim_in_(dim_in), cap_(degree_cap), comps_(dim_out) {
  if (dim_in <= 0 || dim_out <= 0) throw InvalidArgument("jet dimensions must be positive");
  if (degree_cap <= 0) throw InvalidArgument("degree cap must be positive");
}

JetMap JetMap::identity(int k, int degree_cap) {
  JetMap j(k, k, degree_cap);
  for (int i = 0; i < k; ++i) j.set(i, MultiIndex::unit(k, i), 1.0);
  return j;
}

JetMap JetMap::linear(const CMatrix& a, int degree_cap) {
  JetMap j(static_cast<int>(a.cols()), static_cast<int>(a.rows()), degree_cap);
  for (int i = 0; i < a.rows(); ++i) {
    for (int m = 0; m < a.cols(); ++m) j.set(i, MultiIndex::unit(j.dim_in(), m), a(i, m));
  }
  return j;
}

JetMap JetMap::from_polys(int dim_in, const std::vector<Poly>& comps, int degree_cap) {
  JetMap j(dim_in, static_cast<int>(comps.size()), degree_cap);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    for (const auto& [m, c] : comps[i]) {
      if (m.order() >= 1 && m.order() <= degree_cap) j.set(static_cast<int>(i), m, c);
    }
  }
  return j;
}

cplx JetMap::coeff(int out, const MultiIndex& alpha) const {
  const auto& p = comps_.at(out);
  auto it = p.find(alpha);
  return it == p.end() ? cplx{} : it->second;
}

void JetMap::set(int out, const MultiIndex& alpha, cplx value) {
  if (out < 0 || out >= dim_out()) throw DimensionMismatch("output component out of range");
  if (alpha.size() != dim_in_) throw DimensionMismatch("multi-index length must equal dim_in");
  if (alpha.order() < 1 || alpha.order() > cap_) {
    throw InvalidArgument("multi-index order " + std::to_string(alpha.order()) +
                          " outside [1, " + std::to_string(cap_) + "]");
  }
  if (value == cplx{}) {
    comps_[out].erase(alpha);
  } else {
    comps_[out][alpha] = value;
  }
}

void JetMap::add(int out, const MultiIndex& alpha, cplx value) {
  set(out, alpha, coeff(out, alpha) + value);
}

std::size_t JetMap::term_count() const {
  std::size_t n = 0;
  for (const auto& p : comps_) n += p.size();
  return n;
}

CMatrix JetMap::linear_part() const {
  CMatrix a = CMatrix::Zero(dim_out(), dim_in_);
  for (int i = 0; i < dim_out(); ++i) {
    for (const auto& [m, c] : comps_[i]) {
      if (m.order() != 1) continue;
      for (int l = 0; l < dim_in_; ++l) {
        if (m[l] == 1) a(i, l) = c;
      }
    }
  }
  return a;
}

bool JetMap::is_linear() const {
  for (const auto& p : comps_) {
    for (const auto& [m, c] : p) {
      if (m.order() > 1) return false;
    }
  }
  return true;
}

double JetMap::coeff_norm() const {
  double n = 0.0;
  for (const auto& p : comps_) {
    for (const auto& [m, c] : p) n = std::max(n, std::abs(c));
  }
  return n;
}

double JetMap::coeff_norm(int order) const {
  double n = 0.0;
  for (const auto& p : comps_) {
    for (const auto& [m, c] : p) {
      if (m.order() == order) n = std::max(n, std::abs(c));
    }
  }
  return n;
}

JetMap JetMap::with_cap(int degree_cap) const {
  JetMap j(dim_in_, dim_out(), degree_cap);
  for (int i = 0; i < dim_out(); ++i) {
    for (const auto& [m, c] : comps_[i]) {
      if (m.order() <= degree_cap) j.set(i, m, c);
    }
  }
  return j;
}

bool operator==(const JetMap& a, const JetMap& b) {
  return a.dim_in_ == b.dim_in_ && a.cap_ == b.cap_ && a.comps_ == b.comps_;
}

namespace {

void check_same_shape(const JetMap& a, const JetMap& b) {
  if (a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out()) {
    throw DimensionMismatch("jet shapes differ");
  }
  if (a.degree_cap() != b.degree_cap()) throw InvalidArgument("degree caps differ");
}

}  // namespace

JetMap operator+(const JetMap& a, const JetMap& b) {
  check_same_shape(a, b);
  JetMap r = a;
  for (int i = 0; i < b.dim_out(); ++i) {
    for (const auto& [m, c] : b.comps_[i]) r.add(i, m, c);
  }
  return r;
}

JetMap operator-(const JetMap& a, const JetMap& b) { return a + (-1.0) * b; }

JetMap operator*(cplx s, const JetMap& a) {
  JetMap r(a.dim_in(), a.dim_out(), a.degree_cap());
  for (int i = 0; i < a.dim_out(); ++i) {
    for (const auto& [m, c] : a.comps_[i]) r.set(i, m, s * c);
  }
  return r;
}

JetMap compose(const JetMap& f, const JetMap& g) {
  if (f.dim_in() != g.dim_out()) throw DimensionMismatch("compose: F.dim_in != G.dim_out");
  if (f.degree_cap() != g.degree_cap()) throw InvalidArgument("compose: degree caps differ");
  const int cap = f.degree_cap();
  const int k = f.dim_in();

  // Products G^alpha, memoized by alpha; G^alpha = G^(alpha - e_m) * G_m.
  std::map<MultiIndex, Poly> cache;
  cache[MultiIndex::zero(k)] = Poly{{MultiIndex::zero(g.dim_in()), 1.0}};
  auto power = [&](auto&& self, const MultiIndex& alpha) -> const Poly& {
    auto it = cache.find(alpha);
    if (it != cache.end()) return it->second;
    int m = 0;
    while (alpha[m] == 0) ++m;
    std::vector<int> e = alpha.entries();
    --e[m];
    const Poly& lower = self(self, MultiIndex(std::move(e)));
    Poly prod = poly_mul(lower, g.component(m), cap);
    return cache.emplace(alpha, std::move(prod)).first->second;
  };

  std::vector<Poly> out(f.dim_out());
  for (int i = 0; i < f.dim_out(); ++i) {
    for (const auto& [alpha, c] : f.component(i)) poly_axpy(out[i], c, power(power, alpha));
  }
  return JetMap::from_polys(g.dim_in(), out, cap);
}

JetMap left_multiply(const CMatrix& a, const JetMap& f) {
  if (a.cols() != f.dim_out()) throw DimensionMismatch("left_multiply: shape mismatch");
  std::vector<Poly> out(a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    for (int l = 0; l < f.dim_out(); ++l) {
      if (a(i, l) != cplx{}) poly_axpy(out[i], a(i, l), f.component(l));
    }
  }
  return JetMap::from_polys(f.dim_in(), out, f.degree_cap());
}

JetMap homogeneous_part(const JetMap& f, int p) {
  if (p < 1 || p > f.degree_cap()) throw InvalidArgument("homogeneous_part: order out of range");
  JetMap r(f.dim_in(), f.dim_out(), f.degree_cap());
  for (int i = 0; i < f.dim_out(); ++i) {
    for (const auto& [m, c] : f.component(i)) {
      if (m.order() == p) r.set(i, m, c);
    }
  }
  return r;
}

JetMap nonlinear_part(const JetMap& f) {
  JetMap r(f.dim_in(), f.dim_out(), f.degree_cap());
  for (int i = 0; i < f.dim_out(); ++i) {
    for (const auto& [m, c] : f.component(i)) {
      if (m.order() >= 2) r.set(i, m, c);
    }
  }
  return r;
}

JetMap formal_inverse(const JetMap& f, double max_condition) {
  if (f.dim_in() != f.dim_out()) throw DimensionMismatch("formal_inverse: map is not square");
  const CMatrix a = f.linear_part();
  Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin == 0.0 || s(0) / smin > max_condition) {
    throw SingularLinearPart("formal_inverse: linear part singular or ill-conditioned");
  }
  const CMatrix a_inv = a.inverse();
  JetMap g = JetMap::linear(a_inv, f.degree_cap());
  // Degree by degree: G_p = -A^{-1} [F o G_{<p}]_p.
  for (int p = 2; p <= f.degree_cap(); ++p) {
    const JetMap correction = left_multiply(-a_inv, homogeneous_part(compose(f, g), p));
    g = g + correction;
  }
  return g;
}

namespace {

// powers[m][e] = v_m^e for e = 0..cap.
std::vector<std::vector<cplx>> coordinate_powers(const CVector& v, int cap) {
  std::vector<std::vector<cplx>> pw(v.size(), std::vector<cplx>(cap + 1, 1.0));
  for (int m = 0; m < v.size(); ++m) {
    for (int e = 1; e <= cap; ++e) pw[m][e] = pw[m][e - 1] * v(m);
  }
  return pw;
}

}  // namespace

CVector evaluate(const JetMap& f, const CVector& v) {
  if (v.size() != f.dim_in()) throw DimensionMismatch("evaluate: vector length != dim_in");
  const auto pw = coordinate_powers(v, f.degree_cap());
  CVector out = CVector::Zero(f.dim_out());
  for (int i = 0; i < f.dim_out(); ++i) {
    cplx acc{};
    for (const auto& [alpha, c] : f.component(i)) {
      cplx t = c;
      for (int m = 0; m < alpha.size(); ++m) {
        if (alpha[m] != 0) t *= pw[m][alpha[m]];
      }
      acc += t;
    }
    out(i) = acc;
  }
  return out;
}

CMatrix jacobian(const JetMap& f, const CVector& v) {
  if (v.size() != f.dim_in()) throw DimensionMismatch("jacobian: vector length != dim_in");
  const auto pw = coordinate_powers(v, f.degree_cap());
  CMatrix jac = CMatrix::Zero(f.dim_out(), f.dim_in());
  for (int i = 0; i < f.dim_out(); ++i) {
    for (const auto& [alpha, c] : f.component(i)) {
      for (int l = 0; l < alpha.size(); ++l) {
        if (alpha[l] == 0) continue;
        cplx t = c * static_cast<double>(alpha[l]);
        for (int m = 0; m < alpha.size(); ++m) {
          const int e = (m == l) ? alpha[m] - 1 : alpha[m];
          if (e != 0) t *= pw[m][e];
        }
        jac(i, l) += t;
      }
    }
  }
  return jac;
}

double max_coeff_difference(const JetMap& a, const JetMap& b) {
  return (a - b).coeff_norm();
}

double cauchy_constant(int k) { return 8.0 * std::pow(static_cast<double>(k), 1.5); }

CoeffBound cauchy_bound(const JetMap& f, double r) {
  if (!(r > 0.0)) throw InvalidArgument("cauchy_bound: radius must be positive");
  double s2 = 0.0;
  for (int i = 0; i < f.dim_out(); ++i) {
    double si = 0.0;
    for (const auto& [m, c] : f.component(i)) si += std::abs(c) * std::pow(r, m.order());
    s2 += si * si;
  }
  CoeffBound b;
  b.radius = r;
  b.sup_bound = std::sqrt(s2);
  b.second_derivative_bound = cauchy_constant(f.dim_in()) * b.sup_bound / (r * r);
  return b;
}

double lipschitz_radius(const JetMap& f, const CoeffBound& bound, double kappa) {
  if (!(kappa > 0.0)) throw InvalidArgument("lipschitz_radius: kappa must be positive");
  const double r = bound.radius;
  if (f.is_linear() || bound.sup_bound == 0.0) return 0.5 * r;
  const double c = cauchy_constant(f.dim_in());
  return std::min(kappa * r * r / (c * bound.sup_bound), 0.5 * r);
}

double nonlinear_lipschitz_bound(const JetMap& f, double rho) {
  double frob2 = 0.0;
  for (int i = 0; i < f.dim_out(); ++i) {
    std::vector<double> row(f.dim_in(), 0.0);
    for (const auto& [alpha, c] : f.component(i)) {
      if (alpha.order() < 2) continue;
      const double w = std::abs(c) * std::pow(rho, alpha.order() - 1);
      for (int m = 0; m < alpha.size(); ++m) row[m] += alpha[m] * w;
    }
    for (double x : row) frob2 += x * x;
  }
  return std::sqrt(frob2);
}

double radius_for_nonlinear_lipschitz(const JetMap& f, double kappa, double rho_max) {
  if (!(kappa > 0.0) || !(rho_max > 0.0)) {
    throw InvalidArgument("radius_for_nonlinear_lipschitz: arguments must be positive");
  }
  if (nonlinear_lipschitz_bound(f, rho_max) <= kappa) return rho_max;
  // Bisection in log space; the bound is increasing in rho.
  double lo = std::log(rho_max) - 80.0;
  double hi = std::log(rho_max);
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (nonlinear_lipschitz_bound(f, std::exp(mid)) <= kappa) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(lo);
}

LipschitzRange sampled_lipschitz(const JetMap& f, double radius, int n_samples,
                                 std::uint64_t seed) {
  if (!(radius > 0.0)) throw InvalidArgument("sampled_lipschitz: radius must be positive");
  if (n_samples < 2) throw InvalidArgument("sampled_lipschitz: need at least 2 samples");
  std::mt19937_64 rng(seed);
  const int k = f.dim_in();
  LipschitzRange out{std::numeric_limits<double>::infinity(), 0.0};
  for (int s = 0; s < n_samples; ++s) {
    CVector u = sample_polydisc(rng, k, radius);
    CVector v;
    if (s % 2 == 0) {
      v = sample_polydisc(rng, k, radius);
    } else {
      v = clamp_to_polydisc(u + sample_polydisc(rng, k, 1e-4 * radius), radius);
    }
    const double d = (u - v).norm();
    if (d == 0.0) {
      --s;
      continue;
    }
    const double ratio = (evaluate(f, u) - evaluate(f, v)).norm() / d;
    out.min_ratio = std::min(out.min_ratio, ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
  }
  return out;
}

}  // namespace hdist
