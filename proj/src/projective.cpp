#include "hdist/projective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hdist/sampling.hpp"

namespace hdist {

ProjPoint normalize_point(const CVector& x) {
  const double n = x.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DynamicsError("zero or non-finite homogeneous vector");
  CVector y = x / n;
  for (int i = static_cast<int>(y.size()) - 1; i >= 0; --i) {
    const double a = std::abs(y(i));
    if (a > 1e-300) {
      y *= std::conj(y(i)) / a;
      y(i) = a;
      break;
    }
  }
  return y;
}

ProjPoint from_affine(const CVector& z) {
  CVector x(z.size() + 1);
  x.head(z.size()) = z;
  x(z.size()) = 1.0;
  return normalize_point(x);
}

CVector to_affine(const ProjPoint& x) {
  const int k = static_cast<int>(x.size()) - 1;
  if (std::abs(x(k)) < 1e-300) throw DynamicsError("point at infinity has no affine coordinates");
  return x.head(k) / x(k);
}

double fs_distance(const CVector& x, const CVector& y) {
  const CVector a = x / x.norm();
  CVector b = y / y.norm();
  const cplx ip = a.dot(b);  // conj(a) . b
  if (std::abs(ip) > 0.0) b *= std::conj(ip) / std::abs(ip);
  const double chord = (a - b).norm();
  return 2.0 * std::asin(std::min(1.0, chord / 2.0));
}

ProjectiveEndomorphism::ProjectiveEndomorphism(int k, int d, std::vector<Poly> components)
    : k_(k), d_(d), comps_(std::move(components)) {
  if (k < 1) throw InvalidArgument("dimension must be positive");
  if (d < 2) throw InvalidArgument("algebraic degree must be at least 2");
  if (static_cast<int>(comps_.size()) != k + 1)
    throw DimensionMismatch("need k + 1 homogeneous components");
  for (const auto& c : comps_) {
    for (const auto& [alpha, v] : c) {
      if (alpha.size() != k + 1) throw DimensionMismatch("monomial length must be k + 1");
      if (alpha.order() != d) throw InvalidArgument("component is not homogeneous of degree d");
    }
  }
  if (degeneracy_margin() < 1e-8) throw InvalidArgument("components have a common nontrivial zero");
}

namespace {

cplx eval_poly(const Poly& p, const CVector& x) {
  cplx s{};
  for (const auto& [alpha, c] : p) {
    cplx t = c;
    for (int i = 0; i < alpha.size(); ++i)
      for (int e = 0; e < alpha[i]; ++e) t *= x(i);
    s += t;
  }
  return s;
}

cplx eval_partial(const Poly& p, const CVector& x, int var) {
  cplx s{};
  for (const auto& [alpha, c] : p) {
    if (alpha[var] == 0) continue;
    cplx t = c * static_cast<double>(alpha[var]);
    for (int i = 0; i < alpha.size(); ++i) {
      const int e = i == var ? alpha[i] - 1 : alpha[i];
      for (int r = 0; r < e; ++r) t *= x(i);
    }
    s += t;
  }
  return s;
}

}  // namespace

CVector ProjectiveEndomorphism::lift(const CVector& x) const {
  CVector out(k_ + 1);
  for (int i = 0; i <= k_; ++i) out(i) = eval_poly(comps_[i], x);
  return out;
}

CMatrix ProjectiveEndomorphism::lift_jacobian(const CVector& x) const {
  CMatrix out(k_ + 1, k_ + 1);
  for (int i = 0; i <= k_; ++i)
    for (int j = 0; j <= k_; ++j) out(i, j) = eval_partial(comps_[i], x, j);
  return out;
}

double ProjectiveEndomorphism::degeneracy_margin(int n_samples, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  double m = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_samples; ++s) {
    CVector x(k_ + 1);
    for (int i = 0; i <= k_; ++i) x(i) = {g(rng), g(rng)};
    x.normalize();
    m = std::min(m, lift(x).norm());
  }
  return m;
}

bool ProjectiveEndomorphism::is_polynomial() const {
  if (k_ != 1) return false;
  const Poly& q = comps_[1];
  if (q.size() != 1 || q.begin()->first[1] != d_) return false;
  return std::abs(comps_[0].count(MultiIndex({d_, 0})) ? comps_[0].at(MultiIndex({d_, 0})) : cplx{}) > 0.0;
}

std::vector<cplx> ProjectiveEndomorphism::affine_polynomial() const {
  if (!is_polynomial()) throw InvalidArgument("map is not a one-variable polynomial");
  const cplx c = comps_[1].begin()->second;
  std::vector<cplx> out(d_ + 1, cplx{});
  for (const auto& [alpha, v] : comps_[0]) out[alpha[0]] += v / c;
  return out;
}

namespace {

// Householder reflection H with H e_last = x (x unit, last entry real >= 0).
CMatrix householder_to(const ProjPoint& x) {
  const int n = static_cast<int>(x.size());
  CVector w = x;
  w(n - 1) -= 1.0;
  const double ww = w.squaredNorm();
  if (ww < 1e-30) return CMatrix::Identity(n, n);
  return CMatrix::Identity(n, n) - (2.0 / ww) * w * w.adjoint();
}

}  // namespace

Chart::Chart(const ProjPoint& centre, AtlasKind kind) : kind_(kind), centre_(normalize_point(centre)) {
  const int n = static_cast<int>(centre_.size());
  if (kind_ == AtlasKind::Unitary) {
    m_ = householder_to(centre_);
    m_inv_ = m_.adjoint();
  } else {
    const CVector z = to_affine(centre_);
    m_ = CMatrix::Identity(n, n);
    m_.col(n - 1).head(n - 1) = z;
    m_inv_ = CMatrix::Identity(n, n);
    m_inv_.col(n - 1).head(n - 1) = -z;
  }
}

ProjPoint Chart::to_point(const CVector& zeta) const {
  const int k = static_cast<int>(zeta.size());
  CVector y(k + 1);
  y.head(k) = zeta;
  y(k) = 1.0;
  return normalize_point(m_ * y);
}

CVector Chart::to_chart(const CVector& x) const {
  const CVector z = m_inv_ * x;
  const int k = static_cast<int>(z.size()) - 1;
  if (std::abs(z(k)) < 1e-300) throw DynamicsError("point lies on the chart's hyperplane at infinity");
  return z.head(k) / z(k);
}

std::vector<Poly> Chart::lift_polys() const {
  const int n = static_cast<int>(m_.rows());
  const int k = n - 1;
  std::vector<Poly> out(n);
  for (int i = 0; i < n; ++i) {
    if (m_(i, k) != cplx{}) out[i][MultiIndex::zero(k)] = m_(i, k);
    for (int j = 0; j < k; ++j) {
      if (m_(i, j) != cplx{}) out[i][MultiIndex::unit(k, j)] = m_(i, j);
    }
  }
  return out;
}

double Chart::distortion(double chart_radius) const {
  if (kind_ == AtlasKind::Unitary) return 1.0 + chart_radius * chart_radius;
  const double c = to_affine(centre_).norm() + chart_radius;
  return 1.0 + c * c;
}

double Chart::radius_for(double fs_radius) const {
  if (kind_ == AtlasKind::Unitary) return std::tan(fs_radius);
  double r = fs_radius;
  for (int it = 0; it < 60; ++it) r = fs_radius * distortion(r);
  return r;
}

CVector chart_map(const ProjectiveEndomorphism& f, const Chart& from, const Chart& to,
                  const CVector& zeta) {
  const int k = f.k();
  CVector y(k + 1);
  y.head(k) = zeta;
  y(k) = 1.0;
  const CVector z = to.inverse_matrix() * f.lift(from.matrix() * y);
  if (std::abs(z(k)) < 1e-300) throw DynamicsError("image leaves the target chart");
  return z.head(k) / z(k);
}

CMatrix chart_map_jacobian(const ProjectiveEndomorphism& f, const Chart& from, const Chart& to,
                           const CVector& zeta) {
  const int k = f.k();
  CVector y(k + 1);
  y.head(k) = zeta;
  y(k) = 1.0;
  const CVector x = from.matrix() * y;
  const CMatrix& tinv = to.inverse_matrix();
  const CVector z = tinv * f.lift(x);
  const CMatrix dz = tinv * f.lift_jacobian(x) * from.matrix().leftCols(k);
  CMatrix out(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) out(i, j) = (dz(i, j) * z(k) - z(i) * dz(k, j)) / (z(k) * z(k));
  return out;
}

JetMap chart_jet(const ProjectiveEndomorphism& f, const Chart& from, const Chart& to, int cap) {
  const int k = f.k();
  const auto y = from.lift_polys();
  // Powers y_m^e, reused across monomials.
  std::vector<std::vector<Poly>> pw(k + 1);
  for (int m = 0; m <= k; ++m) {
    pw[m].push_back(Poly{{MultiIndex::zero(k), cplx{1.0, 0.0}}});
    for (int e = 1; e <= f.d(); ++e) pw[m].push_back(poly_mul(pw[m].back(), y[m], cap));
  }
  std::vector<Poly> fy(k + 1);
  for (int i = 0; i <= k; ++i) {
    for (const auto& [alpha, c] : f.components()[i]) {
      Poly t{{MultiIndex::zero(k), c}};
      for (int m = 0; m <= k; ++m) {
        if (alpha[m] > 0) t = poly_mul(t, pw[m][alpha[m]], cap);
      }
      poly_axpy(fy[i], 1.0, t);
    }
  }
  const CMatrix& tinv = to.inverse_matrix();
  std::vector<Poly> z(k + 1);
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j <= k; ++j) poly_axpy(z[i], tinv(i, j), fy[j]);
  const Poly rec = poly_reciprocal(z[k], k, cap);
  std::vector<Poly> comps(k);
  for (int i = 0; i < k; ++i) comps[i] = poly_mul(z[i], rec, cap);
  return JetMap::from_polys(k, comps, cap);
}

CriticalTest critical_test(const ProjectiveEndomorphism& f, const ProjPoint& x, double floor,
                           AtlasKind atlas) {
  const Chart from(x, atlas);
  const Chart to(f(x), atlas);
  const CMatrix j = chart_map_jacobian(f, from, to, CVector::Zero(f.k()));
  CriticalTest out;
  out.jacobian_modulus = std::abs(j.determinant());
  out.critical = out.jacobian_modulus < floor;
  return out;
}

}  // namespace hdist
