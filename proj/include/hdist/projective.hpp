// Holomorphic endomorphisms of P^k given by homogeneous lifts, charts and the
// Fubini-Study distance.

#ifndef HDIST_PROJECTIVE_HPP
#define HDIST_PROJECTIVE_HPP

#include <cstdint>
#include <vector>

#include "hdist/jets.hpp"

namespace hdist {

/// Point of P^k stored as a unit vector of C^{k+1}; the last coordinate is the
/// homogenizing one, so the standard affine chart is t = 1.
using ProjPoint = CVector;

/// Unit representative, phase fixed so that the last nonzero entry is real
/// and positive.
ProjPoint normalize_point(const CVector& x);
ProjPoint from_affine(const CVector& z);
/// Affine coordinates in the standard chart; throws DynamicsError at t = 0.
CVector to_affine(const ProjPoint& x);

/// Fubini-Study distance in [0, pi/2], computed through the phase-aligned
/// chord so that it stays accurate for nearby points.
double fs_distance(const CVector& x, const CVector& y);

class ProjectiveEndomorphism {
 public:
  /// components[i] is a homogeneous polynomial of degree d in k+1 variables.
  ProjectiveEndomorphism(int k, int d, std::vector<Poly> components);

  int k() const { return k_; }
  int d() const { return d_; }
  const std::vector<Poly>& components() const { return comps_; }

  CVector lift(const CVector& x) const;
  CMatrix lift_jacobian(const CVector& x) const;
  ProjPoint operator()(const ProjPoint& x) const { return normalize_point(lift(x)); }

  /// min |F(X)| over seeded unit vectors X; positive for non-degenerate maps.
  double degeneracy_margin(int n_samples = 2000, std::uint64_t seed = 11) const;

  /// True for k = 1 maps [P(z,t) : c t^d] with P of exact degree d in z.
  bool is_polynomial() const;
  /// Coefficients c_0..c_d of the affine polynomial P(z,1)/c.
  std::vector<cplx> affine_polynomial() const;

 private:
  int k_;
  int d_;
  std::vector<Poly> comps_;
};

enum class AtlasKind { Unitary, Translation };

/// psi_x(zeta) = M_x (zeta, 1). Unitary charts use a Householder reflection
/// with M e_{k+1} = x; translation charts are zeta -> [z(x) + zeta : 1] in the
/// standard affine chart.
class Chart {
 public:
  explicit Chart(const ProjPoint& centre, AtlasKind kind = AtlasKind::Unitary);
  AtlasKind kind() const { return kind_; }
  const ProjPoint& centre() const { return centre_; }
  const CMatrix& matrix() const { return m_; }
  const CMatrix& inverse_matrix() const { return m_inv_; }
  ProjPoint to_point(const CVector& zeta) const;
  CVector to_chart(const CVector& x) const;
  /// Lift M (zeta, 1) as affine polynomials in zeta, one per coordinate.
  std::vector<Poly> lift_polys() const;
  /// D with dist <= |u - v| <= D dist for u, v in the chart ball of radius R.
  double distortion(double chart_radius) const;
  /// Chart radius whose ball contains the Fubini-Study ball of radius r.
  double radius_for(double fs_radius) const;

 private:
  AtlasKind kind_;
  ProjPoint centre_;
  CMatrix m_;
  CMatrix m_inv_;
};

/// Jet at 0 of psi_to^{-1} o f o psi_from truncated at `cap`.
JetMap chart_jet(const ProjectiveEndomorphism& f, const Chart& from, const Chart& to, int cap);

/// Exact evaluation of psi_to^{-1} o f o psi_from at zeta, and its derivative.
CVector chart_map(const ProjectiveEndomorphism& f, const Chart& from, const Chart& to,
                  const CVector& zeta);
CMatrix chart_map_jacobian(const ProjectiveEndomorphism& f, const Chart& from, const Chart& to,
                           const CVector& zeta);

struct CriticalTest {
  bool critical = false;
  double jacobian_modulus = 0.0;
};

/// |det| of the chart-expressed derivative at x (charts centred at x and f(x)).
CriticalTest critical_test(const ProjectiveEndomorphism& f, const ProjPoint& x,
                           double floor = 1e-10, AtlasKind atlas = AtlasKind::Unitary);

}  // namespace hdist

#endif  // HDIST_PROJECTIVE_HPP
