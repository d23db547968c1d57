#include "hdist/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include <Eigen/SVD>

#include "hdist/chain.hpp"
#include "hdist/repelling.hpp"

namespace hdist {

namespace {

constexpr double kSameRoot = 1e-7;

int ipow(int b, int e) {
  int r = 1;
  while (e-- > 0) r *= b;
  return r;
}

CVector gaussian_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = {g(rng), g(rng)};
  return v;
}

bool point_less(const ProjPoint& a, const ProjPoint& b) {
  auto key = [](double x) { return std::round(x * 1e9); };
  for (int i = 0; i < a.size(); ++i) {
    const double ar = key(a(i).real()), br = key(b(i).real());
    if (ar != br) return ar < br;
    const double ai = key(a(i).imag()), bi = key(b(i).imag());
    if (ai != bi) return ai < bi;
  }
  return false;
}

void insert_unique(std::vector<ProjPoint>& found, const ProjPoint& p) {
  for (const auto& q : found)
    if (fs_distance(p, q) < kSameRoot) return;
  found.push_back(p);
}

// Frobenius norm of the second derivative of the degree-2 part of a jet.
double hessian_norm(const JetMap& j) {
  double s = 0.0;
  for (int c = 0; c < j.dim_out(); ++c) {
    for (const auto& [alpha, v] : j.component(c)) {
      if (alpha.order() != 2) continue;
      bool square = false;
      for (int i = 0; i < alpha.size(); ++i) square = square || alpha[i] == 2;
      s += square ? 4.0 * std::norm(v) : 2.0 * std::norm(v);
    }
  }
  return std::sqrt(s);
}

double smallest_singular_value(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

}  // namespace

ProjPoint refine_preimage(const ProjectiveEndomorphism& f, const ProjPoint& x, ProjPoint y,
                          int iterations) {
  const int k = f.k();
  for (int it = 0; it < iterations; ++it) {
    const Chart from(y);
    const Chart to(x);
    const CVector zero = CVector::Zero(k);
    const CVector r = chart_map(f, from, to, zero);
    if (r.norm() < 1e-16) break;
    const CMatrix j = chart_map_jacobian(f, from, to, zero);
    Eigen::FullPivLU<CMatrix> lu(j);
    if (!lu.isInvertible()) break;
    const CVector step = lu.solve(r);
    y = from.to_point(-step);
    if (step.norm() < 1e-16) break;
  }
  return y;
}

std::vector<ProjPoint> preimages(const ProjectiveEndomorphism& f, const ProjPoint& x,
                                 std::mt19937_64& rng, const OrbitOptions& opts) {
  const int k = f.k();
  const int expected = ipow(f.d(), k);
  std::vector<ProjPoint> found;

  if (f.is_polynomial()) {
    const ProjPoint xn = normalize_point(x);
    if (std::abs(xn(1)) < 1e-14) return {xn};  // infinity is totally invariant
    std::vector<cplx> c = f.affine_polynomial();
    c[0] -= xn(0) / xn(1);
    for (const cplx z : companion_roots(c)) {
      CVector a(1);
      a(0) = z;
      insert_unique(found, refine_preimage(f, xn, from_affine(a), 4));
    }
  } else {
    const Chart target(x);
    for (int batch = 0; batch < 6 && static_cast<int>(found.size()) < expected; ++batch) {
      const Chart start_chart(normalize_point(gaussian_vector(rng, k + 1)));
      const int starts = opts.starts_per_preimage * expected;
      for (int s = 0; s < starts; ++s) {
        CVector y = gaussian_vector(rng, k);
        bool ok = false;
        try {
          for (int it = 0; it < opts.newton_iterations; ++it) {
            const CVector r = chart_map(f, start_chart, target, y);
            if (r.norm() < 1e-12) {
              ok = true;
              break;
            }
            Eigen::FullPivLU<CMatrix> lu(chart_map_jacobian(f, start_chart, target, y));
            if (!lu.isInvertible()) break;
            CVector step = lu.solve(r);
            const double cap = 1.0 + y.norm();
            if (step.norm() > cap) step *= cap / step.norm();
            y -= step;
            if (!std::isfinite(y.norm()) || y.norm() > 1e8) break;
          }
        } catch (const DynamicsError&) {
          ok = false;
        }
        if (!ok) continue;
        insert_unique(found, refine_preimage(f, x, start_chart.to_point(y), opts.newton_iterations));
      }
    }
  }
  for (auto& p : found) p = normalize_point(p);
  std::sort(found.begin(), found.end(), point_less);
  return found;
}

const ProjPoint& BackwardOrbit::point(int m) const {
  if (m <= 0) {
    if (-m > depth()) throw InvalidArgument("orbit index beyond the computed depth");
    return past[-m];
  }
  if (m > future_length()) throw InvalidArgument("orbit index beyond the computed future");
  return future[m - 1];
}

BackwardOrbit backward_orbit(const ProjectiveEndomorphism& f, const ProjPoint& x0, int depth,
                             std::uint64_t seed, const OrbitOptions& opts, int future) {
  if (depth < 0 || future < 0) throw InvalidArgument("depth and future must be nonnegative");
  BackwardOrbit o;
  o.seed = seed;
  o.past.push_back(normalize_point(x0));
  if (critical_test(f, o.past[0], opts.critical_floor, opts.atlas).critical)
    throw DynamicsError("seed point is critical");
  ProjPoint cur = o.past[0];
  for (int m = 1; m <= future; ++m) {
    cur = f(cur);
    if (critical_test(f, cur, opts.critical_floor, opts.atlas).critical)
      throw DynamicsError("forward orbit meets the critical set");
    o.future.push_back(cur);
  }

  std::mt19937_64 rng(seed);
  double hess = 0.0;
  double inv_norm = 0.0;
  for (int n = 0; n < depth; ++n) {
    const ProjPoint& x = o.past.back();
    std::vector<ProjPoint> regular;
    for (const auto& y : preimages(f, x, rng, opts)) {
      if (!critical_test(f, y, opts.critical_floor, opts.atlas).critical) regular.push_back(y);
    }
    if (regular.empty()) throw DynamicsError("every preimage is critical");
    std::size_t pick = 0;
    if (opts.rule == BranchRule::Seeded) {
      pick = std::uniform_int_distribution<std::size_t>(0, regular.size() - 1)(rng);
    } else {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < regular.size(); ++i) {
        const double dist = fs_distance(regular[i], x);
        if (dist < best) {
          best = dist;
          pick = i;
        }
      }
    }
    const ProjPoint y = regular[pick];
    o.residuals.push_back(fs_distance(f(y), x));
    const Chart from(y, opts.atlas);
    const Chart to(x, opts.atlas);
    const CMatrix j = chart_map_jacobian(f, from, to, CVector::Zero(f.k()));
    const double smin = smallest_singular_value(j);
    o.t.push_back(smin * smin);
    hess = std::max(hess, hessian_norm(chart_jet(f, from, to, 2)));
    inv_norm = std::max(inv_norm, 1.0 / smin);
    o.past.push_back(y);
  }
  o.c = hess > 0.0 ? 1.0 / (4.0 * hess * inv_norm) : 1.0;
  for (double t : o.t) o.rho.push_back(std::min(o.c * t, 1.0));
  return o;
}

std::vector<ProjPoint> sample_equilibrium(const ProjectiveEndomorphism& f,
                                          const ProjPoint& seed_point, int depth, int count,
                                          std::uint64_t seed, const OrbitOptions& opts) {
  std::mt19937_64 rng(seed);
  std::vector<ProjPoint> out;
  out.reserve(count);
  for (int s = 0; s < count; ++s) {
    ProjPoint x = normalize_point(seed_point);
    for (int n = 0; n < depth; ++n) {
      const auto pre = preimages(f, x, rng, opts);
      if (pre.empty()) throw DynamicsError("no preimage found");
      x = pre[std::uniform_int_distribution<std::size_t>(0, pre.size() - 1)(rng)];
    }
    out.push_back(x);
  }
  return out;
}

std::vector<double> estimate_exponents(const ProjectiveEndomorphism& f,
                                       const std::vector<ProjPoint>& samples, int steps) {
  const int k = f.k();
  if (samples.empty() || steps < 1) throw InvalidArgument("need samples and at least one step");
  std::vector<double> sums(k, 0.0);
  for (const auto& x0 : samples) {
    CMatrix q = CMatrix::Identity(k, k);
    ProjPoint x = x0;
    for (int s = 0; s < steps; ++s) {
      const ProjPoint fx = f(x);
      const CMatrix j = chart_map_jacobian(f, Chart(x), Chart(fx), CVector::Zero(k));
      Eigen::HouseholderQR<CMatrix> qr(j * q);
      const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
      for (int i = 0; i < k; ++i) sums[i] += std::log(std::max(std::abs(r(i, i)), 1e-300));
      q = qr.householderQ() * CMatrix::Identity(k, k);
      x = fx;
    }
  }
  for (double& s : sums) s /= static_cast<double>(samples.size()) * steps;
  std::sort(sums.begin(), sums.end(), std::greater<>());
  return sums;
}

double birkhoff_log_jacobian(const ProjectiveEndomorphism& f, const std::vector<ProjPoint>& samples) {
  if (samples.empty()) throw InvalidArgument("need samples");
  double s = 0.0;
  for (const auto& x : samples) {
    const CMatrix j = chart_map_jacobian(f, Chart(x), Chart(f(x)), CVector::Zero(f.k()));
    s += std::log(std::max(std::abs(j.determinant()), 1e-300));
  }
  return s / static_cast<double>(samples.size());
}

CocycleData build_cocycle(const ProjectiveEndomorphism& f, const BackwardOrbit& orbit, int n_min,
                          int n_max, int degree_cap, AtlasKind atlas) {
  if (n_max < n_min) throw InvalidArgument("empty cocycle window");
  if (n_max + 1 > orbit.depth() || -n_min > orbit.future_length())
    throw InvalidArgument("orbit too short for the cocycle window");
  CocycleData c;
  c.n_min = n_min;
  for (int n = n_min; n <= n_max + 1; ++n) c.charts.emplace_back(orbit.point(-n), atlas);
  const int k = f.k();
  for (int n = n_min; n <= n_max; ++n) {
    const Chart& from = c.chart(n + 1);
    const Chart& to = c.chart(n);
    JetMap fw = chart_jet(f, from, to, degree_cap);
    JetMap inv = formal_inverse(fw);
    const CMatrix direct = chart_map_jacobian(f, from, to, CVector::Zero(k)).inverse();
    c.linear_check = std::max(c.linear_check, (inv.linear_part() - direct).cwiseAbs().maxCoeff());
    c.linear.push_back(inv.linear_part());
    c.forward.push_back(std::move(fw));
    c.inverse.push_back(std::move(inv));
  }
  return c;
}

std::vector<double> cocycle_exponents(const std::vector<CMatrix>& a) {
  if (a.empty()) throw InvalidArgument("empty cocycle");
  const int k = static_cast<int>(a.front().rows());
  std::vector<double> sums(k, 0.0);
  CMatrix q = CMatrix::Identity(k, k);
  for (const auto& m : a) {
    Eigen::HouseholderQR<CMatrix> qr(m * q);
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < k; ++i) sums[i] -= std::log(std::max(std::abs(r(i, i)), 1e-300));
    q = qr.householderQ() * CMatrix::Identity(k, k);
  }
  for (double& s : sums) s /= static_cast<double>(a.size());
  std::sort(sums.begin(), sums.end(), std::greater<>());
  return sums;
}

LyapunovSpectrum group_exponents(const std::vector<double>& exps, double tol) {
  std::vector<double> e(exps);
  std::sort(e.begin(), e.end(), std::greater<>());
  std::vector<double> vals;
  std::vector<int> mult;
  double sum = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (i > 0 && e[i - 1] - e[i] > tol) {
      vals.push_back(sum / mult.back());
      sum = 0.0;
      mult.push_back(0);
    }
    if (mult.empty()) mult.push_back(0);
    sum += e[i];
    ++mult.back();
  }
  vals.push_back(sum / mult.back());
  return LyapunovSpectrum(vals, mult);
}

namespace {

// Largest off-block entry and the block part of m.
std::pair<double, CMatrix> split_blocks(const CMatrix& m, const LyapunovSpectrum& spec) {
  CMatrix out = CMatrix::Zero(m.rows(), m.cols());
  double leak = 0.0;
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (spec.block_of(i) == spec.block_of(j)) {
        out(i, j) = m(i, j);
      } else {
        leak = std::max(leak, std::abs(m(i, j)));
      }
    }
  }
  return {leak, out};
}

double block_band_margin(const CMatrix& m, const LyapunovSpectrum& spec, double epsilon) {
  double slack = std::numeric_limits<double>::infinity();
  for (int j = 0; j < spec.l(); ++j) {
    const int o = spec.offset(j);
    const int s = spec.multiplicity(j);
    Eigen::JacobiSVD<CMatrix> svd(m.block(o, o, s, s));
    for (int i = 0; i < s; ++i) {
      const double ls = std::log(std::max(svd.singularValues()(i), 1e-300));
      const double lam = spec.exponent(j);
      slack = std::min({slack, ls + lam + epsilon, -lam + epsilon - ls});
    }
  }
  return slack;
}

// Orthonormal basis of the m-dimensional part of span(u) n span(v), taken as
// the leading principal vectors.
CMatrix intersect(const CMatrix& u, const CMatrix& v, int m) {
  Eigen::JacobiSVD<CMatrix> svd(u.adjoint() * v, Eigen::ComputeFullU);
  return u * svd.matrixU().leftCols(m);
}

// Splitting basis at position i of the window (i in [0, N]).
CMatrix splitting_basis(const std::vector<CMatrix>& a, int i, const LyapunovSpectrum& spec,
                        int lookahead) {
  const int k = spec.k();
  const int total = static_cast<int>(a.size());
  const int fl = std::min(lookahead, total - i);
  const int pl = std::min(lookahead, i);
  CMatrix fwd = CMatrix::Identity(k, k);
  for (int s = i; s < i + fl; ++s) fwd = a[s] * fwd;
  CMatrix bwd = CMatrix::Identity(k, k);
  for (int s = i - pl; s < i; ++s) bwd = a[s] * bwd;
  Eigen::JacobiSVD<CMatrix> sf(fwd, Eigen::ComputeFullV);
  Eigen::JacobiSVD<CMatrix> sb(bwd, Eigen::ComputeFullU);
  // Singular values are decreasing; block 0 (fastest contraction) sits last.
  CMatrix basis(k, k);
  for (int j = 0; j < spec.l(); ++j) {
    const int m = spec.multiplicity(j);
    const int below = spec.offset(j + 1);  // multiplicities of blocks 0..j
    const int above = k - spec.offset(j);  // multiplicities of blocks j..l-1
    CMatrix e;
    if (fl > 0 && pl > 0) {
      e = intersect(sf.matrixV().rightCols(below), sb.matrixU().leftCols(above), m);
    } else if (fl > 0) {
      e = sf.matrixV().middleCols(k - below, m);
    } else if (pl > 0) {
      e = sb.matrixU().middleCols(above - m, m);
    } else {
      e = CMatrix::Identity(k, k).middleCols(spec.offset(j), m);
    }
    basis.middleCols(spec.offset(j), m) = e;
  }
  return basis;
}

}  // namespace

OseledecData oseledec_reduce(const std::vector<CMatrix>& a, int n_min, const LyapunovSpectrum& spec,
                             double epsilon, int lookahead, double max_leakage) {
  if (a.empty()) throw InvalidArgument("empty cocycle");
  const int k = spec.k();
  const int total = static_cast<int>(a.size());
  OseledecData out;
  out.n_min = n_min;

  bool diagonal = true;
  for (const auto& m : a) {
    const auto [leak, blk] = split_blocks(m, spec);
    diagonal = diagonal && leak <= max_leakage && block_band_margin(blk, spec, epsilon) >= -1e-12;
  }
  std::vector<CMatrix> basis;
  if (diagonal) {
    out.mode = OseledecMode::ExactDiagonal;
    basis.assign(total + 1, CMatrix::Identity(k, k));
    out.c = basis;
  } else {
    out.mode = OseledecMode::FiniteTime;
    double s = 0.0;
    for (int i = 0; i <= total; ++i) {
      basis.push_back(splitting_basis(a, i, spec, lookahead));
      Eigen::JacobiSVD<CMatrix> svd(basis.back());
      if (svd.singularValues()(k - 1) < 1e-12) throw DynamicsError("splitting is degenerate");
      s = std::max(s, svd.singularValues()(0));
    }
    for (const auto& b : basis) out.c.push_back(s * b.inverse());
  }

  out.band_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < total; ++i) {
    const CMatrix m = out.c[i + 1] * a[i] * out.c[i].inverse();
    auto [leak, blk] = split_blocks(m, spec);
    out.leakage = std::max(out.leakage, leak);
    out.band_margin = std::min(out.band_margin, block_band_margin(blk, spec, epsilon));
    out.reduced.push_back(std::move(blk));
  }
  std::vector<double> inv;
  for (const auto& c : out.c) inv.push_back(1.0 / Eigen::JacobiSVD<CMatrix>(c).singularValues()(0));
  for (double v : slow_minorant(inv, epsilon)) out.h.push_back(1.0 / v);
  out.blocks_ok = out.leakage <= max_leakage && out.band_margin >= -1e-12;
  return out;
}

}  // namespace hdist
