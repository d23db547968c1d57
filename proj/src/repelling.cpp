#include "hdist/repelling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "hdist/orbit.hpp"

namespace hdist {

namespace {

// Iterates beyond this modulus are treated as escaping.
constexpr double kEscape = 1e30;

std::vector<cplx> poly_compose(const std::vector<cplx>& p, const std::vector<cplx>& q) {
  std::vector<cplx> r{p.back()};
  for (int j = static_cast<int>(p.size()) - 2; j >= 0; --j) {
    std::vector<cplx> t(r.size() + q.size() - 1, cplx{});
    for (std::size_t a = 0; a < r.size(); ++a)
      for (std::size_t b = 0; b < q.size(); ++b) t[a + b] += r[a] * q[b];
    t[0] += p[j];
    r = std::move(t);
  }
  return r;
}

double min_separation(const std::vector<cplx>& z) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i + 1; j < z.size(); ++j) m = std::min(m, std::abs(z[i] - z[j]));
  return m;
}

void polish(const IteratedPolynomial& p, std::vector<cplx>& roots, int iterations) {
  for (auto& z : roots) {
    for (int it = 0; it < iterations; ++it) {
      const cplx w = p.newton_ratio(z);
      if (!std::isfinite(std::abs(w))) break;
      z -= w;
      if (std::abs(w) <= 1e-16 * (1.0 + std::abs(z))) break;
    }
  }
}

void aberth(const IteratedPolynomial& p, std::vector<cplx>& z, int max_sweeps = 1000) {
  const std::size_t m = z.size();
  std::vector<char> done(m, 0);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool all = true;
    for (std::size_t i = 0; i < m; ++i) {
      if (done[i]) continue;
      const cplx ratio = p.newton_ratio(z[i]);
      cplx s{};
      for (std::size_t j = 0; j < m; ++j)
        if (j != i) s += 1.0 / (z[i] - z[j]);
      const cplx w = ratio / (1.0 - ratio * s);
      if (!std::isfinite(std::abs(w))) continue;
      z[i] -= w;
      if (std::abs(w) <= 1e-15 * (1.0 + std::abs(z[i]))) {
        done[i] = 1;
      } else {
        all = false;
      }
    }
    if (all) break;
  }
}

}  // namespace

cplx repelling_fixed_point(const std::vector<cplx>& coeffs) {
  std::vector<cplx> q = coeffs;
  q[1] -= 1.0;
  const IteratedPolynomial p{coeffs, 1};
  cplx best{};
  double best_mod = -1.0;
  for (const cplx z : companion_roots(q)) {
    const double m = std::abs(p.step_derivative(z));
    if (m > best_mod) {
      best_mod = m;
      best = z;
    }
  }
  if (!(best_mod > 1.0)) throw DynamicsError("no repelling fixed point");
  return best;
}

std::vector<cplx> backward_tree(const std::vector<cplx>& coeffs, cplx root, int n) {
  std::vector<cplx> level{root};
  for (int i = 0; i < n; ++i) {
    std::vector<cplx> next;
    next.reserve(level.size() * (coeffs.size() - 1));
    for (const cplx w : level) {
      std::vector<cplx> c = coeffs;
      c[0] -= w;
      for (const cplx z : companion_roots(c)) next.push_back(z);
    }
    level = std::move(next);
  }
  return level;
}

std::vector<cplx> companion_roots(const std::vector<cplx>& c) {
  const int d = static_cast<int>(c.size()) - 1;
  if (d < 1 || c[d] == cplx{}) throw InvalidArgument("need a polynomial of positive degree");
  CMatrix comp = CMatrix::Zero(d, d);
  for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) comp(i, d - 1) = -c[i] / c[d];
  Eigen::ComplexEigenSolver<CMatrix> es(comp, false);
  return {es.eigenvalues().data(), es.eigenvalues().data() + d};
}

cplx IteratedPolynomial::step_derivative(cplx z) const {
  cplx dp{};
  for (int j = degree(); j >= 1; --j) dp = dp * z + static_cast<double>(j) * coeffs[j];
  return dp;
}

cplx IteratedPolynomial::value(cplx z) const { return value_and_derivative(z).first; }

std::pair<cplx, cplx> IteratedPolynomial::value_and_derivative(cplx z) const {
  cplx w = z;
  cplx dw = 1.0;
  for (int i = 0; i < n; ++i) {
    dw *= step_derivative(w);
    cplx v = coeffs.back();
    for (int j = degree() - 1; j >= 0; --j) v = v * w + coeffs[j];
    w = v;
  }
  return {w, dw};
}

cplx IteratedPolynomial::newton_ratio(cplx z) const {
  cplx w = z;
  cplx dw = 1.0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(w) > kEscape) {
      // P^m(w) / (P^m)'(w) ~ w / d^m for large w.
      return w / (std::pow(static_cast<double>(degree()), n - i) * dw);
    }
    dw *= step_derivative(w);
    cplx v = coeffs.back();
    for (int j = degree() - 1; j >= 0; --j) v = v * w + coeffs[j];
    w = v;
  }
  return (w - z) / (dw - 1.0);
}

RootSolve periodic_points(const std::vector<cplx>& coeffs, int n, int companion_limit) {
  if (n < 1) throw InvalidArgument("period must be positive");
  if (coeffs.size() < 3) throw InvalidArgument("need degree at least 2");
  const IteratedPolynomial p{coeffs, n};
  const int d = p.degree();
  double total = 1.0;
  for (int i = 0; i < n; ++i) total *= d;
  if (total > 1e7) throw InvalidArgument("too many periodic points");
  const int count = static_cast<int>(total);

  auto finish = [&](RootSolve& rs) {
    rs.max_residual = 0.0;
    for (const cplx z : rs.roots) {
      const auto [v, dv] = p.value_and_derivative(z);
      const double r = std::abs(v - z) / std::max(1.0, std::abs(dv));
      rs.max_residual = std::isfinite(r) ? std::max(rs.max_residual, r) : std::numeric_limits<double>::infinity();
    }
    rs.min_separation = rs.roots.size() > 1 ? min_separation(rs.roots) : 1.0;
    rs.reliable = static_cast<int>(rs.roots.size()) == count && rs.max_residual <= 1e-8 &&
                  rs.min_separation > 1e-10 && std::isfinite(rs.max_residual);
  };

  RootSolve rs;
  if (count <= companion_limit) {
    std::vector<cplx> q = coeffs;
    for (int i = 1; i < n; ++i) q = poly_compose(coeffs, q);
    q[1] -= 1.0;
    rs.roots = companion_roots(q);
    rs.companion = true;
    polish(p, rs.roots, 6);
    finish(rs);
    if (rs.reliable) return rs;
  }
  // Start from the n-th preimages of a repelling fixed point: they lie on the
  // Julia set, one next to each repelling periodic point.
  std::vector<cplx> z = backward_tree(coeffs, repelling_fixed_point(coeffs), n);
  aberth(p, z);
  polish(p, z, 4);
  rs.roots = std::move(z);
  rs.companion = false;
  finish(rs);
  return rs;
}

std::vector<PeriodicPointRecord> classify_periodic_points(const std::vector<cplx>& coeffs, int n,
                                                          const std::vector<cplx>& roots,
                                                          double floor) {
  const IteratedPolynomial p{coeffs, n};
  std::vector<PeriodicPointRecord> out;
  out.reserve(roots.size());
  for (const cplx z : roots) {
    PeriodicPointRecord r;
    r.period = n;
    r.point = z;
    r.multiplier = p.value_and_derivative(z).second;
    r.repelling = std::abs(r.multiplier) > 1.0 + floor;
    r.log_jacobian = std::log(std::abs(p.step_derivative(z)));
    out.push_back(r);
  }
  return out;
}

double repelling_sum(const std::vector<PeriodicPointRecord>& records, int d, int n) {
  double s = 0.0;
  for (const auto& r : records)
    if (r.repelling) s += r.log_jacobian;
  return s / std::pow(static_cast<double>(d), n);
}

double birkhoff_log_derivative(const std::vector<cplx>& coeffs, const std::vector<ProjPoint>& samples) {
  if (samples.empty()) throw InvalidArgument("need samples");
  const IteratedPolynomial p{coeffs, 1};
  double s = 0.0;
  for (const auto& x : samples) s += std::log(std::abs(p.step_derivative(to_affine(x)(0))));
  return s / static_cast<double>(samples.size());
}

RepellingResult repelling_experiment(const ProjectiveEndomorphism& f, const ProjPoint& seed_point,
                                     const RepellingOptions& opts) {
  if (!f.is_polynomial()) throw InvalidArgument("the repelling experiment needs a polynomial on P^1");
  if (opts.n_max < 1 || opts.n_max > opts.n_cap)
    throw InvalidArgument("n_max must lie in [1, " + std::to_string(opts.n_cap) + "]");
  const std::vector<cplx> coeffs = f.affine_polynomial();
  RepellingResult out;
  const auto samples = sample_equilibrium(f, seed_point, opts.depth, opts.samples, opts.seed);
  out.lambda_hat = birkhoff_log_derivative(coeffs, samples);
  for (int n = 1; n <= opts.n_max; ++n) {
    const RootSolve rs = periodic_points(coeffs, n, opts.companion_limit);
    const auto rec = classify_periodic_points(coeffs, n, rs.roots, opts.floor);
    RepellingRow row;
    row.n = n;
    row.count = static_cast<int>(rs.roots.size());
    row.repelling_count =
        static_cast<int>(std::count_if(rec.begin(), rec.end(), [](const auto& r) { return r.repelling; }));
    row.s_n = repelling_sum(rec, f.d(), n);
    row.lambda_hat = out.lambda_hat;
    row.gap = std::abs(row.s_n - row.lambda_hat);
    row.max_residual = rs.max_residual;
    row.reliable = rs.reliable;
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace hdist
