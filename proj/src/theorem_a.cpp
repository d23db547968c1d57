#include "hdist/theorem_a.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SVD>

#include "hdist/sampling.hpp"

namespace hdist {

namespace {

const std::string kStage = "assemble_theorem_A";

double largest_singular_value(const CMatrix& m) {
  return Eigen::JacobiSVD<CMatrix>(m).singularValues()(0);
}

}  // namespace

double TheoremAData::chart_radius(double fs_radius) const {
  return cocycle.chart(0).kind() == AtlasKind::Unitary ? std::tan(fs_radius) : fs_radius;
}

CMatrix TheoremAData::d(int n) const {
  const int k = f.k();
  CMatrix out = CMatrix::Identity(k, k);
  for (int i = 0; i < n; ++i) out = std::exp(gamma) * oseledec.reduced.at(i) * out;
  return out;
}

CVector TheoremAData::phi(int n, const ProjPoint& p) const {
  const CVector zeta = cocycle.chart(n).to_chart(p);
  return evaluate(norm.phi.at(n), oseledec.c.at(n) * zeta);
}

ProjPoint TheoremAData::phi_inverse(int n, const CVector& s, const CVector* guess) const {
  const JetMap& ph = norm.phi.at(n);
  CVector v = guess ? *guess : CVector(s * std::exp(-n * gamma));
  for (int it = 0; it < 40; ++it) {
    const CVector r = evaluate(ph, v) - s;
    const CVector step = jacobian(ph, v).partialPivLu().solve(r);
    v -= step;
    if (step.norm() <= 1e-17 + 1e-15 * v.norm()) break;
  }
  return cocycle.chart(n).to_point(oseledec.c.at(n).inverse() * v);
}

ProjPoint TheoremAData::branch(int n, const ProjPoint& w) const {
  ProjPoint y = w;
  for (int i = 0; i < n; ++i) {
    const CVector zeta = evaluate(cocycle.inverse.at(i), cocycle.chart(i).to_chart(y));
    y = refine_preimage(f, y, cocycle.chart(i + 1).to_point(zeta), 20);
  }
  return y;
}

TheoremAData assemble_theorem_A(const ProjectiveEndomorphism& f, const BackwardOrbit& orbit,
                                const TheoremAOptions& opts) {
  const int big_n = opts.window;
  if (big_n < 0) throw InvalidArgument("window must be nonnegative");
  if (orbit.depth() < big_n + 2) throw InvalidArgument("orbit depth must be at least N + 2");
  TheoremAData data(f, orbit);
  data.window = big_n;
  const int k = f.k();

  data.cocycle = build_cocycle(f, orbit, 0, big_n, opts.degree_cap, opts.atlas);
  data.spectrum = opts.spectrum ? *opts.spectrum
                                : group_exponents(cocycle_exponents(data.cocycle.linear));
  if (data.spectrum.k() != k) throw DimensionMismatch("spectrum dimension differs from k");
  if (opts.gamma && opts.epsilon) {
    data.gamma = *opts.gamma;
    data.epsilon = *opts.epsilon;
  } else {
    const auto [g, e] = suggest_parameters(data.spectrum);
    data.gamma = opts.gamma.value_or(g);
    data.epsilon = opts.epsilon.value_or(e);
  }
  const double eps = data.epsilon;

  data.oseledec = oseledec_reduce(data.cocycle.linear, 0, data.spectrum, eps, opts.lookahead,
                                  opts.max_leakage);
  if (data.oseledec.leakage > opts.max_leakage) {
    std::ostringstream os;
    os << "off-block leakage " << data.oseledec.leakage << " above " << opts.max_leakage;
    throw DynamicsError(os.str());
  }

  ContractionChain chain;
  chain.n_min = 0;
  chain.spectrum = data.spectrum;
  chain.epsilon = eps;
  chain.policy = ExtensionPolicy::Constant;
  const double theta = std::exp(-data.spectrum.smallest() + 2.0 * eps);
  std::vector<double> rho;
  for (int n = 0; n <= big_n; ++n) {
    const CMatrix& cn = data.oseledec.c[n];
    const CMatrix& cn1 = data.oseledec.c[n + 1];
    JetMap w = left_multiply(cn1, compose(data.cocycle.inverse[n],
                                          JetMap::linear(cn.inverse(), opts.degree_cap)));
    const CMatrix& a = data.oseledec.reduced[n];
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) w.set(i, MultiIndex::unit(k, j), a(i, j));
    const double kappa = theta - largest_singular_value(a);
    if (!(kappa > 0.0)) throw PipelineError(kStage, "linear part exceeds the contraction bound");
    rho.push_back(std::min(orbit.rho.at(n), radius_for_nonlinear_lipschitz(w, kappa, 1.0)));
    chain.maps.push_back(std::move(w));
  }
  chain.radii = slow_minorant(rho, eps);
  data.chain = chain;
  data.chain_report = validate_chain(chain);

  data.norm = normalize(chain, data.gamma, eps, opts.tail_tol);

  data.h_eps0 = data.oseledec.h.at(0);
  data.r_hat = data.norm.radius(0) / data.h_eps0;
  data.rho_hat = 4.0 * data.norm.radius(0);
  data.chart_distortion = 1.0;
  for (int n = 0; n <= big_n + 1; ++n) {
    data.chart_distortion =
        std::max(data.chart_distortion, data.cocycle.chart(n).distortion(data.chart_radius(data.r_hat)));
  }
  data.h_hat = data.chart_distortion * data.h_eps0;

  const double rate = -data.spectrum.smallest() + 4.0 * eps + data.gamma;
  if (!(rate < 0.0)) throw PipelineError(kStage, "4 eps + gamma must stay below the smallest exponent");
  data.n_hat = 0;
  while (std::exp(data.n_hat * rate) * data.h_eps0 > 1.0) ++data.n_hat;
  if (data.n_hat > big_n) {
    std::ostringstream os;
    os << "n_hat = " << data.n_hat << " exceeds the window " << big_n;
    throw PipelineError(kStage, os.str());
  }
  return data;
}

bool TheoremAReport::pass() const {
  return d_blocks_ok && r_slow && rho_slow && h_inverse_slow && !rows.empty() &&
         std::all_of(rows.begin(), rows.end(), [](const TheoremARow& r) { return r.pass; });
}

TheoremAReport verify_theorem_A(const TheoremAData& data, int n_samples, std::uint64_t seed) {
  TheoremAReport rep;
  const int k = data.f.k();
  const double g = data.gamma;
  const double eps = data.epsilon;

  for (int n = data.n_hat; n <= data.window; ++n) {
    TheoremARow row;
    row.n = n;
    row.bound_low = std::exp(n * (g - 2.0 * eps));
    row.bound_high = std::exp(n * (g + 3.0 * eps)) * data.h_hat;
    row.residual_tol = 1e-7 * data.r_hat;
    std::mt19937_64 rng(seed + 7919ULL * static_cast<std::uint64_t>(n));
    const Chart& ch = data.cocycle.chart(n);
    const double radius = data.chart_radius(data.r_hat * std::exp(-n * (g + 2.0 * eps)));
    row.lip_low = std::numeric_limits<double>::infinity();
    for (int s = 0; s < n_samples; ++s) {
      const ProjPoint u = ch.to_point(sample_ball(rng, k, radius));
      const ProjPoint v = ch.to_point(sample_ball(rng, k, radius));
      const double dist = fs_distance(u, v);
      if (dist <= 0.0) continue;
      const double ratio = (data.phi(n, u) - data.phi(n, v)).norm() / dist;
      row.lip_low = std::min(row.lip_low, ratio);
      row.lip_high = std::max(row.lip_high, ratio);
    }
    const CMatrix dn = data.d(n);
    const Chart& c0 = data.cocycle.chart(0);
    const double r0 = data.chart_radius(data.r_hat);
    for (int s = 0; s < n_samples; ++s) {
      const ProjPoint w = c0.to_point(sample_ball(rng, k, r0));
      const CVector lhs = data.phi(n, data.branch(n, w));
      const CVector rhs = dn * data.phi(0, w);
      row.residual = std::max(row.residual, (lhs - rhs).norm());
    }
    row.pass = row.lip_low >= row.bound_low * (1.0 - 1e-6) &&
               row.lip_high <= row.bound_high * (1.0 + 1e-6) && row.residual <= row.residual_tol;
    rep.rows.push_back(row);
  }

  const LyapunovSpectrum& sp = data.spectrum;
  for (int n = 0; n <= data.window + 1; ++n) {
    const CMatrix dn = data.d(n);
    for (int j = 0; j < sp.l(); ++j) {
      for (int i = sp.offset(j); i < sp.offset(j + 1); ++i) {
        const CVector col = dn.col(i);
        double off = 0.0;
        for (int r = 0; r < k; ++r)
          if (sp.block_of(r) != j) off = std::max(off, std::abs(col(r)));
        const double lg = std::log(col.norm());
        const double lo = -n * sp.exponent(j) + n * (g - eps);
        const double hi = -n * sp.exponent(j) + n * (g + eps);
        const double excess = std::max(lo - lg, lg - hi);
        rep.d_block_excess = std::max(rep.d_block_excess, excess);
        if (excess > 1e-9 || off > 1e-12) rep.d_blocks_ok = false;
      }
    }
  }

  rep.r_slow = validate_slow({0, data.norm.radii, eps}).pass;
  rep.rho_slow = validate_slow({0, data.chain.radii, eps}).pass;
  std::vector<double> hinv;
  for (double h : data.oseledec.h) hinv.push_back(1.0 / h);
  rep.h_inverse_slow = validate_slow({0, hinv, eps}).pass;
  return rep;
}

ProjPoint sample_branch_point(const TheoremAData& data, int n, double t, std::mt19937_64& rng) {
  const double r = data.chart_radius(t * data.r_hat / data.h_hat);
  return data.branch(n, data.cocycle.chart(0).to_point(sample_ball(rng, data.f.k(), r)));
}

ConvexityResult convexity_defect(const TheoremAData& data, int n, double t, const ProjPoint& p,
                                 const ProjPoint& q, int segments) {
  if (segments < 1) throw InvalidArgument("need at least one segment");
  if (!(t > 0.0)) throw InvalidArgument("t must be positive");
  ConvexityResult out;
  const int k = data.f.k();
  const double g = data.gamma;
  const double eps = data.epsilon;
  out.distance = fs_distance(p, q);
  out.bound = std::exp(5.0 * n * eps) * data.h_hat * out.distance;

  const CVector a = data.phi(n, p);
  const CVector b = data.phi(n, q);
  const CMatrix dinv = data.d(n).inverse();
  const double poly = t * data.r_hat * (1.0 + 1e-9);
  out.inclusion_segment = sup_norm(dinv * a) <= poly && sup_norm(dinv * b) <= poly;

  const double ball = t * data.r_hat * std::exp(-n * (g + 2.0 * eps)) * (1.0 + 1e-9);
  const double image = std::sqrt(static_cast<double>(k)) * t * data.r_hat * (1.0 + 1e-9);
  const ProjPoint& xn = data.orbit.point(-n);
  const ProjPoint& x0 = data.orbit.point(0);
  const CMatrix& cn = data.oseledec.c.at(n);
  const Chart& ch = data.cocycle.chart(n);

  ProjPoint prev = p;
  CVector guess = cn * ch.to_chart(p);
  for (int i = 0; i <= segments; ++i) {
    ProjPoint z;
    if (i == 0) {
      z = p;
    } else if (i == segments) {
      z = q;
    } else {
      const CVector s = a + (b - a) * (static_cast<double>(i) / segments);
      z = data.phi_inverse(n, s, &guess);
    }
    guess = cn * ch.to_chart(z);
    if (fs_distance(z, xn) > ball) out.inclusion_ball = false;
    ProjPoint fz = z;
    for (int m = 0; m < n; ++m) fz = data.f(fz);
    if (fs_distance(fz, x0) > image) out.inclusion_image = false;
    if (i > 0) out.length += fs_distance(prev, z);
    prev = z;
  }
  out.pass = out.length <= out.bound * (1.0 + 1e-9) && out.inclusion_segment &&
             out.inclusion_ball && out.inclusion_image;
  if (!out.inclusion_segment) {
    out.violated = "segment";
  } else if (!out.inclusion_ball) {
    out.violated = "ball";
  } else if (!out.inclusion_image) {
    out.violated = "image";
  } else if (!out.pass) {
    out.violated = "length";
  }
  return out;
}

}  // namespace hdist
