#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "hdist/normalform.hpp"

namespace hdist {

const JetMap& JetFamily::at(int n) const {
  if (n < n_min || n > n_max()) throw InvalidArgument("family index " + std::to_string(n) + " out of range");
  return maps[n - n_min];
}

ContractionChain shift_spectrum(const ContractionChain& chain, double gamma) {
  if (gamma < 0.0) throw PipelineError("shift_spectrum", "negative gamma");
  const double target = chain.theta() * std::exp(gamma);
  if (!(target < 1.0)) throw PipelineError("shift_spectrum", "theta e^gamma >= 1");
  ContractionChain out = chain;
  out.spectrum = chain.spectrum.shifted(gamma);
  out.gamma = chain.gamma + gamma;
  std::vector<double> rho(chain.size());
  for (int n = chain.n_min; n <= chain.n_max(); ++n) {
    const int i = n - chain.n_min;
    const JetMap& w = chain.maps[i];
    JetMap s(w.dim_in(), w.dim_out(), w.degree_cap());
    for (int c = 0; c < w.dim_out(); ++c) {
      for (const auto& [alpha, v] : w.component(c)) {
        const double d = alpha.order();
        s.set(c, alpha, v * std::exp(gamma * ((n + 1) - n * d)));
      }
    }
    out.maps[i] = s;
    const double lin = Eigen::JacobiSVD<CMatrix>(s.linear_part()).singularValues()(0);
    if (!(lin < target)) {
      throw PipelineError("shift_spectrum", "linear part at index " + std::to_string(n) +
                                                " already exceeds theta e^gamma");
    }
    rho[i] = radius_for_nonlinear_lipschitz(s, target - lin, chain.radius(n));
  }
  out.radii = slow_minorant(rho, chain.epsilon);
  return out;
}

namespace {

// Coefficients of z^alpha (|alpha| = p) in (A z)^beta, column beta.
CMatrix power_matrix(const CMatrix& a, const std::vector<MultiIndex>& mons, int p) {
  const int k = static_cast<int>(a.rows());
  std::vector<Poly> lin(k);
  for (int m = 0; m < k; ++m) {
    for (int i = 0; i < k; ++i) {
      if (a(m, i) != cplx{}) lin[m][MultiIndex::unit(k, i)] = a(m, i);
    }
  }
  std::map<MultiIndex, int> pos;
  for (int i = 0; i < static_cast<int>(mons.size()); ++i) pos[mons[i]] = i;
  CMatrix out = CMatrix::Zero(mons.size(), mons.size());
  for (int b = 0; b < static_cast<int>(mons.size()); ++b) {
    Poly prod{{MultiIndex::zero(k), cplx{1.0, 0.0}}};
    for (int m = 0; m < k; ++m) {
      for (int e = 0; e < mons[b][m]; ++e) prod = poly_mul(prod, lin[m], p);
    }
    for (const auto& [alpha, c] : prod) {
      if (alpha.order() == p) out(pos.at(alpha), b) += c;
    }
  }
  return out;
}

struct IndexData {
  CMatrix l;  // A o H in coefficient coordinates
  CMatrix r;  // H o A
  CVector g;  // degree-p coefficients of the map
};

CMatrix restrict(const CMatrix& m, const std::vector<int>& idx) {
  CMatrix out(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = m(idx[i], idx[j]);
  return out;
}

CVector restrict(const CVector& v, const std::vector<int>& idx) {
  CVector out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

std::string alpha_string(const MultiIndex& a) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
  os << ")";
  return os.str();
}

}  // namespace

HomologicalSolution solve_homological(const ContractionChain& shifted, int p,
                                      const ConstraintParams& params, double tail_tol) {
  const std::string stage = "solve_homological";
  const int k = shifted.k();
  const int cap = shifted.maps.front().degree_cap();
  if (p < 2 || p > cap) throw PipelineError(stage, "degree out of range");
  if (!(tail_tol > 0.0)) throw PipelineError(stage, "tail tolerance must be positive");
  const auto mons = monomials_of_order(k, p);
  const int np = static_cast<int>(mons.size());
  const int dim = k * np;
  const auto& spec = shifted.spectrum;

  HomologicalSolution sol;
  sol.degree = p;
  sol.h.n_min = shifted.n_min;
  sol.h.maps.assign(shifted.size() + 1, JetMap(k, k, cap));

  // Per stored index; indices beyond the window reuse these through wrap_index.
  std::vector<IndexData> data(shifted.size());
  double amax = 0.0;
  for (int i = 0; i < shifted.size(); ++i) {
    const JetMap& w = shifted.maps[i];
    const CMatrix a = w.linear_part();
    const CMatrix pa = power_matrix(a, mons, p);
    IndexData& d = data[i];
    d.l = CMatrix::Zero(dim, dim);
    d.r = CMatrix::Zero(dim, dim);
    d.g = CVector::Zero(dim);
    for (int c = 0; c < k; ++c) {
      for (int m = 0; m < k; ++m)
        for (int x = 0; x < np; ++x) d.l(c * np + x, m * np + x) = a(c, m);
      d.r.block(c * np, c * np, np, np) = pa;
      for (int x = 0; x < np; ++x) d.g(c * np + x) = w.coeff(c, mons[x]);
    }
    amax = std::max(amax, d.g.cwiseAbs().maxCoeff());
  }
  if (amax == 0.0) return sol;

  // Classify basis elements by the sign of the shifted defect.
  std::vector<int> fwd, bwd;
  std::vector<double> defect(dim);
  for (int c = 0; c < k; ++c) {
    const int j = spec.block_of(c);
    for (int x = 0; x < np; ++x) defect[c * np + x] = resonance_defect(spec, j, mons[x]);
  }
  for (int idx = 0; idx < dim; ++idx) {
    const double d = defect[idx];
    if (d > params.b) {
      fwd.push_back(idx);
    } else if (d < -params.b) {
      bwd.push_back(idx);
    } else {
      // Elements with the same defect span an invariant class; it can only be
      // skipped when the map has no coefficient anywhere in it.
      bool live = false;
      for (int o = 0; o < dim && !live; ++o) {
        if (defect[o] != d) continue;
        for (const auto& dd : data) live = live || dd.g(o) != cplx{};
      }
      if (live) {
        const int c = idx / np;
        std::ostringstream os;
        os << "resonant index j=" << spec.block_of(c) + 1 << " alpha=" << alpha_string(mons[idx % np])
           << ": |defect| = " << std::abs(d) << " <= b = " << params.b;
        throw PipelineError(stage, os.str());
      }
    }
  }

  const double rate = params.b - (integer_part(params.ratio) + 3) * params.epsilon;
  if (!(rate > 0.0)) throw PipelineError(stage, "non-positive tail rate b - ([R]+3) eps");
  const double depth_real = std::log(std::max(amax / tail_tol, 1.0)) / rate;
  const double cap_depth = 10.0 * std::ceil(std::log(1.0 / tail_tol) / params.b);
  if (depth_real > cap_depth) {
    throw PipelineError(stage, "series depth " + std::to_string(depth_real) +
                                   " exceeds cap " + std::to_string(cap_depth));
  }
  sol.depth = std::max(1, static_cast<int>(std::ceil(depth_real)));
  sol.tail_bound = amax * std::exp(-(sol.depth + 1) * rate) / (1.0 - std::exp(-rate));
  sol.forward_terms = static_cast<int>(fwd.size());
  sol.backward_terms = static_cast<int>(bwd.size());

  const int n_min = shifted.n_min;
  const int n_max = shifted.n_max();
  auto slot = [&](int n) -> const IndexData& {
    try {
      return data[wrap_index(n, n_min, n_max, shifted.policy) - n_min];
    } catch (const InvalidArgument&) {
      throw PipelineError(stage, "reject policy leaves no effective window for series depth " +
                                     std::to_string(sol.depth));
    }
  };

  std::vector<CVector> h(shifted.size() + 1, CVector::Zero(dim));

  if (!fwd.empty()) {
    std::vector<Eigen::PartialPivLU<CMatrix>> lu(shifted.size());
    std::vector<CMatrix> rf(shifted.size());
    for (int i = 0; i < shifted.size(); ++i) {
      lu[i].compute(restrict(data[i].l, fwd));
      rf[i] = restrict(data[i].r, fwd);
    }
    CVector next = CVector::Zero(fwd.size());
    for (int n = n_max + 1 + sol.depth; n >= n_min; --n) {
      const IndexData& d = slot(n);
      const int s = static_cast<int>(&d - data.data());
      CVector cur = lu[s].solve(restrict(d.g, fwd) + rf[s] * next);
      if (n <= n_max + 1) {
        for (std::size_t t = 0; t < fwd.size(); ++t) h[n - n_min](fwd[t]) = cur(t);
      }
      next = std::move(cur);
    }
  }
  if (!bwd.empty()) {
    std::vector<Eigen::PartialPivLU<CMatrix>> lu(shifted.size());
    std::vector<CMatrix> lb(shifted.size());
    for (int i = 0; i < shifted.size(); ++i) {
      lu[i].compute(restrict(data[i].r, bwd));
      lb[i] = restrict(data[i].l, bwd);
    }
    CVector cur = CVector::Zero(bwd.size());
    for (int n = n_min - sol.depth; n <= n_max; ++n) {
      const IndexData& d = slot(n);
      const int s = static_cast<int>(&d - data.data());
      CVector nxt = lu[s].solve(lb[s] * cur - restrict(d.g, bwd));
      if (n + 1 >= n_min) {
        for (std::size_t t = 0; t < bwd.size(); ++t) h[n + 1 - n_min](bwd[t]) = nxt(t);
      }
      cur = std::move(nxt);
    }
  }

  for (int i = 0; i <= shifted.size(); ++i) {
    JetMap& hm = sol.h.maps[i];
    for (int c = 0; c < k; ++c)
      for (int x = 0; x < np; ++x) hm.set(c, mons[x], h[i](c * np + x));
  }
  for (int i = 0; i < shifted.size(); ++i) {
    const IndexData& d = data[i];
    const CVector res = d.g + d.r * h[i + 1] - d.l * h[i];
    sol.residual = std::max(sol.residual, res.cwiseAbs().maxCoeff());
  }
  return sol;
}

KillResult kill_degree(const ContractionChain& shifted, const HomologicalSolution& sol,
                       const ConstraintParams& params) {
  const int k = shifted.k();
  const int cap = shifted.maps.front().degree_cap();
  KillResult out;
  out.s.n_min = shifted.n_min;
  for (const auto& h : sol.h.maps) out.s.maps.push_back(JetMap::identity(k, cap) + h);
  const double eps_prime = params.epsilon / std::max(params.p_star, 1);
  try {
    out.chain = conjugate_chain(out.s.maps, shifted, eps_prime);
  } catch (const Error& e) {
    throw PipelineError("kill_degree", e.what());
  }
  const int p = sol.degree;
  const auto mons = monomials_of_order(k, p);
  for (auto& w : out.chain.maps) {
    out.degree_residual = std::max(out.degree_residual, w.coeff_norm(p));
    for (int c = 0; c < k; ++c)
      for (const auto& alpha : mons) w.set(c, alpha, cplx{});
  }
  return out;
}

}  // namespace hdist
