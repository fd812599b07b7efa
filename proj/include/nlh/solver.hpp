#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nlh/dual.hpp"
#include "nlh/error.hpp"
#include "nlh/grid.hpp"
#include "nlh/resolvent.hpp"

namespace nlh {

enum class SearchDirection { Steepest, ConjugateGradient };

struct SolverOptions {
  double tol = 1e-7;
  int max_iter = 5000;
  double backtrack = 0.5;
  double sufficient_decrease = 1e-4;
  double initial_step = 1.0;
  double max_step = 4.0;
  SearchDirection direction = SearchDirection::ConjugateGradient;
  /// Ψ truncation radius for the reported barycenter (unscaled units).
  double barycenter_rho = std::numeric_limits<double>::infinity();
  bool record_trace = true;
  /// Called every iteration with (iteration, energy, residual).
  std::function<void(int, double, double)> progress;
};

struct TracePoint {
  double energy = 0.0;
  double residual = 0.0;
};

struct SolveReport {
  double energy = 0.0;
  double residual = 0.0;
  double t_scale = 1.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> barycenter;
  /// Reconstruction norms on the ε-scale grid.
  double u_lp = 0.0;
  double u_sup = 0.0;
  /// Same norms for u(x) = k^{4/(p−2)} u_ε(kx), k = 1/ε.
  double u_lp_k = 0.0;
  double u_sup_k = 0.0;
  std::vector<TracePoint> trace;
};

struct DualState {
  GridField v;
  SolveReport report;
};

/// Ψ-truncated p'-mass centroid in unscaled coordinates.
inline std::vector<double> barycenter(const GridField& v, const DualProblem& prob, double rho) {
  if (!(rho > 0.0)) fail(ErrorCode::Precondition, "rho must be positive");
  const TorusGrid& g = v.grid;
  const int dim = g.dim();
  const double q = prob.p_conj();
  std::vector<double> acc(dim, 0.0), z(dim);
  std::vector<int> idx(dim);
  double mass = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) continue;
    const double w = std::pow(std::abs(v[i]), q);
    g.unflatten(i, idx);
    double r2 = 0.0;
    for (int d = 0; d < dim; ++d) {
      z[d] = prob.eps * g.axis_coordinate(idx[d]);
      r2 += z[d] * z[d];
    }
    const double r = std::sqrt(r2);
    const double shrink = r < rho ? 1.0 : rho / r;
    for (int d = 0; d < dim; ++d) acc[d] += w * shrink * z[d];
    mass += w;
  }
  if (!(mass > 0.0)) fail(ErrorCode::ZeroField, "barycenter of the zero field");
  for (double& a : acc) a /= mass;
  return acc;
}

/// u_ε = R(W_ε^{1/p} v)
inline GridField reconstruct_u(const GridField& v, const DualProblem& prob) {
  require_same_shape(v, prob.w_pow);
  GridField w(prob.grid);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = prob.w_pow[i] * v[i];
  return apply_R(w, prob.mult);
}

/// ‖L u − W_ε|u|^{p−2}u‖₂ / ‖u‖₂^{p−1}
inline double primal_residual(const GridField& u, const DualProblem& prob) {
  GridField r = apply_L(u, prob.params.roots, prob.grid);
  const double p = prob.p();
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= prob.weight[i] * signed_pow(u[i], p - 1.0);
  const double un = lq_norm(u, 2.0);
  if (!(un > 0.0)) fail(ErrorCode::ZeroField, "primal residual of the zero field");
  return lq_norm(r, 2.0) / std::pow(un, p - 1.0);
}

namespace detail {

inline void fill_u_norms(SolveReport& rep, const GridField& v, const DualProblem& prob) {
  const GridField u = reconstruct_u(v, prob);
  const double p = prob.p();
  const double k = 1.0 / prob.eps;
  rep.u_lp = lq_norm(u, p);
  rep.u_sup = max_abs(u);
  const double amp = std::pow(k, 4.0 / (p - 2.0));
  rep.u_lp_k = amp * std::pow(k, -prob.params.dim / p) * rep.u_lp;
  rep.u_sup_k = amp * rep.u_sup;
}

}  // namespace detail

/// Minimizes J_ε over the Nehari set.
///
/// Each step moves in the dual variable φ = |v|^{p'−2}v, maps back with
/// v = |φ|^{p−2}φ and rescales onto the Nehari set; the step is found by
/// backtracking with an Armijo test.  At a Nehari point the φ-gradient of the
/// projected energy is (p−1)|φ|^{p−2}g, so −g is a descent direction.  With
/// SearchDirection::ConjugateGradient the direction is the Polak–Ribière+
/// combination preconditioned by that metric, restarted whenever it fails to
/// descend.
inline DualState minimize_nehari(const DualProblem& prob, const GridField& v0, const SolverOptions& opts = {}) {
  require_same_shape(v0, prob.w_pow);
  const double p = prob.p();
  const double q = prob.p_conj();
  const double cell = prob.grid.cell_volume();
  const std::size_t n = prob.grid.size();

  DualState out;
  SolveReport& rep = out.report;

  DualEvaluation ev = evaluate(v0, prob);
  detail::require_u_plus(ev.q, v0);
  double t = nehari_scale_from(ev.norm_pow, ev.q, q);
  GridField v = v0;
  for (double& x : v.values) x *= t;
  for (double& x : ev.kv.values) x *= t;
  ev.norm_pow *= std::pow(t, q);
  ev.q *= t * t;
  double E = (1.0 / q - 0.5) * ev.norm_pow;
  rep.t_scale = t;

  std::vector<double> phi(n), g(n), G(n), d(n), g_old, G_old;
  bool have_old = false;
  double step = opts.initial_step;

  for (int it = 0;; ++it) {
    // Gradient and residual at the current Nehari point.
    CompensatedSum g_p;
    for (std::size_t i = 0; i < n; ++i) {
      phi[i] = signed_pow(v[i], q - 1.0);
      g[i] = phi[i] - ev.kv[i];
      G[i] = (p - 1.0) * std::pow(std::abs(phi[i]), p - 2.0) * g[i];
      g_p.add(std::pow(std::abs(g[i]), p));
    }
    const double residual = std::pow(g_p.value() * cell, 1.0 / p) / std::pow(ev.norm_pow, (q - 1.0) / q);
    rep.energy = E;
    rep.residual = residual;
    rep.iterations = it;
    if (opts.record_trace) rep.trace.push_back({E, residual});
    if (opts.progress) opts.progress(it, E, residual);
    if (residual < opts.tol) {
      rep.converged = true;
      break;
    }
    if (it >= opts.max_iter) break;

    bool steepest = true;
    if (opts.direction == SearchDirection::ConjugateGradient && have_old) {
      CompensatedSum num, den;
      for (std::size_t i = 0; i < n; ++i) {
        num.add(G[i] * (g[i] - g_old[i]));
        den.add(G_old[i] * g_old[i]);
      }
      const double beta = den.value() > 0.0 ? std::max(0.0, num.value() / den.value()) : 0.0;
      CompensatedSum slope;
      for (std::size_t i = 0; i < n; ++i) {
        d[i] = -g[i] + beta * d[i];
        slope.add(G[i] * d[i]);
      }
      steepest = !(slope.value() < 0.0);
    }
    if (steepest) {
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    }

    // Backtracking along φ + s d.
    bool restarted = steepest;
    step = std::min(opts.max_step, 2.0 * step);
    if (it == 0) step = opts.initial_step;
    for (;;) {
      CompensatedSum slope_sum;
      for (std::size_t i = 0; i < n; ++i) slope_sum.add(G[i] * d[i]);
      const double slope = slope_sum.value() * cell;
      bool accepted = false;
      for (; step >= 1e-14; step *= opts.backtrack) {
        GridField vn(prob.grid);
        for (std::size_t i = 0; i < n; ++i) vn[i] = signed_pow(phi[i] + step * d[i], p - 1.0);
        DualEvaluation en = evaluate(vn, prob);
        if (!in_u_plus(en.q, lq_norm_pow(vn, 2.0))) continue;
        const double tn = nehari_scale_from(en.norm_pow, en.q, q);
        const double En = (1.0 / q - 0.5) * std::pow(tn, q) * en.norm_pow;
        if (En <= E + opts.sufficient_decrease * step * slope) {
          for (double& x : vn.values) x *= tn;
          for (double& x : en.kv.values) x *= tn;
          en.norm_pow *= std::pow(tn, q);
          en.q *= tn * tn;
          v = std::move(vn);
          ev = std::move(en);
          E = En;
          rep.t_scale = tn;
          accepted = true;
          break;
        }
      }
      if (accepted) break;
      if (!restarted) {
        for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
        restarted = true;
        step = opts.initial_step;
        continue;
      }
      std::ostringstream os;
      os << "no admissible step at iteration " << it << " (energy " << E << ", residual " << residual << ")";
      fail(ErrorCode::StalledLineSearch, os.str());
    }
    g_old = g;
    G_old = G;
    have_old = true;
  }

  rep.energy = E;
  rep.barycenter = barycenter(v, prob, opts.barycenter_rho);
  detail::fill_u_norms(rep, v, prob);
  out.v = std::move(v);
  return out;
}

/// Default seed width in grid units, 1/(2√a1).
inline double default_seed_width(const FactorRoots& roots) { return 0.5 / std::sqrt(roots.a1); }

/// v0 = W_ε^{1/p'}·exp(−|x − c|²/(2σ²)) with c = center/ε snapped to the grid.
inline GridField gaussian_seed(const DualProblem& prob, const std::vector<double>& center, double sigma) {
  const TorusGrid& g = prob.grid;
  std::vector<double> c(g.dim());
  for (int d = 0; d < g.dim(); ++d) c[d] = g.axis_coordinate(g.nearest_index(center[d] / prob.eps));
  const double q = prob.p_conj();
  GridField v = GridField::from_function(g, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (int d = 0; d < g.dim(); ++d) r2 += (x[d] - c[d]) * (x[d] - c[d]);
    return std::exp(-r2 / (2.0 * sigma * sigma));
  });
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= std::pow(prob.weight[i], 1.0 / q);
  return v;
}

/// Gaussian seed that is guaranteed to lie in U+.
///
/// A positive Gaussian can have Q(v0) ≤ 0 (always, in two dimensions); then
/// W^{1/p} v0 is replaced by its part on the frequencies where the multiplier is
/// positive, which makes Q(v0) > 0.
inline GridField seed_at(const DualProblem& prob, const std::vector<double>& center, double sigma) {
  GridField v = gaussian_seed(prob, center, sigma);
  if (in_u_plus(quad_form(v, prob), lq_norm_pow(v, 2.0))) return v;
  std::vector<double> keep(prob.mult.values.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = prob.mult.values[i] > 0.0 ? 1.0 : 0.0;
  GridField w(prob.grid);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = prob.w_pow[i] * v[i];
  w = apply_symbol(w, keep);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] /= prob.w_pow[i];
  return w;
}

/// Seed at the lexicographically first global maximizer (origin for constant W).
inline GridField default_seed(const DualProblem& prob) {
  std::vector<double> c(prob.grid.dim(), 0.0);
  if (prob.spec.has_maximizer_set()) c = prob.spec.maximizers().front();
  return seed_at(prob, c, default_seed_width(prob.params.roots));
}

struct LimitSolution {
  DualProblem prob;
  DualState state;
  double c0 = 0.0;
};

inline LimitSolution solve_limit_problem(const ModelParameters& params, const TorusGrid& grid, double w0, double eta,
                                         const SolverOptions& opts = {}) {
  if (!(w0 > 0.0)) fail(ErrorCode::Precondition, "W0 must be positive");
  LimitSolution out;
  out.prob = DualProblem::make(params, grid, WeightSpec::constant(w0), 1.0, eta);
  out.state = minimize_nehari(out.prob, default_seed(out.prob), opts);
  out.c0 = out.state.report.energy;
  return out;
}

struct MultistartOutcome {
  std::size_t seed_index = 0;
  bool ok = false;
  std::string error;
  std::optional<DualState> state;
  std::size_t cluster = 0;
};

struct MultistartResult {
  std::vector<MultistartOutcome> outcomes;   // in seed order
  std::vector<std::size_t> representatives;  // indices into outcomes
};

/// Runs every seed and clusters by energy (10⁻⁴ relative) and barycenter
/// (within `cluster_radius`, unscaled units).
inline MultistartResult multistart(const DualProblem& prob, const std::vector<GridField>& seeds, const SolverOptions& opts,
                                   double cluster_radius) {
  MultistartResult res;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    MultistartOutcome o;
    o.seed_index = s;
    try {
      o.state = minimize_nehari(prob, seeds[s], opts);
      o.ok = true;
    } catch (const Error& e) {
      o.error = e.what();
    }
    res.outcomes.push_back(std::move(o));
  }
  for (std::size_t i = 0; i < res.outcomes.size(); ++i) {
    auto& o = res.outcomes[i];
    if (!o.ok) continue;
    bool placed = false;
    for (std::size_t c = 0; c < res.representatives.size() && !placed; ++c) {
      const auto& r = *res.outcomes[res.representatives[c]].state;
      const double e0 = r.report.energy;
      const double e1 = o.state->report.energy;
      double dist2 = 0.0;
      for (std::size_t d = 0; d < r.report.barycenter.size(); ++d) {
        const double dd = r.report.barycenter[d] - o.state->report.barycenter[d];
        dist2 += dd * dd;
      }
      if (std::abs(e1 - e0) <= 1e-4 * std::abs(e0) && std::sqrt(dist2) <= cluster_radius) {
        o.cluster = c;
        placed = true;
      }
    }
    if (!placed) {
      o.cluster = res.representatives.size();
      res.representatives.push_back(i);
    }
  }
  return res;
}

}  // namespace nlh
