#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "nlh/error.hpp"
#include "nlh/grid.hpp"
#include "nlh/regime.hpp"
#include "nlh/resolvent.hpp"
#include "nlh/weight.hpp"

namespace nlh {

/// Q(v) > kUPlusThreshold·‖v‖₂² is required for the Nehari projection.
inline constexpr double kUPlusThreshold = 1e-10;

/// Everything needed to evaluate J_ε on grid fields.
struct DualProblem {
  ModelParameters params;
  TorusGrid grid;
  SpectralMultiplier mult;
  WeightSpec spec;
  double eps = 1.0;
  GridField weight;  // W_ε(x) = W(εx)
  GridField w_pow;   // W_ε^{1/p}

  static DualProblem make(const ModelParameters& params, const TorusGrid& grid, const WeightSpec& spec, double eps,
                          double eta) {
    if (grid.dim() != params.dim) fail(ErrorCode::ShapeMismatch, "grid dimension differs from N");
    if (!(eps > 0.0) || !std::isfinite(eps)) fail(ErrorCode::Precondition, "eps must be positive");
    spec.validate(params.dim);
    DualProblem prob;
    prob.params = params;
    prob.grid = grid;
    prob.mult = build_multiplier(params.roots, grid, eta);
    prob.spec = spec;
    prob.eps = eps;
    std::vector<double> y(params.dim);
    prob.weight = GridField::from_function(grid, [&](std::span<const double> x) {
      for (int d = 0; d < params.dim; ++d) y[d] = eps * x[d];
      return spec(y);
    });
    prob.w_pow = GridField(grid);
    const double inv_p = 1.0 / params.p;
    for (std::size_t i = 0; i < grid.size(); ++i) prob.w_pow[i] = std::pow(prob.weight[i], inv_p);
    return prob;
  }

  double p() const { return params.p; }
  double p_conj() const { return params.p_conj(); }
};

/// |v|^{q−2}v, extended by 0 at v = 0.
inline double signed_pow(double v, double exponent) {
  return v == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(v), exponent), v);
}

inline GridField duality_map(const GridField& v, double q) {
  GridField out(v.grid);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = signed_pow(v[i], q - 1.0);
  return out;
}

/// K v = W^{1/p} R(W^{1/p} v)
inline GridField birman_schwinger(const GridField& v, const DualProblem& prob) {
  require_same_shape(v, prob.w_pow);
  GridField w(prob.grid);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = prob.w_pow[i] * v[i];
  GridField rw = apply_R(w, prob.mult);
  for (std::size_t i = 0; i < rw.size(); ++i) rw[i] *= prob.w_pow[i];
  return rw;
}

inline double quad_form(const GridField& v, const DualProblem& prob) { return inner(v, birman_schwinger(v, prob)); }

inline double energy(const GridField& v, const DualProblem& prob) {
  const double q = prob.p_conj();
  return lq_norm_pow(v, q) / q - 0.5 * quad_form(v, prob);
}

/// g = |v|^{p'−2}v − W^{1/p} R(W^{1/p} v)
inline GridField gradient(const GridField& v, const DualProblem& prob) {
  GridField g = birman_schwinger(v, prob);
  const double q = prob.p_conj();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = signed_pow(v[i], q - 1.0) - g[i];
  return g;
}

/// One evaluation shared by energy, gradient and the Nehari quantities.
struct DualEvaluation {
  double norm_pow = 0.0;  // ‖v‖_{p'}^{p'}
  double q = 0.0;         // Q(v)
  double energy = 0.0;
  GridField kv;           // K v
};

inline DualEvaluation evaluate(const GridField& v, const DualProblem& prob) {
  DualEvaluation e;
  e.kv = birman_schwinger(v, prob);
  e.norm_pow = lq_norm_pow(v, prob.p_conj());
  e.q = inner(v, e.kv);
  e.energy = e.norm_pow / prob.p_conj() - 0.5 * e.q;
  return e;
}

inline bool in_u_plus(double q, double l2_sq) { return q > kUPlusThreshold * l2_sq; }

namespace detail {

inline void require_u_plus(double q, const GridField& v) {
  const double l2 = lq_norm_pow(v, 2.0);
  if (!in_u_plus(q, l2)) {
    std::ostringstream os;
    os << "Q(v) = " << q << " is not above " << kUPlusThreshold << " * |v|_2^2 = " << kUPlusThreshold * l2;
    fail(ErrorCode::NotInUPlus, os.str());
  }
}

}  // namespace detail

/// t_v = (‖v‖^{p'} / Q(v))^{1/(2−p')} from the norm and form values.
inline double nehari_scale_from(double norm_pow, double q, double p_conj) {
  return std::pow(norm_pow / q, 1.0 / (2.0 - p_conj));
}

inline double nehari_scale(const GridField& v, const DualProblem& prob) {
  const double q = quad_form(v, prob);
  detail::require_u_plus(q, v);
  return nehari_scale_from(lq_norm_pow(v, prob.p_conj()), q, prob.p_conj());
}

/// J(t_v v) = (1/p' − 1/2) t_v^{p'} ‖v‖^{p'}
inline double nehari_energy_from(double norm_pow, double q, double p_conj) {
  const double t = nehari_scale_from(norm_pow, q, p_conj);
  return (1.0 / p_conj - 0.5) * std::pow(t, p_conj) * norm_pow;
}

inline double nehari_energy(const GridField& v, const DualProblem& prob) {
  const double q = quad_form(v, prob);
  detail::require_u_plus(q, v);
  return nehari_energy_from(lq_norm_pow(v, prob.p_conj()), q, prob.p_conj());
}

}  // namespace nlh
