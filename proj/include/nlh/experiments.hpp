#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nlh/dual.hpp"
#include "nlh/error.hpp"
#include "nlh/grid.hpp"
#include "nlh/kernels.hpp"
#include "nlh/resolvent.hpp"
#include "nlh/solver.hpp"
#include "nlh/weight.hpp"

namespace nlh {

namespace detail {

inline void check_eps_list(const std::vector<double>& eps_list) {
  if (eps_list.empty()) fail(ErrorCode::Precondition, "eps list is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) fail(ErrorCode::Precondition, "eps values must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) fail(ErrorCode::Precondition, "eps list must be strictly decreasing");
  }
}

inline double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

inline std::vector<double> argmax_point(const GridField& u, double eps) {
  std::vector<double> x = u.grid.point(argmax_abs(u));
  for (double& c : x) c *= eps;
  return x;
}

}  // namespace detail

/// Solve summary shared by all drivers.
struct SolveRecord {
  bool ok = false;
  std::string error;
  SolveReport report;
  double primal_residual = std::numeric_limits<double>::quiet_NaN();
};

inline SolveRecord run_solve(const DualProblem& prob, const GridField& seed, const SolverOptions& opts,
                             GridField* v_out = nullptr, GridField* u_out = nullptr) {
  SolveRecord rec;
  try {
    DualState s = minimize_nehari(prob, seed, opts);
    const GridField u = reconstruct_u(s.v, prob);
    rec.primal_residual = primal_residual(u, prob);
    rec.report = std::move(s.report);
    rec.ok = true;
    if (v_out) *v_out = std::move(s.v);
    if (u_out) *u_out = u;
  } catch (const Error& e) {
    rec.error = e.what();
  }
  return rec;
}

// ---- energy comparison ---------------------------------------------------

struct EnergyRow {
  double eps = 0.0;
  double c_eps = 0.0;
  double gap = 0.0;
  double relative_gap = 0.0;
  SolveRecord solve;
};

struct EnergyComparison {
  double c0 = 0.0;
  double w0 = 0.0;
  SolveRecord limit;
  std::vector<EnergyRow> rows;
  double slack = 1e-3;

  /// c_ε − c0 ≥ −slack·c0 for every successful row.
  bool all_above() const {
    for (const auto& r : rows) {
      if (!r.solve.ok || r.gap < -slack * c0) return false;
    }
    return !rows.empty() && limit.ok;
  }
  /// Gaps decrease along the list within the slack (reported, not asserted).
  bool gaps_monotone() const {
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].gap > rows[i - 1].gap + slack * c0) return false;
    }
    return true;
  }
  bool all_converged() const {
    if (!limit.ok || !limit.report.converged) return false;
    for (const auto& r : rows) {
      if (!r.solve.ok || !r.solve.report.converged) return false;
    }
    return true;
  }
};

inline EnergyComparison energy_comparison(const ModelParameters& params, const TorusGrid& grid, const WeightSpec& weight,
                                          const std::vector<double>& eps_list, double eta, const SolverOptions& opts) {
  detail::check_eps_list(eps_list);
  weight.validate(params.dim);
  EnergyComparison out;
  out.w0 = weight.sup();
  const DualProblem limit = DualProblem::make(params, grid, WeightSpec::constant(out.w0), 1.0, eta);
  out.limit = run_solve(limit, default_seed(limit), opts);
  if (!out.limit.ok) fail(ErrorCode::NonConvergent, "limit problem failed: " + out.limit.error);
  out.c0 = out.limit.report.energy;
  for (double eps : eps_list) {
    EnergyRow row;
    row.eps = eps;
    const DualProblem prob = DualProblem::make(params, grid, weight, eps, eta);
    row.solve = run_solve(prob, default_seed(prob), opts);
    if (row.solve.ok) {
      row.c_eps = row.solve.report.energy;
      row.gap = row.c_eps - out.c0;
      row.relative_gap = row.gap / out.c0;
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

// ---- concentration ---------------------------------------------------------

struct ConcentrationRecord {
  double eps = 0.0;
  double k = 0.0;
  double c_eps = 0.0;
  std::vector<double> barycenter;
  std::vector<double> argmax_u;
  /// Distance from argmax_u to M.
  double dist_to_M = 0.0;
  /// Distance from the barycenter to M (diagnostic).
  double barycenter_dist = 0.0;
  double residual = 0.0;
  SolveRecord solve;
};

struct ConcentrationSweep {
  std::vector<ConcentrationRecord> records;
  double width = 0.0;
  double rho = 0.0;

  bool dist_non_increasing() const {
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (records[i].dist_to_M > records[i - 1].dist_to_M) return false;
    }
    return true;
  }
  bool final_within(double fraction) const {
    return !records.empty() && records.back().solve.ok && records.back().dist_to_M < fraction * width;
  }
  bool all_converged() const {
    for (const auto& r : records) {
      if (!r.solve.ok || !r.solve.report.converged) return false;
    }
    return true;
  }
};

/// Smallest ρ with M_δ ⊂ B_ρ for a bump or plateau weight.
inline double default_rho(const WeightSpec& weight, double delta) {
  double r = 0.0;
  for (const auto& y : weight.maximizers()) {
    double s = 0.0;
    for (double c : y) s += c * c;
    r = std::max(r, std::sqrt(s));
  }
  if (weight.kind == WeightKind::Plateau) r += weight.plateau.radius;
  return r + delta;
}

inline ConcentrationSweep concentration_sweep(const ModelParameters& params, const TorusGrid& grid,
                                              const WeightSpec& weight, const std::vector<double>& eps_list, double eta,
                                              const SolverOptions& opts, double rho = 0.0) {
  if (!weight.has_maximizer_set()) {
    fail(ErrorCode::Precondition, "concentration sweep rejects constant weights: the maximizer set is the whole space");
  }
  detail::check_eps_list(eps_list);
  weight.validate(params.dim);
  ConcentrationSweep out;
  out.width = weight.width();
  out.rho = rho > 0.0 ? rho : default_rho(weight, out.width);
  SolverOptions o = opts;
  o.barycenter_rho = out.rho;
  for (double eps : eps_list) {
    ConcentrationRecord rec;
    rec.eps = eps;
    rec.k = 1.0 / eps;
    const DualProblem prob = DualProblem::make(params, grid, weight, eps, eta);
    GridField u;
    rec.solve = run_solve(prob, default_seed(prob), o, nullptr, &u);
    if (rec.solve.ok) {
      rec.c_eps = rec.solve.report.energy;
      rec.residual = rec.solve.report.residual;
      rec.barycenter = rec.solve.report.barycenter;
      rec.argmax_u = detail::argmax_point(u, eps);
      rec.dist_to_M = weight.dist_to_maximizers(rec.argmax_u);
      rec.barycenter_dist = weight.dist_to_maximizers(rec.barycenter);
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

// ---- multiplicity --------------------------------------------------------

struct MultiplicitySolution {
  std::size_t seed_index = 0;
  double energy = 0.0;
  std::vector<double> barycenter;
  std::size_t nearest_maximizer = 0;
  double maximizer_distance = 0.0;
  bool within_delta = false;
  bool in_sublevel = false;
  bool converged = false;
  double residual = 0.0;
  double primal_residual = 0.0;
};

struct MultiplicityResult {
  double c0 = 0.0;
  double nu = 0.0;
  double delta = 0.0;
  double rho = 0.0;
  std::size_t maximizer_count = 0;
  SolveRecord limit;
  std::vector<std::string> seed_errors;  // one entry per seed, empty when fine
  std::vector<MultiplicitySolution> distinct;

  /// Distinct solutions sit near distinct maximizers.
  bool distinct_maximizers() const {
    std::vector<std::size_t> seen;
    for (const auto& s : distinct) {
      if (std::find(seen.begin(), seen.end(), s.nearest_maximizer) != seen.end()) return false;
      seen.push_back(s.nearest_maximizer);
    }
    return true;
  }
  double energy_spread() const {
    if (distinct.empty()) return 0.0;
    double lo = distinct[0].energy, hi = lo;
    for (const auto& s : distinct) {
      lo = std::min(lo, s.energy);
      hi = std::max(hi, s.energy);
    }
    return (hi - lo) / std::abs(lo);
  }
};

/// C∞ cutoff: 1 on [0, 1], 0 on [2, ∞).
inline double smooth_cutoff(double t) {
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  auto f = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  const double a = f(2.0 - t);
  return a / (a + f(t - 1.0));
}

/// Seed φ(x) = χ(|εx − y|/r_c)·w(x − y/ε): the limit dual ground state w
/// translated by whole grid steps to y/ε, cut off around the maximizer.
inline GridField cutoff_translate_seed(const GridField& w, const DualProblem& prob, const std::vector<double>& y,
                                       double r_cut) {
  const TorusGrid& g = prob.grid;
  std::vector<int> shift(g.dim());
  for (int d = 0; d < g.dim(); ++d) shift[d] = g.nearest_index(y[d] / prob.eps) - g.points() / 2;
  GridField seed = translate(w, shift);
  std::vector<int> idx(g.dim());
  for (std::size_t i = 0; i < seed.size(); ++i) {
    g.unflatten(i, idx);
    double r2 = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
      const double z = prob.eps * g.axis_coordinate(idx[d]) - y[d];
      r2 += z * z;
    }
    seed[i] *= smooth_cutoff(std::sqrt(r2) / r_cut);
  }
  return seed;
}

/// One seed per global maximizer, multistart, then sublevel and barycenter
/// verdicts.  `nu` ≤ 0 selects 0.1·c0; `delta` ≤ 0 selects the weight width.
inline MultiplicityResult multiplicity_run(const ModelParameters& params, const TorusGrid& grid, const WeightSpec& weight,
                                           double eps, double nu, double delta, double eta, const SolverOptions& opts) {
  if (weight.kind != WeightKind::GaussianBumps) fail(ErrorCode::Precondition, "multiplicity needs a gaussian_bumps weight");
  weight.validate(params.dim);
  if (!(eps > 0.0)) fail(ErrorCode::Precondition, "eps must be positive");
  const auto maxima = weight.maximizers();
  const double width = weight.width();
  double min_sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < maxima.size(); ++i) {
    for (std::size_t j = i + 1; j < maxima.size(); ++j) min_sep = std::min(min_sep, detail::distance(maxima[i], maxima[j]));
  }
  if (maxima.size() > 1 && min_sep < 4.0 * width * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "maximizers are " << min_sep << " apart, need at least 4 bump widths (" << 4.0 * width << ")";
    fail(ErrorCode::Precondition, os.str());
  }

  MultiplicityResult out;
  out.maximizer_count = maxima.size();
  out.delta = delta > 0.0 ? delta : width;
  out.rho = default_rho(weight, out.delta);

  const DualProblem limit = DualProblem::make(params, grid, WeightSpec::constant(weight.sup()), 1.0, eta);
  GridField w;
  out.limit = run_solve(limit, default_seed(limit), opts, &w);
  if (!out.limit.ok) fail(ErrorCode::NonConvergent, "limit problem failed: " + out.limit.error);
  out.c0 = out.limit.report.energy;
  out.nu = nu > 0.0 ? nu : 0.1 * out.c0;

  const DualProblem prob = DualProblem::make(params, grid, weight, eps, eta);
  const double r_cut = (maxima.size() > 1 ? min_sep : 4.0 * width) / 4.0;
  std::vector<GridField> seeds;
  for (const auto& y : maxima) seeds.push_back(cutoff_translate_seed(w, prob, y, r_cut));

  SolverOptions o = opts;
  o.barycenter_rho = out.rho;
  MultistartResult ms = multistart(prob, seeds, o, width);
  for (const auto& oc : ms.outcomes) out.seed_errors.push_back(oc.error);
  for (std::size_t idx : ms.representatives) {
    const auto& oc = ms.outcomes[idx];
    const DualState& st = *oc.state;
    MultiplicitySolution s;
    s.seed_index = oc.seed_index;
    s.energy = st.report.energy;
    s.barycenter = st.report.barycenter;
    s.converged = st.report.converged;
    s.residual = st.report.residual;
    s.primal_residual = primal_residual(reconstruct_u(st.v, prob), prob);
    s.maximizer_distance = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < maxima.size(); ++m) {
      const double dist = detail::distance(s.barycenter, maxima[m]);
      if (dist < s.maximizer_distance) {
        s.maximizer_distance = dist;
        s.nearest_maximizer = m;
      }
    }
    s.within_delta = s.maximizer_distance <= out.delta;
    s.in_sublevel = s.energy <= out.c0 + out.nu;
    out.distinct.push_back(std::move(s));
  }
  return out;
}

// ---- off-diagonal interaction ----------------------------------------------

struct OffDiagRecord {
  double r = 0.0;
  double interaction = 0.0;
  double bound_rate = 0.0;
};

struct OffDiagResult {
  std::vector<OffDiagRecord> records;
  double slope = 0.0;
  double intercept = 0.0;
  double lambda_p = 0.0;
  double tolerance = 0.1;
  double support_radius = 1.0;
  double eta = 0.0;

  bool pass() const { return slope <= -lambda_p + tolerance; }
  /// Interaction never increases when r grows (reported only).
  bool monotone() const {
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (records[i].interaction > records[i - 1].interaction) return false;
    }
    return true;
  }
};

inline double offdiag_rate(int dim, double p) { return 0.5 * (dim - 1.0) - (dim + 1.0) / p; }

/// Radial C∞ bump exp(−1/(1 − |x − c|²/R²)) with unit p'-norm.
inline GridField compact_bump(const TorusGrid& grid, const std::vector<double>& center, double radius, double p_conj) {
  GridField f = GridField::from_function(grid, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (int d = 0; d < grid.dim(); ++d) r2 += (x[d] - center[d]) * (x[d] - center[d]);
    const double s = r2 / (radius * radius);
    return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
  });
  const double nrm = lq_norm(f, p_conj);
  if (!(nrm > 0.0)) fail(ErrorCode::Precondition, "bump radius below grid resolution");
  for (double& x : f.values) x /= nrm;
  return f;
}

/// |⟨u, 𝓡 v⟩| for u supported in B_R(0) and v supported in B_R(c), |c| = 2R + r,
/// so the supports are r apart and v vanishes inside B_{R+r}.
inline OffDiagResult offdiag_probe(const ModelParameters& params, const TorusGrid& grid, const std::vector<double>& r_list,
                                   double eta, double support_radius = 1.0) {
  if (r_list.size() < 2) fail(ErrorCode::FitFailure, "need at least two separations");
  if (!(eta > 0.0)) fail(ErrorCode::Precondition, "the complex resolvent probe needs eta > 0");
  const double r_max = grid.side() / 4.0;
  for (std::size_t i = 0; i < r_list.size(); ++i) {
    const double r = r_list[i];
    if (!(r >= 1.0) || r > r_max * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "separation r=" << r << " outside [1, L/4] = [1, " << r_max << "]; supports overlap or wrap";
      fail(ErrorCode::Precondition, os.str());
    }
    if (i > 0 && !(r > r_list[i - 1])) fail(ErrorCode::Precondition, "separations must increase");
  }
  const double pc = params.p_conj();
  const SpectralMultiplier re = build_multiplier(params.roots, grid, eta);
  const SpectralMultiplier im = build_imag_multiplier(params.roots, grid, eta);
  const std::vector<double> origin(grid.dim(), 0.0);
  const GridField u = compact_bump(grid, origin, support_radius, pc);

  OffDiagResult out;
  out.lambda_p = offdiag_rate(params.dim, params.p);
  out.support_radius = support_radius;
  out.eta = eta;
  std::vector<double> lx, ly;
  for (double r : r_list) {
    std::vector<double> c(grid.dim(), 0.0);
    c[0] = 2.0 * support_radius + r;
    const GridField v = compact_bump(grid, c, support_radius, pc);
    const double val = std::abs(complex_pairing(u, v, re, im));
    out.records.push_back({r, val, out.lambda_p});
    if (!(val > 0.0)) fail(ErrorCode::FitFailure, "interaction vanished");
    lx.push_back(std::log(r));
    ly.push_back(std::log(val));
  }
  const LineFit fit = fit_line(lx, ly);
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  return out;
}

}  // namespace nlh
