#pragma once

// Driver dispatch for one configured run: computes, writes artifacts, and
// maps the outcome to an exit status (0 ok, 1 failed check or error, 2 a
// solve did not converge).

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "nlh/config.hpp"
#include "nlh/experiments.hpp"
#include "nlh/kernels.hpp"
#include "nlh/report.hpp"
#include "nlh/solver.hpp"
#include "nlh/version.hpp"

namespace nlh {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNonConvergent = 2;

struct RunOutcome {
  int exit_code = kExitOk;
  bool converged = true;
  bool checks_passed = true;
  std::vector<std::string> files;
  std::vector<std::string> failed_checks;
};

namespace detail {

class RunWriter {
 public:
  explicit RunWriter(const RunConfig& c) : cfg_(c) {
    std::error_code ec;
    std::filesystem::create_directories(c.out_dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create output directory " + c.out_dir + ": " + ec.message());
    summary_["version"] = std::string(kVersion);
    summary_["mode"] = to_string(c.mode);
    summary_["label"] = c.label;
    summary_["config"] = config_to_yaml(c);
    summary_["derived"] = derived_to_yaml(c);
  }

  std::string path(const std::string& suffix) const {
    return (std::filesystem::path(cfg_.out_dir) / (cfg_.label + "_" + suffix)).string();
  }

  void csv(const std::string& suffix, const CsvTable& t) {
    if (!cfg_.write_csv) return;
    std::ostringstream os;
    t.write(os);
    const auto p = path(suffix);
    write_text_file(p, os.str());
    outcome.files.push_back(p);
  }

  void yaml(const std::string& suffix, const YAML::Node& n) {
    if (!cfg_.write_summary) return;
    const auto p = path(suffix);
    write_text_file(p, emit_yaml(n));
    outcome.files.push_back(p);
  }

  void field(const std::string& suffix, const GridField& f) {
    if (!cfg_.write_binary) return;
    const auto p = path(suffix);
    write_field_binary(p, f);
    outcome.files.push_back(p);
  }

  /// Asserted check: failing it makes the run exit non-zero.
  void check(const std::string& name, bool ok) {
    summary_["checks"][name] = ok;
    if (!ok) {
      outcome.checks_passed = false;
      outcome.failed_checks.push_back(name);
    }
  }
  /// Reported only.
  void note(const std::string& name, bool ok) { summary_["reported"][name] = ok; }
  void converged(bool ok) {
    if (!ok) outcome.converged = false;
  }

  YAML::Node& results() { return results_; }

  RunOutcome finish() {
    summary_["results"] = results_;
    summary_["status"] = !outcome.converged ? "nonconvergent" : (outcome.checks_passed ? "ok" : "check_failed");
    yaml("summary.yaml", summary_);
    outcome.exit_code = !outcome.converged ? kExitNonConvergent : (outcome.checks_passed ? kExitOk : kExitError);
    return outcome;
  }

  RunOutcome outcome;

 private:
  const RunConfig& cfg_;
  YAML::Node summary_;
  YAML::Node results_;
};

inline std::vector<std::string> axis_names(const std::string& prefix, int dim) {
  std::vector<std::string> out;
  for (int d = 0; d < dim; ++d) out.push_back(prefix + std::to_string(d));
  return out;
}

inline std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

/// Nehari identity and the closed-form on-manifold energy at the final iterate.
inline void manifold_checks(RunWriter& w, const GridField& v, const DualProblem& prob, const SolveReport& rep) {
  const double q = prob.p_conj();
  const double norm = lq_norm_pow(v, q);
  const double form = quad_form(v, prob);
  const double direct = energy(v, prob);
  const double closed = (1.0 / q - 0.5) * norm;
  w.results()["nehari_defect"] = std::abs(norm - form) / norm;
  w.results()["energy_formula_defect"] = std::abs(direct - closed) / std::abs(closed);
  if (rep.converged) {
    w.check("nehari_identity", std::abs(norm - form) <= 1e-8 * norm);
    w.check("on_manifold_energy", std::abs(direct - closed) <= 1e-10 * std::abs(closed));
  }
}

inline int solve_like(const RunConfig& c, RunWriter& w, bool limit) {
  const TorusGrid grid = c.make_grid();
  const WeightSpec weight = limit ? WeightSpec::constant(c.weight.sup()) : c.weight;
  const double eps = limit ? 1.0 : c.eps;
  const DualProblem prob = DualProblem::make(c.params, grid, weight, eps, c.eta);
  SolverOptions opts = c.solver_options();
  if (weight.has_maximizer_set()) opts.barycenter_rho = c.rho > 0.0 ? c.rho : default_rho(weight, weight.width());
  std::vector<double> center(c.dim, 0.0);
  if (c.seed_center) {
    center = *c.seed_center;
  } else if (weight.has_maximizer_set()) {
    center = weight.maximizers().front();
  }
  const GridField seed = seed_at(prob, center, c.seed_width);
  const DualState st = minimize_nehari(prob, seed, opts);
  const GridField u = reconstruct_u(st.v, prob);
  const double primal = primal_residual(u, prob);

  YAML::Node rep = report_to_yaml(st.report);
  rep["primal_residual"] = primal;
  rep["eps"] = eps;
  if (limit) rep["W0"] = weight.sup();
  w.yaml("report.yaml", rep);
  w.field("field.bin", st.v);
  w.field("u.bin", u);

  CsvTable t({"iteration", "energy", "residual"});
  for (std::size_t i = 0; i < st.report.trace.size(); ++i) {
    t.add(i).add(st.report.trace[i].energy).add(st.report.trace[i].residual).end_row();
  }
  w.csv("trace.csv", t);

  w.results()[limit ? "c0" : "c_eps"] = st.report.energy;
  w.results()["residual"] = st.report.residual;
  w.results()["iterations"] = st.report.iterations;
  w.results()["converged"] = st.report.converged;
  w.results()["primal_residual"] = primal;
  w.results()["barycenter"] = flow(st.report.barycenter);
  manifold_checks(w, st.v, prob, st.report);
  w.note("primal_residual_below_10tol", primal < 10.0 * c.tol);
  w.converged(st.report.converged);
  return 0;
}

inline void energy_comparison_run(const RunConfig& c, RunWriter& w) {
  const EnergyComparison ec = energy_comparison(c.params, c.make_grid(), c.weight, c.eps_list, c.eta, c.solver_options());
  CsvTable t({"eps", "k", "c_eps", "c0", "gap", "relative_gap", "converged", "residual", "primal_residual", "iterations", "error"});
  for (const auto& r : ec.rows) {
    t.add(r.eps).add(1.0 / r.eps).add(r.c_eps).add(ec.c0).add(r.gap).add(r.relative_gap).add(r.solve.report.converged)
        .add(r.solve.report.residual).add(r.solve.primal_residual).add(r.solve.report.iterations).add(r.solve.error.empty() ? "" : "failed")
        .end_row();
    w.converged(r.solve.ok && r.solve.report.converged);
  }
  w.csv("energy_comparison.csv", t);
  w.results()["c0"] = ec.c0;
  w.results()["W0"] = ec.w0;
  w.results()["limit_primal_residual"] = ec.limit.primal_residual;
  for (const auto& r : ec.rows) {
    if (!r.solve.error.empty()) w.results()["errors"].push_back(r.solve.error);
  }
  w.converged(ec.limit.report.converged);
  w.check("gap_above_minus_1e-3_c0", ec.all_above());
  w.note("gaps_decrease", ec.gaps_monotone());
}

inline void concentration_run(const RunConfig& c, RunWriter& w) {
  const ConcentrationSweep cs =
      concentration_sweep(c.params, c.make_grid(), c.weight, c.eps_list, c.eta, c.solver_options(), c.rho);
  CsvTable t(concat(concat(concat({"eps", "k", "c_eps"}, axis_names("barycenter_", c.dim)), axis_names("argmax_", c.dim)),
                    {"dist_to_M", "barycenter_dist", "residual", "primal_residual", "converged", "iterations"}));
  for (const auto& r : cs.records) {
    t.add(r.eps).add(r.k).add(r.c_eps);
    for (int d = 0; d < c.dim; ++d) t.add(r.solve.ok ? r.barycenter[d] : NAN);
    for (int d = 0; d < c.dim; ++d) t.add(r.solve.ok ? r.argmax_u[d] : NAN);
    t.add(r.dist_to_M).add(r.barycenter_dist).add(r.residual).add(r.solve.primal_residual).add(r.solve.report.converged)
        .add(r.solve.report.iterations).end_row();
    w.converged(r.solve.ok && r.solve.report.converged);
    if (!r.solve.error.empty()) w.results()["errors"].push_back(r.solve.error);
  }
  w.csv("concentration.csv", t);
  w.results()["width"] = cs.width;
  w.results()["rho"] = cs.rho;
  const auto& recs = cs.records;
  w.check("final_dist_below_width_over_4", cs.final_within(0.25));
  if (recs.size() > 1) w.check("final_dist_below_first", recs.back().dist_to_M < recs.front().dist_to_M || recs.back().dist_to_M == 0.0);
  w.note("dist_non_increasing", cs.dist_non_increasing());
}

inline void multiplicity_run_driver(const RunConfig& c, RunWriter& w) {
  const MultiplicityResult m =
      multiplicity_run(c.params, c.make_grid(), c.weight, c.eps, c.nu, c.delta, c.eta, c.solver_options());
  CsvTable t(concat(concat({"solution", "seed", "energy", "energy_over_c0"}, axis_names("barycenter_", c.dim)),
                    {"nearest_maximizer", "maximizer_distance", "within_delta", "in_sublevel", "converged", "residual",
                     "primal_residual"}));
  bool all_delta = true, all_sub = true;
  for (std::size_t i = 0; i < m.distinct.size(); ++i) {
    const auto& s = m.distinct[i];
    t.add(i).add(s.seed_index).add(s.energy).add(s.energy / m.c0);
    for (double x : s.barycenter) t.add(x);
    t.add(s.nearest_maximizer).add(s.maximizer_distance).add(s.within_delta).add(s.in_sublevel).add(s.converged)
        .add(s.residual).add(s.primal_residual).end_row();
    all_delta = all_delta && s.within_delta;
    all_sub = all_sub && s.in_sublevel;
    w.converged(s.converged);
  }
  w.csv("multiplicity.csv", t);
  w.results()["c0"] = m.c0;
  w.results()["nu"] = m.nu;
  w.results()["delta"] = m.delta;
  w.results()["rho"] = m.rho;
  w.results()["maximizers"] = m.maximizer_count;
  w.results()["distinct_solutions"] = m.distinct.size();
  w.results()["energy_spread"] = m.energy_spread();
  w.results()["sublevel_note"] = "sublevel verdicts use the discrete c0 of this grid in place of the continuum value";
  for (const auto& e : m.seed_errors) {
    if (!e.empty()) w.results()["errors"].push_back(e);
  }
  w.converged(m.limit.report.converged);
  w.check("distinct_count_equals_maximizers", m.distinct.size() == m.maximizer_count);
  w.check("all_in_sublevel", all_sub);
  w.check("barycenters_within_delta", all_delta);
  w.check("distinct_maximizers", m.distinct_maximizers());
  w.check("energy_spread_below_1e-3", m.energy_spread() <= 1e-3);
}

inline void offdiag_run(const RunConfig& c, RunWriter& w) {
  const OffDiagResult r = offdiag_probe(c.params, c.make_grid(), c.r_list, c.eta, c.support_radius);
  CsvTable t({"r", "interaction", "bound_rate"});
  for (const auto& rec : r.records) t.add(rec.r).add(rec.interaction).add(rec.bound_rate).end_row();
  w.csv("offdiag.csv", t);
  w.results()["slope"] = r.slope;
  w.results()["intercept"] = r.intercept;
  w.results()["lambda_p"] = r.lambda_p;
  w.results()["tolerance"] = r.tolerance;
  w.check("slope_at_most_minus_lambda_plus_tol", r.pass());
  w.note("interaction_monotone", r.monotone());
}

inline void kernel_bounds_run(const RunConfig& c, RunWriter& w) {
  const KernelBoundReport rep = verify_kernel_bounds(c.params.roots, c.dim, c.kernel_tolerance);
  if (c.write_csv) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    write_kernel_bounds_csv(os, rep);
    const auto p = w.path("kernel_bounds.csv");
    write_text_file(p, os.str());
    w.outcome.files.push_back(p);
  }
  w.results()["inner_model"] = to_string(rep.inner_model);
  w.results()["inner_expected"] = rep.inner_expected;
  w.results()["inner_fitted"] = rep.inner_fitted;
  w.results()["outer_expected"] = rep.outer_expected;
  w.results()["outer_fitted"] = rep.outer_fitted;
  w.check("inner_exponent", rep.inner_pass);
  w.check("outer_exponent", rep.outer_pass);
}

}  // namespace detail

/// Executes the configured driver and writes its artifacts.  Library errors
/// propagate as nlh::Error (exit status 1 at the CLI).
inline RunOutcome run(const RunConfig& c) {
  detail::RunWriter w(c);
  switch (c.mode) {
    case Mode::Solve: detail::solve_like(c, w, false); break;
    case Mode::Limit: detail::solve_like(c, w, true); break;
    case Mode::EnergyComparison: detail::energy_comparison_run(c, w); break;
    case Mode::Concentration: detail::concentration_run(c, w); break;
    case Mode::Multiplicity: detail::multiplicity_run_driver(c, w); break;
    case Mode::Offdiag: detail::offdiag_run(c, w); break;
    case Mode::KernelBounds: detail::kernel_bounds_run(c, w); break;
  }
  return w.finish();
}

}  // namespace nlh
