// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "nlh/nlh.hpp"

using namespace nlh;

namespace {

constexpr double kEta = 0.03;

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("error: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!v.pass) ++failures;
  std::printf("criterion %2d %-28s %s  %s  [%.1f s]\n", id, name, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
  std::fflush(stdout);
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

GridField random_field(const TorusGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  GridField f(g);
  for (double& x : f.values) x = n(rng);
  return f;
}

double rel_l2(const GridField& a, const GridField& b) {
  GridField d(a.grid);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  return lq_norm(d, 2.0) / lq_norm(b, 2.0);
}

const ModelParameters& model3() {
  static const ModelParameters m = ModelParameters::make(3, -1.0, 0.0, 5.0);
  return m;
}

/// Default desk-scale grid: 64³ points at spacing ≈ 0.75/√a1 on a side that avoids the shells.
TorusGrid default_grid() {
  const double a1 = model3().roots.a1;
  return TorusGrid(3, 64, admissible_side(a1, 64 * 0.75 / std::sqrt(a1)));
}

SolverOptions quiet() {
  SolverOptions o;
  o.record_trace = false;
  return o;
}

WeightSpec single_bump() { return WeightSpec::gaussian(0.3, {Bump{{0.3, -0.2, 0.1}, 0.7, 1.0}}); }

WeightSpec twin_bumps() {
  return WeightSpec::gaussian(0.3, {Bump{{-1.5, 0.0, 0.0}, 0.7, 0.75}, Bump{{1.5, 0.0, 0.0}, 0.7, 0.75}});
}

/// Primal residuals of every converged ground state from criteria 7–10.
std::vector<std::pair<std::string, double>> residuals;

void record_residual(const std::string& what, const SolveRecord& r) {
  if (r.ok && r.report.converged) residuals.emplace_back(what, r.primal_residual);
}

}  // namespace

int main() {
  std::printf("nlh %s acceptance\n", std::string(kVersion).c_str());

  criterion(1, "root/symbol identities", [] {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-5.0, 5.0), pos(1e-3, 10.0);
    double worst_root = 0.0, worst_sym = 0.0;
    for (int i = 0; i < 10000; ++i) {
      double alpha, beta;
      switch (i % 3) {
        case 0: alpha = -pos(rng); beta = u(rng); break;
        case 1: alpha = pos(rng); beta = -2.0 * std::sqrt(alpha) - pos(rng); break;
        default: alpha = 0.0; beta = -pos(rng); break;
      }
      const auto r = compute_roots(alpha, beta);
      const double s = std::max({1.0, std::abs(beta), std::abs(alpha)});
      worst_root = std::max({worst_root, std::abs(r.a1 + r.a2 + beta) / s, std::abs(r.a1 * r.a2 - alpha) / s});
      if (i % 100 == 0) {
        const TorusGrid g(2, 32, admissible_side(r.a1, 24.0 / std::sqrt(r.a1)));
        if (!grid_is_admissible(r, g)) continue;
        const auto m = build_multiplier(r, g, 0.0);
        const auto fs = g.freq_sq();
        for (std::size_t k = 0; k < fs.size(); ++k) {
          worst_sym = std::max(worst_sym, std::abs(m.values[k] * (fs[k] * fs[k] + beta * fs[k] + alpha) - 1.0));
        }
      }
    }
    return Verdict{worst_root < 1e-10 && worst_sym < 1e-10, fmt("max root err %.2e, max |m*sym-1| %.2e", worst_root, worst_sym)};
  });

  criterion(2, "L(R v) = v", [] {
    std::mt19937_64 rng(7);
    const FactorRoots roots = model3().roots;
    double worst = 0.0;
    for (auto [dim, n] : {std::pair{2, 128}, {3, 64}}) {
      const TorusGrid g(dim, n, admissible_side(roots.a1, n * 0.75));
      const auto m = build_multiplier(roots, g, 0.0);
      for (int t = 0; t < 20; ++t) {
        const GridField v = random_field(g, rng);
        worst = std::max(worst, rel_l2(apply_L(apply_R(v, m), roots, g), v));
      }
    }
    return Verdict{worst < 1e-10, fmt("max rel err %.2e over 40 fields", worst)};
  });

  criterion(3, "kernel decay", [] {
    bool ok = true;
    std::ostringstream os;
    for (int n : {2, 3, 5}) {
      const auto rep = verify_kernel_bounds({1.0, -1.0, 2.0}, n, 0.1);
      ok = ok && rep.pass();
      os << "N=" << n << " outer " << fmt("%.3f", rep.outer_fitted) << "/" << rep.outer_expected << " inner "
         << fmt("%.3f", rep.inner_fitted) << "/" << rep.inner_expected << "; ";
    }
    return Verdict{ok, os.str()};
  });

  criterion(4, "resolvent symmetry", [] {
    std::mt19937_64 rng(11);
    const TorusGrid g = default_grid();
    const auto m = build_multiplier(model3().roots, g, kEta);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const GridField u = random_field(g, rng), v = random_field(g, rng);
      const double d = std::abs(inner(u, apply_R(v, m)) - inner(v, apply_R(u, m)));
      worst = std::max(worst, d / (lq_norm(u, 2.0) * lq_norm(v, 2.0)));
    }
    return Verdict{worst < 1e-12, fmt("max normalized asymmetry %.2e over 100 pairs", worst)};
  });

  criterion(5, "dual gradient vs FD", [] {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> mag(0.5, 1.5);
    std::bernoulli_distribution sign(0.5);
    const TorusGrid g(3, 16, admissible_side(1.0, 12.0));
    const DualProblem prob = DualProblem::make(model3(), g, single_bump(), 0.5, kEta);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      GridField v(g);
      for (double& x : v.values) x = sign(rng) ? mag(rng) : -mag(rng);
      const GridField h = random_field(g, rng);
      const double s = 1e-6;
      GridField vp = v, vm = v;
      for (std::size_t i = 0; i < v.size(); ++i) {
        vp[i] += s * h[i];
        vm[i] -= s * h[i];
      }
      const double fd = (energy(vp, prob) - energy(vm, prob)) / (2.0 * s);
      const double an = inner(gradient(v, prob), h);
      worst = std::max(worst, std::abs(fd - an) / std::abs(an));
    }
    return Verdict{worst < 1e-5, fmt("max rel err %.2e over 20 fields", worst)};
  });

  criterion(6, "Nehari contract", [] {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> pos(-4.0, 4.0), wid(0.3, 1.5), amp(0.2, 1.0);
    const TorusGrid g(3, 32, admissible_side(1.0, 24.0));
    const DualProblem prob = DualProblem::make(model3(), g, single_bump(), 0.5, kEta);
    std::bernoulli_distribution sign(0.5);
    // Random signed bumps; W^{1/p} v is projected onto the frequencies where the
    // multiplier is positive, so Q(v) > 0.
    std::vector<double> keep(prob.mult.values.size());
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = prob.mult.values[i] > 0.0 ? 1.0 : 0.0;
    double worst_stat = 0.0, worst_scan = 0.0;
    int accepted = 0;
    for (int attempt = 0; attempt < 200 && accepted < 20; ++attempt) {
      GridField v(g);
      for (int b = 0; b < 3; ++b) {
        const double cx = pos(rng), cy = pos(rng), cz = pos(rng), s = wid(rng);
        const double a = sign(rng) ? amp(rng) : -amp(rng);
        const GridField f = GridField::from_function(g, [&](std::span<const double> x) {
          const double r2 = (x[0] - cx) * (x[0] - cx) + (x[1] - cy) * (x[1] - cy) + (x[2] - cz) * (x[2] - cz);
          return a * std::exp(-r2 / (2.0 * s * s));
        });
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += prob.w_pow[i] * f[i];
      }
      v = apply_symbol(v, keep);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] /= prob.w_pow[i];
      const double q = quad_form(v, prob);
      if (!in_u_plus(q, lq_norm_pow(v, 2.0))) continue;
      ++accepted;
      const double nv = lq_norm(v, 2.0);
      for (double& x : v.values) x /= nv;
      const double tv = nehari_scale(v, prob);
      GridField tvv = v;
      for (double& x : tvv.values) x *= tv;
      worst_stat = std::max(worst_stat, std::abs(inner(gradient(tvv, prob), v)));
      // Golden-section scan of t ↦ J(tv) on [0, 4 t_v].
      auto j = [&](double t) {
        GridField w = v;
        for (double& x : w.values) x *= t;
        return energy(w, prob);
      };
      double lo = 0.0, hi = 4.0 * tv;
      const double r = 0.5 * (std::sqrt(5.0) - 1.0);
      while (hi - lo > 1e-8 * tv) {
        const double a = hi - r * (hi - lo), b = lo + r * (hi - lo);
        if (j(a) > j(b)) {
          hi = b;
        } else {
          lo = a;
        }
      }
      worst_scan = std::max(worst_scan, std::abs(0.5 * (lo + hi) - tv) / tv);
    }
    return Verdict{accepted == 20 && worst_stat < 1e-8 && worst_scan < 1e-6,
                   fmt("%d fields, max |<g(t_v v), v>|/|v| %.2e, max scan offset %.2e", accepted, worst_stat, worst_scan)};
  });

  criterion(7, "limit scaling law", [] {
    const TorusGrid g = default_grid();
    const LimitSolution s1 = solve_limit_problem(model3(), g, 1.0, kEta, quiet());
    const LimitSolution s2 = solve_limit_problem(model3(), g, 2.0, kEta, quiet());
    for (const auto* s : {&s1, &s2}) {
      SolveRecord r;
      r.ok = true;
      r.report = s->state.report;
      r.primal_residual = primal_residual(reconstruct_u(s->state.v, s->prob), s->prob);
      record_residual(fmt("limit W0=%g", s->prob.spec.level), r);
    }
    const double ratio = s2.c0 / s1.c0;
    const double want = std::pow(2.0, -2.0 / (model3().p - 2.0));
    const bool conv = s1.state.report.converged && s2.state.report.converged;
    return Verdict{conv && std::abs(ratio / want - 1.0) < 0.01,
                   fmt("c0(1)=%.6g c0(2)=%.6g ratio %.6f vs %.6f", s1.c0, s2.c0, ratio, want)};
  });

  criterion(8, "energy comparison", [] {
    const auto cmp = energy_comparison(model3(), default_grid(), single_bump(), {0.25, 0.125, 0.0625}, kEta, quiet());
    record_residual("comparison limit", cmp.limit);
    std::ostringstream os;
    os << fmt("c0=%.6g", cmp.c0);
    for (const auto& r : cmp.rows) {
      record_residual(fmt("comparison eps=%g", r.eps), r.solve);
      os << fmt(" | eps=%g gap %.3e", r.eps, r.relative_gap);
    }
    const bool shrinking = cmp.rows.back().gap < cmp.rows.front().gap;
    return Verdict{cmp.all_converged() && cmp.all_above() && shrinking, os.str()};
  });

  criterion(9, "concentration", [] {
    const auto sw = concentration_sweep(model3(), default_grid(), single_bump(), {0.25, 0.125, 0.0625}, kEta, quiet());
    std::ostringstream os;
    for (const auto& r : sw.records) {
      record_residual(fmt("concentration eps=%g", r.eps), r.solve);
      os << fmt("eps=%g dist %.4f; ", r.eps, r.dist_to_M);
    }
    const auto& first = sw.records.front();
    const auto& last = sw.records.back();
    const bool ok = sw.all_converged() && last.dist_to_M < sw.width / 4.0 && last.dist_to_M < first.dist_to_M;
    os << fmt("width/4 = %.3f", sw.width / 4.0);
    return Verdict{ok, os.str()};
  });

  criterion(10, "multiplicity", [] {
    const auto res = multiplicity_run(model3(), default_grid(), twin_bumps(), 0.125, 0.0, 0.0, kEta, quiet());
    record_residual("multiplicity limit", res.limit);
    bool ok = res.distinct.size() == 2 && res.distinct_maximizers() && res.energy_spread() <= 1e-3;
    std::ostringstream os;
    os << "distinct " << res.distinct.size() << fmt(", spread %.2e, c0=%.6g", res.energy_spread(), res.c0);
    for (const auto& s : res.distinct) {
      ok = ok && s.converged && s.in_sublevel && s.within_delta;
      if (s.converged) residuals.emplace_back(fmt("multiplicity seed %zu", s.seed_index), s.primal_residual);
      os << fmt(" | E/c0 %.4f dist %.3f", s.energy / res.c0, s.maximizer_distance);
    }
    return Verdict{ok, os.str()};
  });

  criterion(11, "off-diagonal rate", [] {
    const TorusGrid g = default_grid();
    const auto rs = log_spaced(2.0, g.side() / 4.0, 8);
    const auto res = offdiag_probe(model3(), g, rs, kEta);
    return Verdict{res.pass(), fmt("slope %.3f vs bound %.3f (monotone: %s)", res.slope, -res.lambda_p + res.tolerance,
                                   res.monotone() ? "yes" : "no")};
  });

  criterion(12, "primal residual", [] {
    const double bound = 10.0 * SolverOptions{}.tol;
    double worst = 0.0;
    std::string where = "none";
    for (const auto& [what, r] : residuals) {
      if (!(r <= worst)) {
        worst = r;
        where = what;
      }
    }
    return Verdict{!residuals.empty() && worst < bound,
                   fmt("%zu states, max %.2e (%s) vs %.1e", residuals.size(), worst, where.c_str(), bound)};
  });

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
