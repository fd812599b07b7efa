#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlh/dual.hpp"

using namespace nlh;

namespace {
constexpr double kPi = std::numbers::pi;

DualProblem small_problem(const WeightSpec& w, double eps = 1.0, double eta = 0.1) {
  const auto params = ModelParameters::make(2, -1.0, 0.0, 7.0);
  TorusGrid g(2, 32, 2.0 * kPi * std::sqrt(6.5));
  return DualProblem::make(params, g, w, eps, eta);
}

GridField bump(const TorusGrid& g, double sigma, double cx = 0.0) {
  return GridField::from_function(g, [&](std::span<const double> x) {
    double r2 = (x[0] - cx) * (x[0] - cx);
    for (int d = 1; d < g.dim(); ++d) r2 += x[d] * x[d];
    return std::exp(-r2 / (2.0 * sigma * sigma));
  });
}

GridField random_field(const TorusGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  GridField f(g);
  for (double& x : f.values) x = n(rng);
  return f;
}

/// A narrow bump filtered to the frequencies where the multiplier is positive.
GridField positive_form_field(const DualProblem& prob) {
  std::vector<double> keep(prob.mult.values.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = prob.mult.values[i] > 0.0 ? 1.0 : 0.0;
  GridField w = apply_symbol(bump(prob.grid, 0.5), keep);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] /= prob.w_pow[i];
  return w;
}

WeightSpec one_bump() { return WeightSpec::gaussian(0.4, {Bump{{0.5, 0.0}, 0.6, 1.2}}); }
}  // namespace

TEST(Dual, SignedPowerAndDualityMap) {
  EXPECT_EQ(signed_pow(0.0, 0.25), 0.0);
  EXPECT_DOUBLE_EQ(signed_pow(-16.0, 0.25), -2.0);
  std::mt19937_64 rng(4);
  TorusGrid g(1, 64, 5.0);
  const GridField a = random_field(g, rng);
  const GridField b = random_field(g, rng);
  for (double q : {1.25, 1.2, 1.5}) {
    // Monotone: ⟨j(a) − j(b), a − b⟩ ≥ 0.
    const GridField ja = duality_map(a, q), jb = duality_map(b, q);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (ja[i] - jb[i]) * (a[i] - b[i]);
    EXPECT_GE(s, 0.0);
    EXPECT_NEAR(inner(a, ja), lq_norm_pow(a, q), 1e-12 * lq_norm_pow(a, q));
  }
}

TEST(Dual, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  const DualProblem prob = small_problem(one_bump());
  // Kept away from zero, where |v|^{p'} is not smooth enough for differencing.
  GridField v = bump(prob.grid, 1.0);
  for (double& x : v.values) x += 0.1;
  const GridField g = gradient(v, prob);
  for (int t = 0; t < 5; ++t) {
    const GridField h = random_field(prob.grid, rng);
    const double s = 1e-6;
    GridField vp = v, vm = v;
    for (std::size_t i = 0; i < v.size(); ++i) {
      vp[i] += s * h[i];
      vm[i] -= s * h[i];
    }
    const double fd = (energy(vp, prob) - energy(vm, prob)) / (2.0 * s);
    const double an = inner(g, h);
    EXPECT_NEAR(fd, an, 1e-5 * std::max(1.0, std::abs(an)));
  }
}

TEST(Dual, EvaluateAgreesWithSeparateCalls) {
  const DualProblem prob = small_problem(one_bump());
  const GridField v = positive_form_field(prob);
  const auto e = evaluate(v, prob);
  EXPECT_NEAR(e.energy, energy(v, prob), 1e-12 * std::abs(e.energy));
  EXPECT_NEAR(e.q, quad_form(v, prob), 1e-12 * std::abs(e.q));
}

TEST(Dual, NehariScaleWorkedValues) {
  EXPECT_NEAR(nehari_scale_from(2.0, 1.0, 1.25), std::pow(2.0, 4.0 / 3.0), 1e-14);
  EXPECT_NEAR(nehari_scale_from(1.0, 1.0, 1.25), 1.0, 1e-15);
  // At t = 1 the Nehari energy is (1/p' − 1/2)‖v‖^{p'}.
  EXPECT_NEAR(nehari_energy_from(3.0, 3.0, 1.25), 0.3 * 3.0, 1e-14);
}

TEST(Dual, NehariScaleMaximizesAlongTheRay) {
  const DualProblem prob = small_problem(one_bump());
  const GridField v = positive_form_field(prob);
  const double tv = nehari_scale(v, prob);
  auto j_at = [&](double t) {
    GridField w = v;
    for (double& x : w.values) x *= t;
    return energy(w, prob);
  };
  const double best = j_at(tv);
  EXPECT_NEAR(best, nehari_energy(v, prob), 1e-10 * std::abs(best));
  for (double f = 0.2; f < 3.0; f += 0.05) {
    if (std::abs(f - 1.0) < 1e-9) continue;
    EXPECT_LT(j_at(f * tv), best) << f;
  }
  // Homogeneity: ray quantities do not depend on the representative.
  GridField v2 = v;
  for (double& x : v2.values) x *= 3.7;
  EXPECT_NEAR(nehari_energy(v2, prob), best, 1e-10 * best);
  EXPECT_NEAR(nehari_scale(v2, prob) * 3.7, tv, 1e-10 * tv);
}

TEST(Dual, EnergyScalingOnTheRay) {
  const DualProblem prob = small_problem(one_bump());
  const GridField v = positive_form_field(prob);
  const double q = prob.p_conj();
  const double n0 = lq_norm_pow(v, q), q0 = quad_form(v, prob);
  for (double t : {0.5, 2.0, 5.0}) {
    GridField w = v;
    for (double& x : w.values) x *= t;
    const double want = std::pow(t, q) * n0 / q - 0.5 * t * t * q0;
    EXPECT_NEAR(energy(w, prob), want, 1e-11 * std::max(1.0, std::abs(want)));
  }
}

TEST(Dual, NegativeFormOnLowModeIsRejected) {
  const DualProblem prob = small_problem(WeightSpec::constant(1.0), 1.0, 0.0);
  // |ξ|² = 1/6.5 < 1: the multiplier is negative there.
  const GridField v = GridField::from_function(prob.grid, [&](std::span<const double> x) {
    return std::cos(2.0 * kPi / prob.grid.side() * x[0]);
  });
  EXPECT_LT(quad_form(v, prob), 0.0);
  try {
    nehari_scale(v, prob);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotInUPlus);
  }
  EXPECT_THROW(nehari_energy(GridField(prob.grid), prob), Error);
}

TEST(Dual, LargerWeightLowersTheNehariEnergy) {
  const DualProblem lo = small_problem(WeightSpec::constant(1.0));
  const DualProblem hi = small_problem(WeightSpec::constant(2.0));
  const GridField v = positive_form_field(lo);
  EXPECT_LT(nehari_energy(v, hi), nehari_energy(v, lo));
  // Constant weight: the form scales as W^{2/p}.
  EXPECT_NEAR(quad_form(v, hi) / quad_form(v, lo), std::pow(2.0, 2.0 / 7.0), 1e-12);
}

TEST(Dual, WeightIsSampledAtScaledPoints) {
  const WeightSpec w = one_bump();
  const DualProblem prob = small_problem(w, 0.25);
  const auto idx = prob.grid.flatten(std::vector<int>{prob.grid.nearest_index(2.0), prob.grid.nearest_index(0.0)});
  const std::vector<double> y{0.25 * prob.grid.axis_coordinate(prob.grid.nearest_index(2.0)), 0.0};
  EXPECT_DOUBLE_EQ(prob.weight[idx], w(y));
  EXPECT_DOUBLE_EQ(prob.w_pow[idx], std::pow(w(y), 1.0 / 7.0));
}

TEST(Dual, ProblemPreconditions) {
  const auto params = ModelParameters::make(3, -1.0, 0.0, 5.0);
  TorusGrid g2(2, 16, 10.0);
  TorusGrid g3(3, 16, 10.0);
  auto code = [](auto f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  EXPECT_EQ(code([&] { DualProblem::make(params, g2, WeightSpec::constant(1.0), 1.0, 0.1); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code([&] { DualProblem::make(params, g3, WeightSpec::constant(1.0), 0.0, 0.1); }), ErrorCode::Precondition);
  EXPECT_EQ(code([&] { DualProblem::make(params, g3, WeightSpec::constant(-1.0), 1.0, 0.1); }), ErrorCode::InvalidWeight);
}
