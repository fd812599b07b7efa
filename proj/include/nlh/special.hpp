#pragma once

// Bessel and Hankel functions of real order and positive real argument.
//
// J and Y use the ascending series below the crossover |z| = 12 and the
// Hankel asymptotic expansion above it.  Integer-order Y uses the logarithmic
// series.  K (needed for the exponentially decaying kernel branch) uses the
// trapezoidal rule on K_ν(z) = ∫₀^∞ exp(−z cosh t) cosh(νt) dt, which
// converges geometrically in the step size.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>

#include "nlh/error.hpp"

namespace nlh::special {

inline constexpr double kSeriesCrossover = 12.0;
inline constexpr double kMaxOrder = 50.0;
inline constexpr double kEulerGamma = 0.57721566490153286060651209;

namespace detail {

inline void check_args(double nu, double z) {
  if (!(std::abs(nu) <= kMaxOrder)) fail(ErrorCode::OrderOverflow, "|nu| = " + std::to_string(std::abs(nu)) + " exceeds 50");
  if (!(z > 0.0)) fail(ErrorCode::ZeroArgument, "Bessel argument must be positive, got " + std::to_string(z));
}

inline bool is_integer(double nu) { return nu == std::round(nu); }

/// ψ(m) for positive integer m: −γ + H_{m−1}.
inline double digamma_int(int m) {
  double h = 0.0;
  for (int k = 1; k < m; ++k) h += 1.0 / k;
  return -kEulerGamma + h;
}

/// Ascending series for J_ν, ν not a negative integer.
inline double j_series(double nu, double z) {
  const double half = 0.5 * z;
  const double q = -half * half;
  double term = std::pow(half, nu) / std::tgamma(nu + 1.0);
  double sum = term;
  for (int m = 1; m < 400; ++m) {
    term *= q / (m * (m + nu));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum) && m > half) break;
  }
  return sum;
}

/// Hankel asymptotic expansion; returns (J_ν, Y_ν).  Intended for z ≥ 12 and
/// moderate |ν|; terms are summed until they stop decreasing.
inline std::pair<double, double> jy_asymptotic(double nu, double z) {
  const double mu = 4.0 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * 8.0 * z);
    const double mag = std::abs(term);
    if (mag > prev && k > 2) break;
    prev = mag;
    // Signs alternate in pairs: +P, +Q, −P, −Q, ...
    const int phase = k % 4;
    if (phase == 1) q += term;
    else if (phase == 2) p -= term;
    else if (phase == 3) q -= term;
    else p += term;
    if (mag < 1e-17) break;
  }
  const double chi = z - (0.5 * nu + 0.25) * std::numbers::pi;
  const double amp = std::sqrt(2.0 / (std::numbers::pi * z));
  const double c = std::cos(chi);
  const double s = std::sin(chi);
  return {amp * (p * c - q * s), amp * (p * s + q * c)};
}

/// Large-argument evaluation for nonnegative ν: direct expansion for small
/// orders, forward recurrence from the fractional base order otherwise.
inline std::pair<double, double> jy_large(double nu, double z) {
  if (nu <= 6.0) return jy_asymptotic(nu, z);
  const double base = nu - std::floor(nu);
  auto [j0, y0] = jy_asymptotic(base, z);
  auto [j1, y1] = jy_asymptotic(base + 1.0, z);
  double order = base + 1.0;
  while (order + 0.5 < nu) {
    const double j2 = 2.0 * order / z * j1 - j0;
    const double y2 = 2.0 * order / z * y1 - y0;
    j0 = j1;
    j1 = j2;
    y0 = y1;
    y1 = y2;
    order += 1.0;
  }
  // Forward recurrence is unstable for J once the order passes the argument.
  const double j = nu > z ? j_series(nu, z) : j1;
  return {j, y1};
}

/// Logarithmic series for Y_n, n ≥ 0 integer, small z.
inline double y_integer_series(int n, double z) {
  const double half = 0.5 * z;
  const double log_half = std::log(half);
  double finite = 0.0;
  if (n > 0) {
    // Σ_{k<n} (n−k−1)!/k! (z/2)^{2k−n}
    double fact_ratio = std::tgamma(static_cast<double>(n));  // (n−1)!/0!
    double pw = std::pow(half, -n);
    for (int k = 0; k < n; ++k) {
      finite += fact_ratio * pw;
      if (k + 1 < n) fact_ratio *= 1.0 / ((n - k - 1) * (k + 1.0));
      pw *= half * half;
    }
  }
  const double q = -half * half;
  double coeff = std::pow(half, n) / std::tgamma(n + 1.0);  // (z/2)^n / (0! n!)
  double psi_a = digamma_int(1);
  double psi_b = digamma_int(n + 1);
  double tail = coeff * (psi_a + psi_b);
  for (int k = 1; k < 60; ++k) {
    coeff *= q / (k * static_cast<double>(n + k));
    psi_a += 1.0 / k;
    psi_b += 1.0 / (n + k);
    const double t = coeff * (psi_a + psi_b);
    tail += t;
    if (std::abs(t) <= 1e-17 * std::abs(tail) && k > half) break;
  }
  const double jn = j_series(n, z);
  return (2.0 * jn * log_half - finite - tail) / std::numbers::pi;
}

}  // namespace detail

inline double bessel_j(double nu, double z) {
  detail::check_args(nu, z);
  if (nu < 0.0) {
    if (detail::is_integer(nu)) {
      const int n = static_cast<int>(-nu);
      return (n % 2 ? -1.0 : 1.0) * bessel_j(-nu, z);
    }
    if (z < kSeriesCrossover) return detail::j_series(nu, z);
    if (-nu <= 6.0) return detail::jy_asymptotic(nu, z).first;
    // J_{−ν} = cos(νπ) J_ν − sin(νπ) Y_ν
    const double a = -nu;
    const auto [j, y] = detail::jy_large(a, z);
    return std::cos(a * std::numbers::pi) * j - std::sin(a * std::numbers::pi) * y;
  }
  if (z < kSeriesCrossover) return detail::j_series(nu, z);
  return detail::jy_large(nu, z).first;
}

inline double bessel_y(double nu, double z) {
  detail::check_args(nu, z);
  if (detail::is_integer(nu)) {
    const int n = static_cast<int>(std::abs(std::round(nu)));
    const double sign = (nu < 0.0 && n % 2) ? -1.0 : 1.0;
    if (z < kSeriesCrossover) return sign * detail::y_integer_series(n, z);
    return sign * detail::jy_large(n, z).second;
  }
  if (z < kSeriesCrossover) {
    const double s = std::sin(nu * std::numbers::pi);
    const double c = std::cos(nu * std::numbers::pi);
    return (detail::j_series(nu, z) * c - detail::j_series(-nu, z)) / s;
  }
  if (nu < 0.0) {
    if (-nu <= 6.0) return detail::jy_asymptotic(nu, z).second;
    // Y_{−ν} = sin(νπ) J_ν + cos(νπ) Y_ν
    const double a = -nu;
    const auto [j, y] = detail::jy_large(a, z);
    return std::sin(a * std::numbers::pi) * j + std::cos(a * std::numbers::pi) * y;
  }
  return detail::jy_large(nu, z).second;
}

inline std::complex<double> hankel1(double nu, double z) { return {bessel_j(nu, z), bessel_y(nu, z)}; }

/// Modified Bessel function of the second kind, K_ν(z), z > 0.
inline double bessel_k(double nu, double z) {
  detail::check_args(nu, z);
  const double a = std::abs(nu);
  constexpr double step = 0.05;
  // Integrand exp(−z cosh t) cosh(at); peak where sinh t = a/z.
  const double t_peak = std::asinh(a / z);
  double sum = 0.0;
  double peak_log = -z * std::cosh(t_peak) + a * t_peak;
  for (int k = 0; k < 100000; ++k) {
    const double t = k * step;
    const double e = -z * std::cosh(t);
    const double f = 0.5 * (std::exp(e + a * t - peak_log) + std::exp(e - a * t - peak_log));
    sum += (k == 0 ? 0.5 : 1.0) * f;
    if (t > t_peak && e + a * t - peak_log < -60.0) break;
  }
  return step * sum * std::exp(peak_log);
}

}  // namespace nlh::special
