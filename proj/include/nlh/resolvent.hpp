#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "nlh/error.hpp"
#include "nlh/grid.hpp"
#include "nlh/regime.hpp"

namespace nlh {

inline constexpr double kEtaFloor = 1e-6;

/// True when no lattice |ξ|² lies within η_floor of a nonnegative root.
inline bool grid_is_admissible(const FactorRoots& roots, const TorusGrid& grid, double eta_floor = kEtaFloor) {
  for (double a : {roots.a1, roots.a2}) {
    if (a >= 0.0 && grid.min_shell_distance(a) < eta_floor) return false;
  }
  return true;
}

/// Side length L = 2π·√(K + 1/2)/√a1 with K the closest integer to
/// (L_target·√a1/2π)².  Then |ξ|²/a1 = |m|²/(K + 1/2) is never 1.
inline double admissible_side(double a1, double target_side) {
  const double s = target_side * std::sqrt(a1) / (2.0 * std::numbers::pi);
  const double k = std::max(1.0, std::round(s * s - 0.5));
  return 2.0 * std::numbers::pi * std::sqrt(k + 0.5) / std::sqrt(a1);
}

/// Real lattice multiplier m_η(ξ).
struct SpectralMultiplier {
  TorusGrid grid;
  std::vector<double> values;
  double eta = 0.0;
};

namespace detail {

inline void check_eta(const FactorRoots& roots, const TorusGrid& grid, double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) fail(ErrorCode::Precondition, "eta must be finite and >= 0");
  if (eta == 0.0 && !grid_is_admissible(roots, grid)) {
    std::ostringstream os;
    os << "eta = 0 on a grid with a lattice point on the shell |xi|^2 = a (a1=" << roots.a1 << ", a2=" << roots.a2
       << ", L=" << grid.side() << ")";
    fail(ErrorCode::SingularShell, os.str());
  }
}

inline double re_part(double s, double a, double eta) {
  const double x = s - a;
  return eta == 0.0 ? 1.0 / x : x / (x * x + eta * eta);
}

inline double im_part(double s, double a, double eta) {
  const double x = s - a;
  return eta / (x * x + eta * eta);
}

}  // namespace detail

/// m_η(ξ) = Re[(1/disc)(1/(|ξ|²−a1−iη) − 1/(|ξ|²−a2−iη))].
inline SpectralMultiplier build_multiplier(const FactorRoots& roots, const TorusGrid& grid, double eta) {
  detail::check_eta(roots, grid, eta);
  SpectralMultiplier m{grid, std::vector<double>(grid.spectrum_size()), eta};
  const auto fs = grid.freq_sq();
  for (std::size_t i = 0; i < fs.size(); ++i) {
    m.values[i] = (detail::re_part(fs[i], roots.a1, eta) - detail::re_part(fs[i], roots.a2, eta)) / roots.disc;
  }
  return m;
}

/// Imaginary part of the regularized symbol; diagnostics only.
inline SpectralMultiplier build_imag_multiplier(const FactorRoots& roots, const TorusGrid& grid, double eta) {
  if (!(eta > 0.0)) fail(ErrorCode::Precondition, "imaginary multiplier needs eta > 0");
  SpectralMultiplier m{grid, std::vector<double>(grid.spectrum_size()), eta};
  const auto fs = grid.freq_sq();
  for (std::size_t i = 0; i < fs.size(); ++i) {
    m.values[i] = (detail::im_part(fs[i], roots.a1, eta) - detail::im_part(fs[i], roots.a2, eta)) / roots.disc;
  }
  return m;
}

/// Applies an arbitrary real symbol given on the half spectrum.
inline GridField apply_symbol(const GridField& v, std::span<const double> symbol) {
  const TorusGrid& g = v.grid;
  if (symbol.size() != g.spectrum_size() || v.values.size() != g.size()) {
    fail(ErrorCode::ShapeMismatch, "symbol and field shapes differ");
  }
  std::vector<std::complex<double>> spec(g.spectrum_size());
  g.forward(v.values, spec);
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= symbol[i];
  GridField out(g);
  g.inverse(spec, out.values);
  return out;
}

inline GridField apply_R(const GridField& v, const SpectralMultiplier& mult) {
  if (!v.grid.same_shape(mult.grid)) fail(ErrorCode::ShapeMismatch, "field and multiplier grids differ");
  return apply_symbol(v, mult.values);
}

/// Spectral application of |ξ|⁴ + β|ξ|² + α = (|ξ|² − a1)(|ξ|² − a2).
inline GridField apply_L(const GridField& u, const FactorRoots& roots, const TorusGrid& grid) {
  if (!u.grid.same_shape(grid)) fail(ErrorCode::ShapeMismatch, "field and grid differ");
  const auto fs = grid.freq_sq();
  std::vector<double> symbol(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) symbol[i] = (fs[i] - roots.a1) * (fs[i] - roots.a2);
  return apply_symbol(u, symbol);
}

/// ⟨u, 𝓡 v⟩ with the complex regularized resolvent at η > 0.
inline std::complex<double> complex_pairing(const GridField& u, const GridField& v, const SpectralMultiplier& re,
                                            const SpectralMultiplier& im) {
  return {inner(u, apply_R(v, re)), inner(u, apply_R(v, im))};
}

struct EtaExtrapolation {
  GridField value;
  std::vector<double> etas;
  /// Discrete L² norm of the change between consecutive extrapolants.
  std::vector<double> differences;
  double estimated_error = 0.0;
};

/// Applies R at each η and extrapolates to η → 0 by Neville's scheme in η².
inline EtaExtrapolation eta_extrapolate(const GridField& v, const FactorRoots& roots, const TorusGrid& grid,
                                        const std::vector<double>& etas) {
  if (etas.empty()) fail(ErrorCode::Precondition, "empty eta list");
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (etas[i] != 0.0 && !(etas[i] >= kEtaFloor)) fail(ErrorCode::Precondition, "eta below the floor 1e-6");
    if (i > 0 && !(etas[i] < etas[i - 1])) fail(ErrorCode::Precondition, "etas must be strictly decreasing");
  }
  const std::size_t k = etas.size();
  std::vector<GridField> table;
  table.reserve(k);
  for (double eta : etas) table.push_back(apply_R(v, build_multiplier(roots, grid, eta)));

  EtaExtrapolation out;
  out.etas = etas;
  // Diagonal of the Neville tableau: best[j] uses points 0..j.
  std::vector<GridField> col = table;
  GridField previous = table[0];
  for (std::size_t j = 1; j < k; ++j) {
    for (std::size_t i = k - 1; i >= j; --i) {
      // Interpolant through x_{i-j}..x_i evaluated at x = 0.
      const double xi = etas[i] * etas[i];
      const double xl = etas[i - j] * etas[i - j];
      for (std::size_t s = 0; s < col[i].size(); ++s) col[i][s] = (xl * col[i][s] - xi * col[i - 1][s]) / (xl - xi);
    }
    GridField diff(grid);
    for (std::size_t s = 0; s < diff.size(); ++s) diff[s] = col[j][s] - previous[s];
    out.differences.push_back(lq_norm(diff, 2.0));
    previous = col[j];
  }
  for (std::size_t i = 1; i < out.differences.size(); ++i) {
    if (out.differences[i] > out.differences[i - 1] && out.differences[i] > 1e-14 * lq_norm(previous, 2.0)) {
      std::ostringstream os;
      os << "successive differences grow: " << out.differences[i - 1] << " -> " << out.differences[i];
      fail(ErrorCode::NonConvergent, os.str());
    }
  }
  out.estimated_error = out.differences.empty() ? 0.0 : out.differences.back();
  out.value = std::move(previous);
  return out;
}

}  // namespace nlh
