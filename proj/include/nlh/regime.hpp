#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "nlh/error.hpp"

namespace nlh {

/// Admissible coefficient regimes of L = Δ² − βΔ + α.
///   A: α < 0 (any β)          roots a1 > 0 > a2
///   B: α > 0, β < −2√α        roots a1 > a2 > 0
///   C: α = 0, β < 0           roots a1 > 0 = a2
enum class Regime { A, B, C };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::A: return "A";
    case Regime::B: return "B";
    case Regime::C: return "C";
  }
  return "?";
}

/// Roots of s² + βs + α = (s − a1)(s − a2), so that L = (−Δ − a1)(−Δ − a2).
struct FactorRoots {
  double a1 = 0.0;
  double a2 = 0.0;
  double disc = 0.0;  // √(β² − 4α) = a1 − a2
};

/// Open interval (lo, hi); hi may be +inf.
struct ExponentWindow {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double p, double rel_margin = 1e-9) const {
    if (!(p > lo * (1.0 + rel_margin))) return false;
    if (std::isinf(hi)) return true;
    return p < hi * (1.0 - rel_margin);
  }
};

inline std::string format_window(const ExponentWindow& w) {
  std::ostringstream os;
  os << '(' << w.lo << ", ";
  if (std::isinf(w.hi)) {
    os << "inf";
  } else {
    os << w.hi;
  }
  os << ')';
  return os.str();
}

namespace detail {

inline double double_root_threshold(double alpha, double beta) {
  return 1e-12 * std::max({1.0, beta * beta, std::abs(alpha)});
}

inline bool is_double_root(double alpha, double beta) {
  return std::abs(beta * beta - 4.0 * alpha) <= double_root_threshold(alpha, beta);
}

}  // namespace detail

inline FactorRoots compute_roots(double alpha, double beta) {
  if (detail::is_double_root(alpha, beta)) {
    std::ostringstream os;
    os << "beta^2 - 4 alpha = " << beta * beta - 4.0 * alpha << " for alpha=" << alpha << ", beta=" << beta;
    fail(ErrorCode::DoubleRoot, os.str());
  }
  if (beta * beta - 4.0 * alpha < 0.0) fail(ErrorCode::InvalidRegime, "complex roots: beta^2 < 4 alpha");
  FactorRoots r;
  r.disc = std::sqrt(beta * beta - 4.0 * alpha);
  // Pick the non-cancelling branch for one root and recover the other from a1·a2 = α.
  if (-beta >= 0.0) {
    r.a1 = 0.5 * (-beta + r.disc);
    r.a2 = alpha / r.a1;
  } else {
    r.a2 = 0.5 * (-beta - r.disc);
    r.a1 = alpha / r.a2;
  }
  return r;
}

inline Regime classify_regime(double alpha, double beta, int dim) {
  if (!std::isfinite(alpha) || !std::isfinite(beta)) {
    fail(ErrorCode::InvalidRegime, "non-finite coefficients");
  }
  Regime regime;
  if (alpha < 0.0) {
    regime = Regime::A;
  } else if (alpha > 0.0) {
    if (detail::is_double_root(alpha, beta)) {
      fail(ErrorCode::DoubleRoot, "beta = " + std::to_string(beta) + " sits on the double-root boundary |beta| = 2 sqrt(alpha)");
    }
    if (!(beta < -2.0 * std::sqrt(alpha))) {
      fail(ErrorCode::InvalidRegime, "alpha > 0 requires beta < -2 sqrt(alpha)");
    }
    regime = Regime::B;
  } else {
    if (beta == 0.0) fail(ErrorCode::DoubleRoot, "alpha = beta = 0");
    if (!(beta < 0.0)) fail(ErrorCode::InvalidRegime, "alpha = 0 requires beta < 0");
    regime = Regime::C;
  }
  const int floor_dim = regime == Regime::C ? 3 : 2;
  if (dim < floor_dim) {
    fail(ErrorCode::UnsupportedDimension,
         "regime " + std::string(to_string(regime)) + " needs N >= " + std::to_string(floor_dim) + ", got N=" + std::to_string(dim));
  }
  return regime;
}

inline ExponentWindow admissible_p_range(int dim, Regime regime) {
  const int floor_dim = regime == Regime::C ? 3 : 2;
  if (dim < floor_dim) {
    fail(ErrorCode::UnsupportedDimension, "N=" + std::to_string(dim) + " below the dimension floor of regime " + to_string(regime));
  }
  const double n = dim;
  ExponentWindow w;
  w.lo = regime == Regime::C ? 2.0 * n / (n - 2.0) : 2.0 * (n + 1.0) / (n - 1.0);
  w.hi = dim <= 4 ? std::numeric_limits<double>::infinity() : 2.0 * n / (n - 4.0);
  return w;
}

inline double conjugate_exponent(double p) {
  if (!(p > 1.0)) fail(ErrorCode::InvalidExponent, "conjugate exponent needs p > 1, got " + std::to_string(p));
  return p / (p - 1.0);
}

/// Validated model: dimension, coefficients, exponent and the derived roots.
struct ModelParameters {
  int dim = 3;
  double alpha = -1.0;
  double beta = 0.0;
  double p = 5.0;
  Regime regime = Regime::A;
  FactorRoots roots{};

  double p_conj() const { return p / (p - 1.0); }

  static ModelParameters make(int dim, double alpha, double beta, double p) {
    ModelParameters m;
    m.dim = dim;
    m.alpha = alpha;
    m.beta = beta;
    m.p = p;
    m.regime = classify_regime(alpha, beta, dim);
    m.roots = compute_roots(alpha, beta);
    const ExponentWindow w = admissible_p_range(dim, m.regime);
    if (!w.contains(p)) {
      std::ostringstream os;
      os << "p=" << p << " outside admissible window " << format_window(w) << " for N=" << dim << " in regime "
         << to_string(m.regime);
      fail(ErrorCode::InvalidExponent, os.str());
    }
    return m;
  }
};

}  // namespace nlh
