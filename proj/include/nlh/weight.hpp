#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "nlh/error.hpp"

namespace nlh {

enum class WeightKind { Constant, GaussianBumps, Plateau };

inline const char* to_string(WeightKind k) {
  switch (k) {
    case WeightKind::Constant: return "constant";
    case WeightKind::GaussianBumps: return "gaussian_bumps";
    case WeightKind::Plateau: return "plateau";
  }
  return "?";
}

struct Bump {
  std::vector<double> center;
  double height = 1.0;
  double width = 1.0;
};

struct Plateau {
  std::vector<double> center;
  double height = 1.0;
  double radius = 1.0;
  double taper = 1.0;
};

/// W(x) in unscaled coordinates.
///
///   constant:        W ≡ level
///   gaussian_bumps:  W = floor + max_i h_i exp(−|x − y_i|²/(2σ_i²))
///   plateau:         W = floor + h·τ(|x − c| − r0), τ a cosine ramp from 1 to 0 over [0, taper]
///
/// Bumps are combined with max rather than a sum so that sup W and the
/// maximizer set are known exactly: the global maximizers are the centers of
/// the tallest bumps.
struct WeightSpec {
  WeightKind kind = WeightKind::Constant;
  double level = 1.0;
  double floor = 0.0;
  std::vector<Bump> bumps;
  Plateau plateau;

  static WeightSpec constant(double w0) {
    WeightSpec w;
    w.kind = WeightKind::Constant;
    w.level = w0;
    return w;
  }

  static WeightSpec gaussian(double floor, std::vector<Bump> bumps) {
    WeightSpec w;
    w.kind = WeightKind::GaussianBumps;
    w.floor = floor;
    w.bumps = std::move(bumps);
    return w;
  }

  void validate(int dim) const {
    auto bad = [](const std::string& m) { fail(ErrorCode::InvalidWeight, m); };
    switch (kind) {
      case WeightKind::Constant:
        if (!(level > 0.0) || !std::isfinite(level)) bad("constant weight needs a positive finite level");
        return;
      case WeightKind::GaussianBumps:
        if (!(floor >= 0.0)) bad("floor must be >= 0 (W nonnegative)");
        if (bumps.empty()) bad("gaussian_bumps needs at least one bump");
        for (const auto& b : bumps) {
          if (static_cast<int>(b.center.size()) != dim) bad("bump center dimension differs from N");
          if (!(b.height > 0.0) || !std::isfinite(b.height)) bad("bump heights must be positive (sup W > floor)");
          if (!(b.width > 0.0) || !std::isfinite(b.width)) bad("bump widths must be positive");
        }
        return;
      case WeightKind::Plateau:
        if (!(floor >= 0.0)) bad("floor must be >= 0 (W nonnegative)");
        if (static_cast<int>(plateau.center.size()) != dim) bad("plateau center dimension differs from N");
        if (!(plateau.height > 0.0)) bad("plateau height must be positive (sup W > floor)");
        if (!(plateau.radius > 0.0) || !(plateau.taper > 0.0)) bad("plateau radius and taper must be positive");
        return;
    }
  }

  /// W0 = sup W.
  double sup() const {
    switch (kind) {
      case WeightKind::Constant: return level;
      case WeightKind::GaussianBumps: {
        double h = 0.0;
        for (const auto& b : bumps) h = std::max(h, b.height);
        return floor + h;
      }
      case WeightKind::Plateau: return floor + plateau.height;
    }
    return 0.0;
  }

  double operator()(std::span<const double> x) const {
    switch (kind) {
      case WeightKind::Constant: return level;
      case WeightKind::GaussianBumps: {
        double best = 0.0;
        for (const auto& b : bumps) {
          double r2 = 0.0;
          for (std::size_t d = 0; d < x.size(); ++d) r2 += (x[d] - b.center[d]) * (x[d] - b.center[d]);
          best = std::max(best, b.height * std::exp(-r2 / (2.0 * b.width * b.width)));
        }
        return floor + best;
      }
      case WeightKind::Plateau: {
        double r2 = 0.0;
        for (std::size_t d = 0; d < x.size(); ++d) r2 += (x[d] - plateau.center[d]) * (x[d] - plateau.center[d]);
        const double s = std::sqrt(r2) - plateau.radius;
        double tau = 1.0;
        if (s >= plateau.taper) {
          tau = 0.0;
        } else if (s > 0.0) {
          tau = 0.5 * (1.0 + std::cos(std::numbers::pi * s / plateau.taper));
        }
        return floor + plateau.height * tau;
      }
    }
    return 0.0;
  }

  /// Finite representatives of the maximizer set M, sorted lexicographically.
  /// For a plateau this is its center (M itself is the closed ball).
  std::vector<std::vector<double>> maximizers() const {
    std::vector<std::vector<double>> out;
    if (kind == WeightKind::GaussianBumps) {
      const double top = sup() - floor;
      for (const auto& b : bumps) {
        if (b.height >= top * (1.0 - 1e-12)) out.push_back(b.center);
      }
    } else if (kind == WeightKind::Plateau) {
      out.push_back(plateau.center);
    } else {
      fail(ErrorCode::Precondition, "a constant weight is maximal everywhere; M is not a finite set");
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Distance from x to M.
  double dist_to_maximizers(std::span<const double> x) const {
    const auto m = maximizers();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& y : m) {
      double r2 = 0.0;
      for (std::size_t d = 0; d < x.size(); ++d) r2 += (x[d] - y[d]) * (x[d] - y[d]);
      best = std::min(best, std::sqrt(r2));
    }
    if (kind == WeightKind::Plateau) best = std::max(0.0, best - plateau.radius);
    return best;
  }

  /// Smallest length scale of the profile: min bump width, or the taper.
  double width() const {
    switch (kind) {
      case WeightKind::Constant: return std::numeric_limits<double>::infinity();
      case WeightKind::GaussianBumps: {
        double w = std::numeric_limits<double>::infinity();
        for (const auto& b : bumps) w = std::min(w, b.width);
        return w;
      }
      case WeightKind::Plateau: return plateau.taper;
    }
    return 0.0;
  }

  bool has_maximizer_set() const { return kind != WeightKind::Constant; }
};

}  // namespace nlh
