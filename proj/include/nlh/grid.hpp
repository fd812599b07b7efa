#pragma once

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "nlh/error.hpp"

namespace nlh {

namespace detail {

/// FFTW r2c/c2r plan pair for one grid shape.  Plans are created with
/// FFTW_ESTIMATE | FFTW_UNALIGNED so they can be executed on any buffer and
/// give bit-identical results across runs.
class FftPlans {
 public:
  FftPlans(int dim, int points) {
    std::vector<int> dims(dim, points);
    std::size_t real_size = 1;
    for (int d = 0; d < dim; ++d) real_size *= points;
    const std::size_t spec_size = real_size / points * (points / 2 + 1);
    double* r = fftw_alloc_real(real_size);
    fftw_complex* c = fftw_alloc_complex(spec_size);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_r2c(dim, dims.data(), r, c, flags);
    inverse_ = fftw_plan_dft_c2r(dim, dims.data(), c, r, flags);
    fftw_free(r);
    fftw_free(c);
    if (!forward_ || !inverse_) fail(ErrorCode::Precondition, "FFTW planning failed");
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  ~FftPlans() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  void forward(const double* in, std::complex<double>* out) const {
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  }
  /// Destroys `in`.
  void inverse(std::complex<double>* in, double* out) const {
    fftw_execute_dft_c2r(inverse_, reinterpret_cast<fftw_complex*>(in), out);
  }

 private:
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

}  // namespace detail

/// Periodic box [−L/2, L/2)^N with n points per axis and its frequency lattice
/// ξ = 2πm/L, m ∈ [−n/2, n/2).  The spectrum is stored in r2c half layout:
/// axes 0..N−2 full, the last axis m = 0..n/2.
class TorusGrid {
 public:
  TorusGrid() = default;

  TorusGrid(int dim, int points, double side) : dim_(dim), points_(points), side_(side) {
    if (dim < 1 || dim > 8) fail(ErrorCode::UnsupportedDimension, "grid dimension must be in 1..8");
    if (points < 2 || !std::has_single_bit(static_cast<unsigned>(points))) {
      fail(ErrorCode::Precondition, "points per dimension must be a power of two >= 2, got " + std::to_string(points));
    }
    if (!(side > 0.0) || !std::isfinite(side)) fail(ErrorCode::Precondition, "box side must be positive");
    size_ = 1;
    for (int d = 0; d < dim; ++d) size_ *= static_cast<std::size_t>(points);
    spectrum_size_ = size_ / points * (points / 2 + 1);
    auto shared = std::make_shared<Shared>();
    shared->freq_sq.resize(spectrum_size_);
    const double dk = 2.0 * std::numbers::pi / side;
    const int half = points / 2 + 1;
    for (std::size_t idx = 0; idx < spectrum_size_; ++idx) {
      std::size_t rest = idx;
      double s = 0.0;
      const int last = static_cast<int>(rest % half);
      rest /= half;
      s += (dk * last) * (dk * last);
      for (int d = dim - 2; d >= 0; --d) {
        const int k = static_cast<int>(rest % points);
        rest /= points;
        const int m = k < points / 2 ? k : k - points;
        s += (dk * m) * (dk * m);
      }
      shared->freq_sq[idx] = s;
    }
    shared->plans = std::make_unique<detail::FftPlans>(dim, points);
    shared_ = std::move(shared);
  }

  int dim() const { return dim_; }
  int points() const { return points_; }
  double side() const { return side_; }
  double spacing() const { return side_ / points_; }
  double cell_volume() const { return std::pow(spacing(), dim_); }
  std::size_t size() const { return size_; }
  std::size_t spectrum_size() const { return spectrum_size_; }
  double frequency_step() const { return 2.0 * std::numbers::pi / side_; }

  /// |ξ|² on the half-spectrum layout.
  std::span<const double> freq_sq() const { return shared_->freq_sq; }

  bool same_shape(const TorusGrid& o) const { return dim_ == o.dim_ && points_ == o.points_ && side_ == o.side_; }

  /// Coordinate of index i along one axis: (i − n/2)·h.
  double axis_coordinate(int i) const { return (i - points_ / 2) * spacing(); }

  /// Axis indices of flat row-major index `flat`.
  void unflatten(std::size_t flat, std::span<int> out) const {
    for (int d = dim_ - 1; d >= 0; --d) {
      out[d] = static_cast<int>(flat % points_);
      flat /= points_;
    }
  }

  std::size_t flatten(std::span<const int> idx) const {
    std::size_t flat = 0;
    for (int d = 0; d < dim_; ++d) {
      const int k = ((idx[d] % points_) + points_) % points_;
      flat = flat * points_ + k;
    }
    return flat;
  }

  std::vector<double> point(std::size_t flat) const {
    std::vector<int> idx(dim_);
    unflatten(flat, idx);
    std::vector<double> x(dim_);
    for (int d = 0; d < dim_; ++d) x[d] = axis_coordinate(idx[d]);
    return x;
  }

  /// Nearest lattice index to a coordinate (wrapped into the box).
  int nearest_index(double x) const {
    const long k = std::lround(x / spacing()) + points_ / 2;
    return static_cast<int>(((k % points_) + points_) % points_);
  }

  /// min over the lattice of ||ξ|² − a|.
  double min_shell_distance(double a) const {
    double best = std::numeric_limits<double>::infinity();
    for (double s : shared_->freq_sq) best = std::min(best, std::abs(s - a));
    return best;
  }

  void forward(std::span<const double> in, std::span<std::complex<double>> out) const {
    check_sizes(in.size(), out.size());
    shared_->plans->forward(in.data(), out.data());
  }

  /// Normalized inverse (divides by n^N).  Destroys `in`.
  void inverse(std::span<std::complex<double>> in, std::span<double> out) const {
    check_sizes(out.size(), in.size());
    shared_->plans->inverse(in.data(), out.data());
    const double scale = 1.0 / static_cast<double>(size_);
    for (double& x : out) x *= scale;
  }

 private:
  struct Shared {
    std::vector<double> freq_sq;
    std::unique_ptr<detail::FftPlans> plans;
  };

  void check_sizes(std::size_t real, std::size_t spec) const {
    if (real != size_ || spec != spectrum_size_) fail(ErrorCode::ShapeMismatch, "buffer size does not match grid");
  }

  int dim_ = 0;
  int points_ = 0;
  double side_ = 0.0;
  std::size_t size_ = 0;
  std::size_t spectrum_size_ = 0;
  std::shared_ptr<const Shared> shared_;
};

/// Real samples over a torus grid.
struct GridField {
  TorusGrid grid;
  std::vector<double> values;

  GridField() = default;
  explicit GridField(const TorusGrid& g) : grid(g), values(g.size(), 0.0) {}
  GridField(const TorusGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) fail(ErrorCode::ShapeMismatch, "sample count does not match grid");
  }

  template <class F>
  static GridField from_function(const TorusGrid& g, F&& f) {
    GridField out(g);
    std::vector<double> x(g.dim());
    std::vector<int> idx(g.dim());
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.unflatten(i, idx);
      for (int d = 0; d < g.dim(); ++d) x[d] = g.axis_coordinate(idx[d]);
      out.values[i] = f(std::span<const double>(x));
    }
    return out;
  }

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

inline void require_same_shape(const GridField& a, const GridField& b) {
  if (!a.grid.same_shape(b.grid) || a.values.size() != b.values.size()) {
    fail(ErrorCode::ShapeMismatch, "grid fields live on different grids");
  }
}

/// Neumaier-compensated running sum.  Reductions over whole grids use it so
/// that energy differences near convergence are not swamped by roundoff.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// h^N Σ |v|^q
inline double lq_norm_pow(const GridField& v, double q) {
  CompensatedSum s;
  if (q == 2.0) {
    for (double x : v.values) s.add(x * x);
  } else {
    for (double x : v.values) s.add(std::pow(std::abs(x), q));
  }
  return s.value() * v.grid.cell_volume();
}

inline double lq_norm(const GridField& v, double q) { return std::pow(lq_norm_pow(v, q), 1.0 / q); }

/// Discrete L² pairing h^N Σ a·b.
inline double inner(const GridField& a, const GridField& b) {
  require_same_shape(a, b);
  CompensatedSum s;
  for (std::size_t i = 0; i < a.values.size(); ++i) s.add(a.values[i] * b.values[i]);
  return s.value() * a.grid.cell_volume();
}

inline double max_abs(const GridField& v) {
  double m = 0.0;
  for (double x : v.values) m = std::max(m, std::abs(x));
  return m;
}

inline std::size_t argmax_abs(const GridField& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.values.size(); ++i) {
    if (std::abs(v.values[i]) > std::abs(v.values[best])) best = i;
  }
  return best;
}

/// Periodic shift by whole lattice steps: out(i) = v(i − shift).
inline GridField translate(const GridField& v, std::span<const int> shift) {
  const TorusGrid& g = v.grid;
  GridField out(g);
  std::vector<int> idx(g.dim());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.unflatten(i, idx);
    for (int d = 0; d < g.dim(); ++d) idx[d] += shift[d];
    out.values[g.flatten(idx)] = v.values[i];
  }
  return out;
}

// ---- serialization -------------------------------------------------------

namespace detail {

template <class T>
void put_le(std::ostream& os, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(bytes), 8);
}

template <class T>
T get_le(std::istream& is) {
  unsigned char bytes[8];
  is.read(reinterpret_cast<char*>(bytes), 8);
  if (!is) fail(ErrorCode::Io, "truncated field file");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  T value;
  std::memcpy(&value, &bits, 8);
  return value;
}

}  // namespace detail

/// Binary layout: int64 N, int64 n, float64 L (little endian), then n^N
/// float64 samples in row-major order.
inline void write_field_binary(std::ostream& os, const GridField& v) {
  detail::put_le<std::int64_t>(os, v.grid.dim());
  detail::put_le<std::int64_t>(os, v.grid.points());
  detail::put_le<double>(os, v.grid.side());
  for (double x : v.values) detail::put_le<double>(os, x);
}

inline GridField read_field_binary(std::istream& is) {
  const auto dim = detail::get_le<std::int64_t>(is);
  const auto points = detail::get_le<std::int64_t>(is);
  const auto side = detail::get_le<double>(is);
  if (dim < 1 || dim > 8 || points < 2 || points > (1 << 16)) fail(ErrorCode::Io, "corrupt field header");
  TorusGrid g(static_cast<int>(dim), static_cast<int>(points), side);
  GridField v(g);
  for (double& x : v.values) x = detail::get_le<double>(is);
  return v;
}

inline void write_field_binary(const std::string& path, const GridField& v) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::Io, "cannot open " + path);
  write_field_binary(os, v);
}

inline GridField read_field_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::Io, "cannot open " + path);
  return read_field_binary(is);
}

/// One row per sample: coordinates then value.
inline void write_field_csv(std::ostream& os, const GridField& v) {
  const int dim = v.grid.dim();
  for (int d = 0; d < dim; ++d) os << 'x' << d << ',';
  os << "value\n";
  os.precision(17);
  std::vector<int> idx(dim);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v.grid.unflatten(i, idx);
    for (int d = 0; d < dim; ++d) os << v.grid.axis_coordinate(idx[d]) << ',';
    os << v.values[i] << '\n';
  }
}

}  // namespace nlh
