#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace nlab {

using Complex = std::complex<double>;

inline constexpr int kMaxDim = 4;

// Periodic grid of n cells per axis on a torus of side L in d dimensions.
// Cell i along an axis covers [i h, (i+1) h). Linear indices are row-major
// with axis 0 slowest.
struct GridSpec {
  int d = 2;
  int n = 64;
  double L = 2.0;

  double h() const { return L / n; }
  double cell_volume() const { return std::pow(h(), d); }
  // Frequency-lattice spacing 1/L raised to d: the dξ of a discrete spectral sum.
  double dual_cell_volume() const { return std::pow(1.0 / L, d); }
  double nyquist() const { return n / (2.0 * L); }
  std::size_t cells() const;

  bool operator==(const GridSpec& o) const { return d == o.d && n == o.n && L == o.L; }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }

  void validate() const;

  std::array<int, kMaxDim> unravel(std::size_t idx) const;
  std::size_t ravel(const std::array<int, kMaxDim>& ijk) const;

  // Signed representative of index j on the torus: j for j <= n/2, j - n above.
  int wrap(int j) const { return j <= n / 2 ? j : j - n; }
  // Sum of squared wrapped indices; exact integer, identical for ±j.
  std::int64_t wrapped_norm2(std::size_t idx) const;
};

// Real field with its grid.
struct Field {
  GridSpec grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const GridSpec& g, double fill = 0.0) : grid(g), values(g.cells(), fill) {}
  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

// Blocked sum with a block layout that does not depend on the thread count,
// so the result is bit-identical for any OMP_NUM_THREADS.
double deterministic_sum(std::size_t count, const std::function<double(std::size_t)>& term);
double deterministic_sum(std::span<const double> values);

// Runs body(i) for every i in [0, count) across OpenMP threads with dynamic
// scheduling. The exception raised by the lowest failing index is rethrown
// once the loop has finished.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

// Ordinary least squares y = a + b x. Returns {intercept, slope, rms residual}.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double residual = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace nlab
