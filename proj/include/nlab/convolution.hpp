#pragma once

#include <span>
#include <string>
#include <vector>

#include "nlab/fractal.hpp"
#include "nlab/grid.hpp"
#include "nlab/kernels.hpp"

namespace nlab {

// Discrete periodic convolution (k ⊛ f)[i] = Σ_j k[i-j] f[j], computed through
// a cached kernel spectrum. No cell-volume factor is applied.
class Convolver {
 public:
  explicit Convolver(const KernelField& k);

  const GridSpec& grid() const { return grid_; }
  bool complex_kernel() const { return complex_; }

  std::vector<double> apply(std::span<const double> f) const;
  std::vector<Complex> apply_complex(std::span<const Complex> f) const;

 private:
  GridSpec grid_;
  bool complex_ = false;
  std::vector<Complex> symbol_;  // unscaled DFT of the kernel
};

std::vector<double> convolve(const KernelField& k, std::span<const double> f);
std::vector<Complex> convolve(const KernelField& k, std::span<const Complex> f);

struct ChainDensity {
  int level = 0;
  std::vector<double> f;
  std::size_t clamped = 0;  // cells pulled up from a small negative value
  double most_negative = 0.0;
};

// Values with |v| <= kRoundoffFloor · bound are zeroed silently; negative
// values down to -kAliasFloor · bound are clamped and counted; anything lower
// is reported as aliasing. `bound` is ‖k‖∞ · ‖input‖₁ for the step.
inline constexpr double kRoundoffFloor = 1e-12;
inline constexpr double kAliasFloor = 1e-6;

// f_0 ≡ 1, f_{j+1} = k ⊛ (f_j · density · h^d); returns f_1 .. f_levels.
std::vector<ChainDensity> chain_density(const GridMeasure& mu, const KernelField& k, int levels);

// Σ f_k density h^d, the k-edge chain mass.
double chain_mass(const GridMeasure& mu, const KernelField& k, int levels);

struct GapSample {
  double t = 0.0;
  double eps = 0.0;  // smallest eps of the sweep
  double mass = 0.0;
  double spread = 0.0;  // max - min of the mass across the eps sweep
  bool flag = false;
  std::vector<double> per_eps;
};

struct GapCurve {
  int k = 1;
  std::vector<double> eps_list;
  double threshold = 0.0;
  std::vector<GapSample> samples;
  // Maximal runs of flagged samples as index ranges [first, last].
  std::vector<std::pair<std::size_t, std::size_t>> intervals;
};

struct ScanOptions {
  int k = 1;
  // Interval threshold; negative selects half the median positive mass.
  double threshold = -1.0;
};

GapCurve scan_gap(const GridMeasure& mu, std::span<const double> t_grid, std::span<const double> eps_list,
                  const ScanOptions& opts = {});

// ∫ M(t) dt by the trapezoid rule over the sampled t-range.
double curve_integral(const GapCurve& c);

struct ContinuityReport {
  double max_increment = 0.0;
  double median_increment = 0.0;
  std::vector<double> increments;
  std::vector<std::size_t> flagged;  // index i flags the step from sample i to i+1
};

ContinuityReport continuity_probe(const GapCurve& c);

struct TailEnergy {
  double cutoff = 0.0;
  double beta = 0.0;
  double value = 0.0;
  // Dyadic blocks [cutoff·2^j, cutoff·2^{j+1}), or [2^j, 2^{j+1}) when cutoff is 0.
  std::vector<double> block_lo;
  std::vector<double> block_value;
};

// Σ_{|ξ| > cutoff} |μ̂(ξ)|² |ξ|^{-β} L^{-d}.
TailEnergy tail_energy(const GridMeasure& mu, double cutoff, double beta);

}  // namespace nlab
