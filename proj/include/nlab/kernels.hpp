#pragma once

#include <span>
#include <string>
#include <vector>

#include "nlab/fractal.hpp"
#include "nlab/grid.hpp"

namespace nlab {

// Normalized bump c·exp(-1/(1-|x|^2)) on the unit ball, dilated to radius eps.
struct Mollifier {
  double eps = 0.05;
  std::string profile = "bump";

  void validate() const;
  // ρ_ε at distance r in dimension d.
  double value(int d, double r) const;
  // ρ̂(ε k) for frequency |k| (physical units), unit at k = 0.
  double hat(int d, double k) const;
  // Point samples of ρ_ε on the grid, centered at index 0, rescaled so the
  // grid integral is exactly 1.
  Field grid_field(const GridSpec& g) const;
};

// Radial profile of the unit-scale bump: ρ(r) with ∫_{R^d} ρ = 1.
double bump_profile(int d, double r);
// Fourier transform of the unit-scale bump at |ξ| = s.
double bump_hat(int d, double s);

enum class KernelKind { sphere, alpha, modulus };

const char* kernel_kind_name(KernelKind k);

// Grid field centered at index 0: value at linear index i is the kernel at
// the wrapped displacement of i. Imaginary part empty for real kernels.
struct KernelField {
  GridSpec grid;
  KernelKind kind = KernelKind::sphere;
  double t = 1.0;
  Complex alpha{0.0, 0.0};
  double eps = 0.0;
  // "cell-average" for sphere kernels, "spatial" / "spectral" for alpha.
  std::string construction;
  double raw_mass = 0.0;  // before the exact-mass renormalization (sphere only)
  std::vector<double> re;
  std::vector<double> im;

  bool is_complex() const { return !im.empty(); }
  Complex at(std::size_t i) const { return {re[i], im.empty() ? 0.0 : im[i]}; }
  Complex mass() const;
};

// ω t^{d-1}: surface measure of the radius-t sphere in R^d.
double sphere_mass(int d, double t);

// Radial profile of σ_t * ρ_ε at distance r.
double mollified_sphere_profile(int d, double t, const Mollifier& mol, double r);

KernelField build_sphere_kernel(const GridSpec& g, double t, const Mollifier& mol);

enum class AlphaBranch { automatic, spatial, spectral };

struct AlphaOptions {
  double t = 1.0;
  AlphaBranch branch = AlphaBranch::automatic;
};

// Symbol of the unit-scale complex-order kernel (1-|x|^2)_+^{α-1}/Γ(α) at |ξ|.
Complex alpha_symbol(int d, Complex alpha, double xi);

// Mollified complex-order kernel scaled to radius t. The spatial branch
// (Re α > 0 only) integrates the radial profile directly; the spectral branch
// inverts the closed-form symbol times ρ̂(ε ξ). Both are point-sampled.
KernelField build_alpha_kernel(const GridSpec& g, Complex alpha, const Mollifier& mol, const AlphaOptions& opts = {});

// |k| as a real kernel.
KernelField modulus_kernel(const KernelField& k);

// Physically scaled spectrum of the kernel.
std::vector<Complex> kernel_spectrum(const KernelField& k);

DecayFit kernel_fourier_profile(const KernelField& k, std::span<const double> shell_radii);

// ε-uniform behaviour of |σ^{ε,α}| as ε shrinks: for each ε the spectral sup
// on the band [lo/ε, hi/ε) is paired with the frequency where it is attained,
// and the sup of the ball mass λ(B(x, ε)) is paired with ε. Both sequences are
// fitted in log-log.
struct ModulusScaling {
  double decay_exponent = 0.0;
  double ball_exponent = 0.0;
  double decay_residual = 0.0;
  double ball_residual = 0.0;
  std::vector<double> eps;
  std::vector<double> band_freq;
  std::vector<double> band_sup;
  std::vector<double> ball_sup;
};

ModulusScaling modulus_scaling(const GridSpec& g, Complex alpha, std::span<const double> eps_list, double t = 1.0,
                               double band_lo = 0.25, double band_hi = 0.5);

// sup over all grid centers x of ∫_{B(x,r)} |k|, balls realized as cell sets.
double kernel_ball_sup(const KernelField& modulus, double r);

// Relative L¹ distance ‖a - b‖₁ / ‖b‖₁.
double relative_l1(const KernelField& a, const KernelField& b);

}  // namespace nlab
