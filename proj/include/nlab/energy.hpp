#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nlab/fractal.hpp"
#include "nlab/kernels.hpp"

namespace nlab {

struct EnergyReport {
  double alpha = 0.0;
  double value = 0.0;
  bool origin_excluded = true;
  bool alpha_at_least_d = false;  // integrable only because the grid is finite
  double min_frequency = 0.0;
  // Octaves [2^j / L, 2^{j+1} / L) of the frequency lattice.
  std::vector<double> octave_lo;
  std::vector<double> octave_value;
};

// Σ_{ξ ≠ 0, |ξ| >= min_frequency} |f̂(ξ)|² |ξ|^{-α} L^{-d}; f̂ the physically
// scaled transform of the grid field.
EnergyReport energy_integral(const GridSpec& g, std::span<const double> field, double alpha, double min_frequency = 0.0);

struct BallEnergyFit {
  double exponent = 0.0;
  double C_hat = 0.0;
  double residual = 0.0;
  std::vector<double> radii;
  std::vector<double> energy;
};

// Growth of Σ_{|ξ| <= R} |μ̂(ξ)|² L^{-d} (origin included) over dyadic R.
BallEnergyFit ball_energy_profile(const GridMeasure& mu, std::span<const double> R_list);

struct RieszReport {
  double alpha = 0.0;
  double sup = 0.0;
  std::size_t argmax_cell = 0;
  // Dyadic distance shells at the maximizing row: shell j holds distances in
  // [2^-(j+1), 2^-j); the last entry is the regularized self cell.
  std::vector<double> shell_value;
  double self_term = 0.0;
};

// sup over support cells x of Σ_y |x - y|^{α-d} μ(y) h^d, self distance h/2.
RieszReport riesz_row_sup(const GridMeasure& mu, double alpha);
// The same supremum taken over columns, sup_y Σ_x |x - y|^{α-d} μ(x) h^d.
double riesz_column_sup(const GridMeasure& mu, double alpha);

struct NormResult {
  double norm = 0.0;
  int iterations = 0;
  double residual = 0.0;
  double ones_energy = 0.0;  // ‖T 1‖²_{L²(ψ)}
};

// Norm of f ↦ k ⊛ (f φ h^d) from L²(φ) to L²(ψ) by power iteration on T*T
// started at f ≡ 1.
NormResult operator_norm(const KernelField& k, const GridMeasure& phi, const GridMeasure& psi, int max_iter = 500,
                         double tol = 1e-6);

struct OperatorNormEstimate {
  std::vector<double> eps;
  std::vector<double> norms;
  std::vector<int> iterations;
  double ratio = 0.0;  // max / min over the sweep
  double gamma_hat = 0.0, s_phi = 0.0, s_psi = 0.0;
  bool hypothesis_holds = false;  // gamma_hat > d - (s_phi + s_psi) / 2
};

struct NormSweepInputs {
  double gamma_hat = 0.0;
  double s_phi = 0.0;
  double s_psi = 0.0;
};

OperatorNormEstimate operator_norm_estimate(const std::function<KernelField(double eps)>& kernel_for_eps,
                                            const GridMeasure& phi, const GridMeasure& psi,
                                            std::span<const double> eps_list, const NormSweepInputs& fitted);

// energy_integral(f μ, α) / ‖f‖²_{L²(μ)}.
double weighted_l2_bound_check(const GridMeasure& mu, std::span<const double> f, double alpha);

}  // namespace nlab
