#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlab/fractal.hpp"
#include "nlab/kernels.hpp"

namespace nlab {

// Support cells of a measure with their cell masses μ(y) h^d.
struct SupportSet {
  GridSpec grid;
  std::vector<std::size_t> cells;
  std::vector<double> weight;

  std::size_t size() const { return cells.size(); }
  double total() const;
};

SupportSet support_of(const GridMeasure& mu);

// Square matrix, row-major.
template <class T>
struct Matrix {
  std::size_t n = 0;
  std::vector<T> a;

  Matrix() = default;
  explicit Matrix(std::size_t n_, T fill = T{}) : n(n_), a(n_ * n_, fill) {}
  T& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

// C = A B; each output row is produced by one thread in a fixed order.
template <class T>
Matrix<T> matmul(const Matrix<T>& A, const Matrix<T>& B);

inline constexpr std::size_t kMaxDenseCells = 4096;

// Kernel restricted to the support: K[x][y] = kernel(x - y).
Matrix<double> kernel_matrix(const KernelField& k, const SupportSet& s);
Matrix<Complex> kernel_matrix_complex(const KernelField& k, const SupportSet& s);

// A[x][y] = kernel(x - y) μ(y) h^d over the support cells. Real kernels fill
// `real`, complex ones `cplx`.
struct DenseOperator {
  SupportSet support;
  bool complex_kernel = false;
  Matrix<double> real;
  Matrix<Complex> cplx;

  std::size_t size() const { return support.size(); }
  Complex entry(std::size_t i, std::size_t j) const { return complex_kernel ? cplx(i, j) : Complex(real(i, j)); }
  // A·1, which is f_1 = kernel ⊛ μ on the support cells.
  std::vector<Complex> apply_ones() const;
};

DenseOperator build_dense_operator(const GridMeasure& mu, const KernelField& k, std::size_t max_cells = kMaxDenseCells);

struct FormReport {
  std::string form;
  std::vector<std::pair<std::string, double>> params;
  Complex value{0.0, 0.0};
  std::optional<double> oracle;
  std::optional<double> rel_dev;
  std::string note;

  double abs() const { return std::abs(value); }
  void set_oracle(double o);
};

// Closed loop on m vertices: Σ Π_j kernel(x^{j+1} - x^j) Π_j μ(x^j) h^{dm}
// with x^{m+1} = x^1, evaluated as tr(A^m).
FormReport necklace_form(const GridMeasure& mu, const KernelField& k, int m);
Complex necklace_trace(const DenseOperator& op, int m);

struct CsGap {
  double necklace = 0.0;      // Σ Σ F² μ μ over the 2n-2 loop
  double chain = 0.0;         // Σ Σ F μ μ, the chain on n vertices
  double chain_squared = 0.0;
  double slack = 0.0;         // necklace - chain_squared
  int n = 2;
  std::string note;
};

// F(x, y) = kernel-path of n-1 edges from x to y, integrated over the inner
// vertices x^2 .. x^{n-1}.
CsGap cs_gap(const GridMeasure& mu, const KernelField& k, int n);

// Complex-order loop of m = 2n-2 vertices: N = Σ Σ F(x, y)² μ(x) μ(y) with
// the bridge F running from x through n-2 inner vertices to y along edges
// σ^{-α}, σ^{α}, ..., σ^{α}, σ^{-α}.
FormReport alpha_necklace_form(const GridMeasure& mu, const KernelField& minus_alpha, const KernelField& plus_alpha,
                               int m);
// Same value by a different evaluation order: for each source x run the
// chain of grid convolutions g_1 = σ^{-α}(· - x), g_{j+1} = σ ⊛ (g_j μ h^d)
// and sum μ(y) g(y)² over the support.
Complex alpha_necklace_pipeline(const GridMeasure& mu, const KernelField& minus_alpha, const KernelField& plus_alpha,
                                int m);

struct AlphaFormOptions {
  double t = 1.0;
  double eps = 0.1;
};
// Builds σ^{ε,±α} on the measure's grid and evaluates alpha_necklace_form.
FormReport alpha_necklace_form(const GridMeasure& mu, Complex alpha, int m, const AlphaFormOptions& opts);

struct TwoNecklace {
  double necklace4 = 0.0;          // N_4
  double necklace4_squared = 0.0;  // N_4²
  double shared_vertex = 0.0;      // Σ_x μ(x) (Σ loops through x)²
  double two_necklaces = 0.0;      // 7-vertex double loop, factored evaluation
  double slack_low = 0.0;          // shared_vertex - N_4²
  double slack_high = 0.0;         // two_necklaces - shared_vertex
};

TwoNecklace two_necklace_form(const GridMeasure& mu, const KernelField& k, std::size_t max_cells = 2048);

// Σ Σ B(x, y)^p μ(x) μ(y) with B(x, y) = Σ_z kernel(x - z) kernel(y - z) μ(z) h^d.
FormReport holder_power_form(const GridMeasure& mu, const KernelField& k, int p);

}  // namespace nlab
