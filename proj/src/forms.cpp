#include "nlab/forms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlab/convolution.hpp"
#include "nlab/errors.hpp"

namespace nlab {

double SupportSet::total() const { return deterministic_sum(weight); }

SupportSet support_of(const GridMeasure& mu) {
  SupportSet s;
  s.grid = mu.grid;
  const double hv = mu.grid.cell_volume();
  for (std::size_t i = 0; i < mu.density.size(); ++i)
    if (mu.density[i] > 0.0) {
      s.cells.push_back(i);
      s.weight.push_back(mu.density[i] * hv);
    }
  return s;
}

template <class T>
Matrix<T> matmul(const Matrix<T>& A, const Matrix<T>& B) {
  require(A.n == B.n, "matrix sizes differ");
  const std::size_t n = A.n;
  Matrix<T> C(n);
  constexpr std::size_t kRows = 16, kDepth = 128;
  const std::size_t blocks = (n + kRows - 1) / kRows;
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t i0 = b * kRows, i1 = std::min(n, i0 + kRows);
    for (std::size_t k0 = 0; k0 < n; k0 += kDepth) {
      const std::size_t k1 = std::min(n, k0 + kDepth);
      for (std::size_t i = i0; i < i1; ++i) {
        T* c = &C.a[i * n];
        for (std::size_t k = k0; k < k1; ++k) {
          const T a = A.a[i * n + k];
          const T* row = &B.a[k * n];
          for (std::size_t j = 0; j < n; ++j) c[j] += a * row[j];
        }
      }
    }
  }
  return C;
}

template Matrix<double> matmul(const Matrix<double>&, const Matrix<double>&);
template Matrix<Complex> matmul(const Matrix<Complex>&, const Matrix<Complex>&);

namespace {

std::size_t displacement_index(const GridSpec& g, std::size_t x, std::size_t y) {
  const auto a = g.unravel(x), b = g.unravel(y);
  std::array<int, kMaxDim> d{};
  for (int k = 0; k < g.d; ++k) d[k] = a[k] - b[k];
  return g.ravel(d);
}

void check_dense(const GridMeasure& mu, const KernelField& k, std::size_t cells, std::size_t max_cells,
                 std::size_t bytes_per_entry) {
  require(mu.grid == k.grid, "measure and kernel live on different grids");
  require(cells > 0, "measure has empty support");
  require(cells <= max_cells, "dense operator: " + std::to_string(cells) + " support cells exceed the limit of " +
                                  std::to_string(max_cells));
  const double bytes = static_cast<double>(cells) * cells * bytes_per_entry * 4.0;
  require(bytes <= 3.0e9, "dense operator exceeds the memory budget");
}

template <class T>
Matrix<T> weighted(const Matrix<T>& K, const std::vector<double>& w) {
  Matrix<T> A = K;
  for (std::size_t i = 0; i < A.n; ++i)
    for (std::size_t j = 0; j < A.n; ++j) A(i, j) *= w[j];
  return A;
}

template <class T>
T trace_product(const Matrix<T>& P, const Matrix<T>& Q) {
  T s{};
  for (std::size_t i = 0; i < P.n; ++i)
    for (std::size_t j = 0; j < P.n; ++j) s += P(i, j) * Q(j, i);
  return s;
}

template <class T>
Matrix<T> power(const Matrix<T>& A, int e) {
  Matrix<T> P = A;
  for (int i = 1; i < e; ++i) P = matmul(P, A);
  return P;
}

template <class T>
T loop_trace(const Matrix<T>& A, int m) {
  const int half = m / 2;
  const Matrix<T> P = power(A, half);
  if (m % 2 == 0) return trace_product(P, P);
  return trace_product(P, matmul(P, A));
}

// Σ Σ F(x,y)^p w_x w_y in a fixed order.
template <class T>
T pair_sum(const Matrix<T>& F, const std::vector<double>& w, int p) {
  T s{};
  for (std::size_t i = 0; i < F.n; ++i) {
    T row{};
    for (std::size_t j = 0; j < F.n; ++j) {
      T v = F(i, j);
      T acc = v;
      for (int e = 1; e < p; ++e) acc *= v;
      row += acc * w[j];
    }
    s += row * w[i];
  }
  return s;
}

void grid_params(FormReport& r, const GridSpec& g) {
  r.params.emplace_back("d", g.d);
  r.params.emplace_back("n", g.n);
  r.params.emplace_back("L", g.L);
}

void kernel_params(FormReport& r, const KernelField& k) {
  r.params.emplace_back("t", k.t);
  r.params.emplace_back("eps", k.eps);
  if (k.kind == KernelKind::alpha) {
    r.params.emplace_back("alpha_re", k.alpha.real());
    r.params.emplace_back("alpha_im", k.alpha.imag());
  }
}

}  // namespace

Matrix<double> kernel_matrix(const KernelField& k, const SupportSet& s) {
  require(k.grid == s.grid, "kernel and support live on different grids");
  Matrix<double> K(s.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) K(i, j) = k.re[displacement_index(s.grid, s.cells[i], s.cells[j])];
  return K;
}

Matrix<Complex> kernel_matrix_complex(const KernelField& k, const SupportSet& s) {
  require(k.grid == s.grid, "kernel and support live on different grids");
  Matrix<Complex> K(s.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) K(i, j) = k.at(displacement_index(s.grid, s.cells[i], s.cells[j]));
  return K;
}

std::vector<Complex> DenseOperator::apply_ones() const {
  std::vector<Complex> out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < size(); ++j) s += entry(i, j);
    out[i] = s;
  }
  return out;
}

DenseOperator build_dense_operator(const GridMeasure& mu, const KernelField& k, std::size_t max_cells) {
  DenseOperator op;
  op.support = support_of(mu);
  op.complex_kernel = k.is_complex();
  check_dense(mu, k, op.size(), max_cells, op.complex_kernel ? sizeof(Complex) : sizeof(double));
  if (op.complex_kernel) {
    op.cplx = weighted(kernel_matrix_complex(k, op.support), op.support.weight);
  } else {
    op.real = weighted(kernel_matrix(k, op.support), op.support.weight);
  }
  return op;
}

void FormReport::set_oracle(double o) {
  oracle = o;
  const double v = std::abs(value);
  rel_dev = std::abs(v - o) / std::max(std::abs(o), 1e-300);
  if (o == 0.0 && v == 0.0) rel_dev = 0.0;
}

Complex necklace_trace(const DenseOperator& op, int m) {
  require(m >= 2 && m <= 12, "necklace length must lie in [2, 12]");
  if (op.complex_kernel) return loop_trace(op.cplx, m);
  return loop_trace(op.real, m);
}

FormReport necklace_form(const GridMeasure& mu, const KernelField& k, int m) {
  require(m >= 2 && m <= 12, "necklace length must lie in [2, 12]");
  const DenseOperator op = build_dense_operator(mu, k);
  FormReport r;
  r.form = "necklace";
  r.value = necklace_trace(op, m);
  r.params.emplace_back("m", m);
  kernel_params(r, k);
  grid_params(r, mu.grid);
  r.params.emplace_back("support_cells", static_cast<double>(op.size()));
  return r;
}

CsGap cs_gap(const GridMeasure& mu, const KernelField& k, int n) {
  require(n >= 2 && n <= 6, "cs_gap needs n in [2, 6]");
  require(!k.is_complex(), "cs_gap needs a real kernel");
  const SupportSet s = support_of(mu);
  check_dense(mu, k, s.size(), kMaxDenseCells, sizeof(double));
  require(std::abs(s.total() - 1.0) <= 1e-9, "cs_gap needs a probability measure");
  const Matrix<double> K = kernel_matrix(k, s);
  // F = (K D)^{n-2} K: n-1 edges, inner vertices integrated.
  Matrix<double> F = K;
  if (n > 2) {
    const Matrix<double> A = weighted(K, s.weight);
    F = matmul(power(A, n - 2), K);
  }
  CsGap g;
  g.n = n;
  g.necklace = pair_sum(F, s.weight, 2);
  g.chain = pair_sum(F, s.weight, 1);
  g.chain_squared = g.chain * g.chain;
  g.slack = g.necklace - g.chain_squared;
  if (n == 2) g.note = "n=2: bridge is the kernel itself; the loop is the 2-necklace and the chain has one edge";
  return g;
}

namespace {

void check_alpha_pair(const GridMeasure& mu, const KernelField& km, const KernelField& kp, int m) {
  require(m >= 4 && m % 2 == 0, "alpha necklace needs an even m >= 4");
  require(mu.grid == km.grid && mu.grid == kp.grid, "measure and kernels live on different grids");
}

}  // namespace

FormReport alpha_necklace_form(const GridMeasure& mu, const KernelField& minus_alpha, const KernelField& plus_alpha,
                               int m) {
  check_alpha_pair(mu, minus_alpha, plus_alpha, m);
  const int n = (m + 2) / 2;
  const SupportSet s = support_of(mu);
  check_dense(mu, minus_alpha, s.size(), kMaxDenseCells, sizeof(Complex));
  const Matrix<Complex> Km = kernel_matrix_complex(minus_alpha, s);
  Matrix<Complex> F = Km;
  if (n > 2) {
    Matrix<Complex> left = weighted(Km, s.weight);
    if (n > 3) {
      const Matrix<Complex> Ap = weighted(kernel_matrix_complex(plus_alpha, s), s.weight);
      left = matmul(left, power(Ap, n - 3));
    }
    F = matmul(left, Km);
  }
  FormReport r;
  r.form = "alpha";
  r.value = pair_sum(F, s.weight, 2);
  r.params.emplace_back("m", m);
  kernel_params(r, plus_alpha);
  grid_params(r, mu.grid);
  r.params.emplace_back("support_cells", static_cast<double>(s.size()));
  return r;
}

Complex alpha_necklace_pipeline(const GridMeasure& mu, const KernelField& minus_alpha, const KernelField& plus_alpha,
                                int m) {
  check_alpha_pair(mu, minus_alpha, plus_alpha, m);
  const int n = (m + 2) / 2;
  const GridSpec& g = mu.grid;
  const SupportSet s = support_of(mu);
  const Convolver cm(minus_alpha), cp(plus_alpha);
  const double hv = g.cell_volume();
  const std::size_t N = g.cells();
  std::vector<Complex> contrib(s.size());
  parallel_for(s.size(), [&](std::size_t src) {
    const std::size_t x = s.cells[src];
    std::vector<Complex> gv(N);
    for (std::size_t z = 0; z < N; ++z) gv[z] = minus_alpha.at(displacement_index(g, z, x));
    for (int step = 0; step < n - 2; ++step) {
      for (std::size_t z = 0; z < N; ++z) gv[z] *= mu.density[z] * hv;
      gv = (step == n - 3 ? cm : cp).apply_complex(gv);
    }
    Complex acc = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) acc += gv[s.cells[j]] * gv[s.cells[j]] * s.weight[j];
    contrib[src] = acc * s.weight[src];
  });
  Complex total = 0.0;
  for (const auto& c : contrib) total += c;
  return total;
}

FormReport alpha_necklace_form(const GridMeasure& mu, Complex alpha, int m, const AlphaFormOptions& opts) {
  const double re = alpha.real();
  const bool on_line = std::abs(re - 1.0) < 1e-12 || std::abs(re) < 1e-12 || std::abs(re + 1.0) < 1e-12;
  require(on_line, "alpha necklace is only evaluated on Re(alpha) in {-1, 0, 1}");
  const Mollifier mol{opts.eps};
  const AlphaOptions ao{opts.t};
  const KernelField km = build_alpha_kernel(mu.grid, -alpha, mol, ao);
  const KernelField kp = build_alpha_kernel(mu.grid, alpha, mol, ao);
  return alpha_necklace_form(mu, km, kp, m);
}

TwoNecklace two_necklace_form(const GridMeasure& mu, const KernelField& k, std::size_t max_cells) {
  require(!k.is_complex(), "two-necklace form needs a real kernel");
  const SupportSet s = support_of(mu);
  check_dense(mu, k, s.size(), max_cells, sizeof(double));
  const std::size_t n = s.size();
  const Matrix<double> K = kernel_matrix(k, s);
  const Matrix<double> A = weighted(K, s.weight);
  // Bridge F(x, y) = Σ_z K(x - z) K(y - z) w_z = (K D K)(x, y).
  const Matrix<double> F = matmul(A, K);
  // G(x, y) = Σ_z K(z - x) K(z - y) w_z, built from the transposed side.
  Matrix<double> Kt(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) Kt(i, j) = K(j, i) * s.weight[i];
  Matrix<double> KT(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) KT(i, j) = K(j, i);
  const Matrix<double> G = matmul(KT, Kt);

  TwoNecklace out;
  // Loops through x: H(x) = Σ_y F(y, x)² w_y.
  std::vector<double> hf(n, 0.0), hg(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    double a = 0.0, b = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      a += F(y, x) * F(y, x) * s.weight[y];
      b += G(y, x) * G(y, x) * s.weight[y];
    }
    hf[x] = a;
    hg[x] = b;
  }
  for (std::size_t x = 0; x < n; ++x) {
    out.necklace4 += hf[x] * s.weight[x];
    out.two_necklaces += hf[x] * hg[x] * s.weight[x];
  }
  // Shared-vertex square from the diagonal of A^4: (A^4)(x, x) = H(x) w_x.
  const Matrix<double> A2 = matmul(A, A);
  for (std::size_t x = 0; x < n; ++x) {
    double diag = 0.0;
    for (std::size_t j = 0; j < n; ++j) diag += A2(x, j) * A2(j, x);
    const double h = diag / s.weight[x];
    out.shared_vertex += h * h * s.weight[x];
  }
  out.necklace4_squared = out.necklace4 * out.necklace4;
  out.slack_low = out.shared_vertex - out.necklace4_squared;
  out.slack_high = out.two_necklaces - out.shared_vertex;
  return out;
}

FormReport holder_power_form(const GridMeasure& mu, const KernelField& k, int p) {
  require(p >= 1 && p <= 6, "power form exponent must lie in [1, 6]");
  require(!k.is_complex(), "power form needs a real kernel");
  const SupportSet s = support_of(mu);
  check_dense(mu, k, s.size(), kMaxDenseCells, sizeof(double));
  const Matrix<double> K = kernel_matrix(k, s);
  const Matrix<double> B = matmul(weighted(K, s.weight), K);
  FormReport r;
  r.form = "power";
  r.value = pair_sum(B, s.weight, p);
  r.params.emplace_back("p", p);
  kernel_params(r, k);
  grid_params(r, mu.grid);
  return r;
}

}  // namespace nlab
