#include <algorithm>
#include <cmath>

#include "nlab/errors.hpp"
#include "nlab/reference.hpp"

namespace nlab::reference {

namespace {

struct Cells {
  std::vector<std::size_t> idx;
  std::vector<double> w;
};

Cells cells_of(const GridMeasure& mu) {
  Cells c;
  const double hv = mu.grid.cell_volume();
  for (std::size_t i = 0; i < mu.density.size(); ++i)
    if (mu.density[i] > 0.0) {
      c.idx.push_back(i);
      c.w.push_back(mu.density[i] * hv);
    }
  return c;
}

std::size_t diff(const GridSpec& g, std::size_t x, std::size_t y) {
  const auto a = g.unravel(x), b = g.unravel(y);
  std::array<int, kMaxDim> d{};
  for (int k = 0; k < g.d; ++k) d[k] = a[k] - b[k];
  return g.ravel(d);
}

// Kernel value table over support pairs: tab[i * S + j] = k(x_j - x_i).
std::vector<Complex> pair_table(const GridSpec& g, const Cells& c, const KernelField& k) {
  const std::size_t S = c.idx.size();
  std::vector<Complex> tab(S * S);
  for (std::size_t i = 0; i < S; ++i)
    for (std::size_t j = 0; j < S; ++j) tab[i * S + j] = k.at(diff(g, c.idx[j], c.idx[i]));
  return tab;
}

struct PathWalker {
  std::size_t S;
  const std::vector<double>& w;
  std::vector<std::vector<Complex>> tabs;  // one per edge
  bool closed;
  std::size_t vertices;
  std::vector<std::size_t> at;

  Complex walk(std::size_t level, Complex acc) {
    if (level == vertices) {
      if (closed) acc *= tabs.back()[at[level - 1] * S + at[0]];
      return acc;
    }
    Complex total = 0.0;
    for (std::size_t v = 0; v < S; ++v) {
      Complex next = acc * w[v];
      if (level > 0) next *= tabs[level - 1][at[level - 1] * S + v];
      if (next == Complex(0.0)) continue;
      at[level] = v;
      total += walk(level + 1, next);
    }
    return total;
  }
};

}  // namespace

std::vector<double> direct_convolve(const KernelField& k, std::span<const double> f) {
  const GridSpec& g = k.grid;
  require(f.size() == g.cells(), "field does not match the kernel grid");
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) acc += k.re[diff(g, i, j)] * f[j];
    out[i] = acc;
  }
  return out;
}

Complex direct_path_sum(const GridMeasure& mu, const std::vector<const KernelField*>& edges, bool closed) {
  require(!edges.empty(), "path needs at least one edge");
  const Cells c = cells_of(mu);
  PathWalker pw{c.idx.size(), c.w, {}, closed, closed ? edges.size() : edges.size() + 1, {}};
  for (const KernelField* k : edges) {
    require(k->grid == mu.grid, "kernel and measure live on different grids");
    pw.tabs.push_back(pair_table(mu.grid, c, *k));
  }
  pw.at.assign(pw.vertices, 0);
  return pw.walk(0, 1.0);
}

double direct_chain_mass(const GridMeasure& mu, const KernelField& k, int edges) {
  return direct_path_sum(mu, std::vector<const KernelField*>(edges, &k), false).real();
}

double direct_necklace(const GridMeasure& mu, const KernelField& k, int m) {
  require(m >= 2, "necklace needs m >= 2");
  return direct_path_sum(mu, std::vector<const KernelField*>(m, &k), true).real();
}

DirectCs direct_cs_gap(const GridMeasure& mu, const KernelField& k, int n) {
  DirectCs r;
  r.necklace = direct_path_sum(mu, std::vector<const KernelField*>(2 * n - 2, &k), true).real();
  r.chain = direct_path_sum(mu, std::vector<const KernelField*>(n - 1, &k), false).real();
  return r;
}

Complex direct_alpha_loop(const GridMeasure& mu, const KernelField& minus_alpha, const KernelField& plus_alpha, int m) {
  require(m >= 4 && m % 2 == 0, "alpha loop needs an even m >= 4");
  const int n = (m + 2) / 2;
  std::vector<const KernelField*> bridge{&minus_alpha};
  for (int j = 0; j < n - 3; ++j) bridge.push_back(&plus_alpha);
  bridge.push_back(&minus_alpha);
  std::vector<const KernelField*> loop = bridge;
  loop.insert(loop.end(), bridge.begin(), bridge.end());
  return direct_path_sum(mu, loop, true);
}

double direct_double_loop(const GridMeasure& mu, const KernelField& k) {
  const Cells c = cells_of(mu);
  const std::size_t S = c.idx.size();
  require(S <= 16, "literal 7-index sum limited to 16 support cells");
  const auto tab = pair_table(mu.grid, c, k);
  auto K = [&](std::size_t a, std::size_t b) { return tab[a * S + b].real(); };
  double total = 0.0;
  for (std::size_t x = 0; x < S; ++x)
    for (std::size_t a = 0; a < S; ++a)
      for (std::size_t b = 0; b < S; ++b)
        for (std::size_t e = 0; e < S; ++e) {
          const double left = c.w[x] * K(x, a) * c.w[a] * K(a, b) * c.w[b] * K(b, e) * c.w[e] * K(e, x);
          if (left == 0.0) continue;
          for (std::size_t a2 = 0; a2 < S; ++a2)
            for (std::size_t b2 = 0; b2 < S; ++b2)
              for (std::size_t e2 = 0; e2 < S; ++e2)
                total += left * K(x, a2) * c.w[a2] * K(a2, b2) * c.w[b2] * K(b2, e2) * c.w[e2] * K(e2, x);
        }
  return total;
}

double direct_power_form(const GridMeasure& mu, const KernelField& k, int p) {
  const Cells c = cells_of(mu);
  const std::size_t S = c.idx.size();
  const auto tab = pair_table(mu.grid, c, k);
  double total = 0.0;
  for (std::size_t x = 0; x < S; ++x)
    for (std::size_t y = 0; y < S; ++y) {
      double b = 0.0;
      for (std::size_t z = 0; z < S; ++z) b += tab[z * S + x].real() * tab[z * S + y].real() * c.w[z];
      total += std::pow(b, p) * c.w[x] * c.w[y];
    }
  return total;
}

double direct_riesz_row_sup(const GridMeasure& mu, double alpha) {
  const GridSpec& g = mu.grid;
  const Cells c = cells_of(mu);
  const double h = g.h();
  double best = 0.0;
  for (std::size_t i = 0; i < c.idx.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < c.idx.size(); ++j) {
      const std::int64_t k2 = g.wrapped_norm2(diff(g, c.idx[i], c.idx[j]));
      const double r = k2 == 0 ? 0.5 * h : std::sqrt(static_cast<double>(k2)) * h;
      acc += std::pow(r, alpha - g.d) * c.w[j];
    }
    best = std::max(best, acc);
  }
  return best;
}

double dense_operator_norm(const KernelField& k, const GridMeasure& phi, const GridMeasure& psi) {
  const GridSpec& g = k.grid;
  const std::size_t N = g.cells();
  const double hv = g.cell_volume();
  // T f(x) = Σ_y k(x - y) f(y) φ(y) h^d ; T* g(y) = Σ_x k(x - y) g(x) ψ(x) h^d.
  std::vector<double> f(N, 1.0), tf(N), ttf(N);
  double lambda = 0.0;
  for (int it = 0; it < 2000; ++it) {
    for (std::size_t x = 0; x < N; ++x) {
      double a = 0.0;
      for (std::size_t y = 0; y < N; ++y) a += k.re[diff(g, x, y)] * f[y] * phi.density[y] * hv;
      tf[x] = a;
    }
    for (std::size_t y = 0; y < N; ++y) {
      double a = 0.0;
      for (std::size_t x = 0; x < N; ++x) a += k.re[diff(g, x, y)] * tf[x] * psi.density[x] * hv;
      ttf[y] = a;
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      num += ttf[i] * f[i] * phi.density[i] * hv;
      den += f[i] * f[i] * phi.density[i] * hv;
    }
    const double next = num / den;
    double nrm = 0.0;
    for (std::size_t i = 0; i < N; ++i) nrm += ttf[i] * ttf[i] * phi.density[i] * hv;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) return 0.0;
    for (std::size_t i = 0; i < N; ++i) f[i] = ttf[i] / nrm;
    if (std::abs(next - lambda) <= 1e-14 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(0.0, lambda));
}

}  // namespace nlab::reference
