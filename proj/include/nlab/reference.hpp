#pragma once

// Serial oracles: literal multi-index sums and exhaustive searches. Slow on
// purpose; used by tests, the verify suites and the benchmark baseline.

#include <span>
#include <vector>

#include "nlab/fractal.hpp"
#include "nlab/kernels.hpp"
#include "nlab/search.hpp"

namespace nlab::reference {

// (k ⊛ f)[i] = Σ_j k[i - j] f[j] by the double loop.
std::vector<double> direct_convolve(const KernelField& k, std::span<const double> f);

// Σ over vertex tuples of Π w(x^j) Π edges[j](x^{j+1} - x^j). Open paths
// have edges.size() + 1 vertices; closed ones edges.size() vertices with the
// last edge running back to x^1.
Complex direct_path_sum(const GridMeasure& mu, const std::vector<const KernelField*>& edges, bool closed);

double direct_chain_mass(const GridMeasure& mu, const KernelField& k, int edges);
double direct_necklace(const GridMeasure& mu, const KernelField& k, int m);

struct DirectCs {
  double necklace = 0.0;
  double chain = 0.0;
};
DirectCs direct_cs_gap(const GridMeasure& mu, const KernelField& k, int n);

Complex direct_alpha_loop(const GridMeasure& mu, const KernelField& minus_alpha, const KernelField& plus_alpha, int m);

// Σ_x w(x) L(x)² with L(x) the 4-loops rooted at x, by the literal 7-index sum.
double direct_double_loop(const GridMeasure& mu, const KernelField& k);

double direct_power_form(const GridMeasure& mu, const KernelField& k, int p);

// sup over support cells of Σ_y |x - y|^{α-d} μ(y) h^d with self distance h/2.
double direct_riesz_row_sup(const GridMeasure& mu, double alpha);

// Power iteration on the dense matrices of the operator f ↦ k ⊛ (f φ h^d).
double dense_operator_norm(const KernelField& k, const GridMeasure& phi, const GridMeasure& psi);

// Exhaustive searches returning canonical id tuples in lexicographic order.
std::vector<std::vector<std::size_t>> brute_chains(const PointCloud& cloud, const SearchQuery& q);
std::vector<std::vector<std::size_t>> brute_necklaces(const PointCloud& cloud, const SearchQuery& q);
std::vector<std::vector<std::size_t>> brute_corners(const PointCloud& cloud, double t, double tol);

}  // namespace nlab::reference
