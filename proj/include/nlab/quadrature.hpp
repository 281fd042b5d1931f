#pragma once

#include <cstddef>
#include <vector>

namespace nlab {

// Gauss-Legendre rule on [-1, 1]. Rules are computed once per order and cached.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

// ∫_a^b f via `panels` equal panels of the given order. T may be double or
// std::complex<double>.
template <class F>
auto integrate(F&& f, double a, double b, int order = 32, int panels = 1) {
  const GaussRule& rule = gauss_legendre(order);
  using T = decltype(f(a));
  T total{};
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double mid = lo + 0.5 * width, half = 0.5 * width;
    T s{};
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    total += s * half;
  }
  return total;
}

}  // namespace nlab
