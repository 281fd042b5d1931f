#pragma once

#include <span>
#include <vector>

#include "nlab/grid.hpp"

namespace nlab::fft {

// Physically scaled transforms on the torus:
//   forward:  F(k) = h^d  Σ_x f(x) e^{-2πi k·x / L}
//   inverse:  f(x) = L^-d Σ_k F(k) e^{+2πi k·x / L}
// so inverse(forward(f)) == f and |forward(atom of unit mass)| == 1.
std::vector<Complex> forward(const GridSpec& g, std::span<const double> values);
std::vector<Complex> forward(const GridSpec& g, std::span<const Complex> values);
std::vector<Complex> inverse(const GridSpec& g, std::span<const Complex> spectrum);

// Unscaled in-place DFT (sign -1 forward, +1 backward), single-threaded FFTW
// plan shared per (d, n, sign).
void transform_inplace(const GridSpec& g, std::vector<Complex>& data, int sign);

// |k|^2 of the integer frequency vector at linear index idx (wrapped), so the
// physical frequency is sqrt(norm2) / L.
inline double frequency_norm(const GridSpec& g, std::size_t idx) {
  return std::sqrt(static_cast<double>(g.wrapped_norm2(idx))) / g.L;
}

}  // namespace nlab::fft
