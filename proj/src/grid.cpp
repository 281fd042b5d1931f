#include "nlab/grid.hpp"

#include <omp.h>

#include <cstdio>
#include <exception>
#include <string>

#include "nlab/errors.hpp"

namespace nlab {

std::size_t GridSpec::cells() const {
  std::size_t c = 1;
  for (int a = 0; a < d; ++a) c *= static_cast<std::size_t>(n);
  return c;
}

void GridSpec::validate() const {
  require(d >= 1 && d <= kMaxDim, "grid dimension must be in [1, 4], got " + std::to_string(d));
  require(n >= 2, "grid resolution must be >= 2");
  require(L > 0.0 && std::isfinite(L), "torus side must be positive");
}

std::array<int, kMaxDim> GridSpec::unravel(std::size_t idx) const {
  std::array<int, kMaxDim> out{};
  for (int a = d - 1; a >= 0; --a) {
    out[a] = static_cast<int>(idx % static_cast<std::size_t>(n));
    idx /= static_cast<std::size_t>(n);
  }
  return out;
}

std::size_t GridSpec::ravel(const std::array<int, kMaxDim>& ijk) const {
  std::size_t idx = 0;
  for (int a = 0; a < d; ++a) {
    int j = ((ijk[a] % n) + n) % n;
    idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
  }
  return idx;
}

std::int64_t GridSpec::wrapped_norm2(std::size_t idx) const {
  std::int64_t s = 0;
  for (int a = d - 1; a >= 0; --a) {
    const std::int64_t w = wrap(static_cast<int>(idx % static_cast<std::size_t>(n)));
    s += w * w;
    idx /= static_cast<std::size_t>(n);
  }
  return s;
}

namespace {
constexpr std::size_t kSumBlock = 4096;
}

double deterministic_sum(std::size_t count, const std::function<double(std::size_t)>& term) {
  const std::size_t blocks = (count + kSumBlock - 1) / kSumBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t lo = b * kSumBlock;
    const std::size_t hi = std::min(count, lo + kSumBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[b] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double deterministic_sum(std::span<const double> values) {
  return deterministic_sum(values.size(), [&](std::size_t i) { return values[i]; });
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "line fit needs >= 2 matching samples");
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, "line fit needs distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    rss += r * r;
  }
  f.residual = std::sqrt(rss / m);
  return f;
}

}  // namespace nlab
