#include "nlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "nlab/errors.hpp"

namespace nlab::fft {
namespace {

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using PlanPtr = std::unique_ptr<fftw_plan_s, PlanDeleter>;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan plan_for(const GridSpec& g, int sign) {
  static std::map<std::tuple<int, int, int>, PlanPtr> cache;
  std::lock_guard lock(planner_mutex());
  auto key = std::make_tuple(g.d, g.n, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second.get();
  std::vector<int> dims(static_cast<std::size_t>(g.d), g.n);
  const std::size_t cells = g.cells();
  fftw_complex* scratch = fftw_alloc_complex(cells);
  fftw_plan p = fftw_plan_dft(g.d, dims.data(), scratch, scratch, sign,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(scratch);
  if (!p) throw NumericError("FFTW could not create a plan");
  cache.emplace(key, PlanPtr(p));
  return p;
}

}  // namespace

void transform_inplace(const GridSpec& g, std::vector<Complex>& data, int sign) {
  require(data.size() == g.cells(), "FFT buffer does not match grid");
  fftw_plan p = plan_for(g, sign > 0 ? FFTW_BACKWARD : FFTW_FORWARD);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, buf, buf);
}

std::vector<Complex> forward(const GridSpec& g, std::span<const double> values) {
  require(values.size() == g.cells(), "field does not match grid");
  std::vector<Complex> out(values.begin(), values.end());
  transform_inplace(g, out, -1);
  const double scale = g.cell_volume();
  for (auto& c : out) c *= scale;
  return out;
}

std::vector<Complex> forward(const GridSpec& g, std::span<const Complex> values) {
  require(values.size() == g.cells(), "field does not match grid");
  std::vector<Complex> out(values.begin(), values.end());
  transform_inplace(g, out, -1);
  const double scale = g.cell_volume();
  for (auto& c : out) c *= scale;
  return out;
}

std::vector<Complex> inverse(const GridSpec& g, std::span<const Complex> spectrum) {
  require(spectrum.size() == g.cells(), "spectrum does not match grid");
  std::vector<Complex> out(spectrum.begin(), spectrum.end());
  transform_inplace(g, out, +1);
  const double scale = 1.0 / std::pow(g.L, g.d);
  for (auto& c : out) c *= scale;
  return out;
}

}  // namespace nlab::fft
