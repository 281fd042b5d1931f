// OpenMP production paths against the serial reference oracles. Run with
// OMP_NUM_THREADS set to compare scaling.

#include <benchmark/benchmark.h>

#include <random>

#include "nlab/convolution.hpp"
#include "nlab/forms.hpp"
#include "nlab/reference.hpp"
#include "nlab/search.hpp"

using namespace nlab;

namespace {

const GridMeasure& measure16() {
  static const GridMeasure mu = build_self_similar_measure(IfsSpec::menger(2), 2, 16, 2.0);
  return mu;
}

const KernelField& kernel16() {
  static const KernelField k = build_sphere_kernel(measure16().grid, 0.5, Mollifier{0.25});
  return k;
}

void BM_chain_fft(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(chain_mass(measure16(), kernel16(), 2));
}
void BM_chain_direct(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(reference::direct_chain_mass(measure16(), kernel16(), 2));
}

void BM_necklace_dense(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(necklace_form(measure16(), kernel16(), 4));
}
void BM_necklace_direct(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(reference::direct_necklace(measure16(), kernel16(), 4));
}

void BM_convolve_large(benchmark::State& st) {
  const GridSpec g{2, static_cast<int>(st.range(0)), 4.0};
  const KernelField k = build_sphere_kernel(g, 1.0, Mollifier{4.0 * g.h()});
  std::vector<double> f(g.cells(), 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(convolve(k, f));
}

const PointCloud& cloud() {
  static const PointCloud c = sample_point_cloud(IfsSpec::cantor_dust(2), 6, 40, 1);
  return c;
}

void BM_search_indexed(benchmark::State& st) {
  const SearchQuery q{4, 1.0 / 3.0, 0.03, 0.02, 1000000};
  for (auto _ : st) benchmark::DoNotOptimize(find_necklaces(cloud(), q));
}
void BM_search_brute(benchmark::State& st) {
  const SearchQuery q{4, 1.0 / 3.0, 0.03, 0.02, 1000000};
  for (auto _ : st) benchmark::DoNotOptimize(reference::brute_necklaces(cloud(), q));
}

}  // namespace

BENCHMARK(BM_chain_fft);
BENCHMARK(BM_chain_direct)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_necklace_dense);
BENCHMARK(BM_necklace_direct)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_convolve_large)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_search_indexed);
BENCHMARK(BM_search_brute)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
