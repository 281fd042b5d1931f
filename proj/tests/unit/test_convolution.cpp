#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nlab/convolution.hpp"
#include "nlab/errors.hpp"
#include "nlab/reference.hpp"

using namespace nlab;

namespace {
GridMeasure cantor16() { return build_self_similar_measure(IfsSpec::cantor_dust(2), 2, 16, 2.0); }
}  // namespace

TEST_CASE("FFT convolution equals the direct double loop") {
  const GridSpec g{2, 16, 2.0};
  const KernelField k = build_sphere_kernel(g, 0.5, Mollifier{0.25});
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  std::vector<double> f(g.cells());
  for (auto& v : f) v = nd(rng);
  const auto a = convolve(k, f), b = reference::direct_convolve(k, f);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-10).scale(1.0));
}

TEST_CASE("complex convolution is componentwise for a real kernel") {
  const GridSpec g{2, 16, 2.0};
  const KernelField k = build_sphere_kernel(g, 0.5, Mollifier{0.25});
  std::vector<Complex> f(g.cells());
  std::vector<double> re(g.cells()), im(g.cells());
  for (std::size_t i = 0; i < f.size(); ++i) {
    re[i] = std::sin(0.1 * i);
    im[i] = std::cos(0.3 * i);
    f[i] = {re[i], im[i]};
  }
  const auto c = convolve(k, std::span<const Complex>(f));
  const auto a = convolve(k, re), b = convolve(k, im);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(c[i].real() == doctest::Approx(a[i]).scale(1.0));
    CHECK(c[i].imag() == doctest::Approx(b[i]).scale(1.0));
  }
}

TEST_CASE("chain masses match direct multi-index sums") {
  const GridMeasure mu = cantor16();
  const KernelField k = build_sphere_kernel(mu.grid, 0.5, Mollifier{0.25});
  for (int levels = 1; levels <= 3; ++levels)
    CHECK(chain_mass(mu, k, levels) == doctest::Approx(reference::direct_chain_mass(mu, k, levels)).epsilon(1e-9));
}

TEST_CASE("one-edge chain of the uniform torus measure is the kernel mass over the volume") {
  const GridSpec g{2, 64, 4.0};
  const GridMeasure mu = GridMeasure::uniform_torus(g);
  const KernelField k = build_sphere_kernel(g, 1.0, Mollifier{0.125});
  CHECK(chain_mass(mu, k, 1) == doctest::Approx(sphere_mass(2, 1.0) / 16.0).epsilon(1e-12));
  CHECK(chain_mass(mu, k, 3) == doctest::Approx(std::pow(sphere_mass(2, 1.0) / 16.0, 3)).epsilon(1e-10));
}

TEST_CASE("sign-changing kernels are reported as aliasing") {
  const GridMeasure mu = cantor16();
  KernelField k = build_sphere_kernel(mu.grid, 0.5, Mollifier{0.25});
  for (double& v : k.re) v = -v;
  CHECK_THROWS_AS(chain_density(mu, k, 1), AliasingError);
}

TEST_CASE("gap curve vanishes beyond the diameter") {
  const GridMeasure mu = build_self_similar_measure(IfsSpec::menger(2), 3, 128, 8.0);
  const double diam = mu.support_diameter();
  std::vector<double> ts{diam + 0.2, diam + 0.35, diam + 0.45};
  const std::vector<double> eps{0.125, 0.15};
  const GapCurve c = scan_gap(mu, ts, eps);
  for (const auto& s : c.samples) CHECK(s.mass == 0.0);
  CHECK(c.intervals.empty());
}

TEST_CASE("gap curve flags stable positive masses") {
  const GridMeasure mu = build_self_similar_measure(IfsSpec::full_cube(2), 1, 64, 4.0);
  std::vector<double> ts;
  for (int i = 0; i < 8; ++i) ts.push_back(0.3 + 0.1 * i);
  const std::vector<double> eps{0.125, 0.15};
  const GapCurve c = scan_gap(mu, ts, eps);
  CHECK(c.threshold > 0.0);
  REQUIRE(c.intervals.size() >= 1);
  CHECK(curve_integral(c) > 0.0);
  const ContinuityReport r = continuity_probe(c);
  CHECK(r.increments.size() == ts.size() - 1);
  CHECK(r.max_increment >= r.median_increment);
}

TEST_CASE("tail energy excludes the origin and splits into blocks") {
  const GridSpec g{2, 32, 2.0};
  const GridMeasure mu = GridMeasure::uniform_torus(g);
  CHECK(tail_energy(mu, 0.0, 1.0).value == doctest::Approx(0.0).scale(1.0));
  const GridMeasure cd = cantor16();
  const TailEnergy t = tail_energy(cd, 1.0, 1.0);
  double s = 0.0;
  for (double v : t.block_value) s += v;
  CHECK(s == doctest::Approx(t.value));
  CHECK(t.value > 0.0);
}
