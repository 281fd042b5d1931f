#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nlab/errors.hpp"
#include "nlab/kernels.hpp"
#include "nlab/quadrature.hpp"
#include "nlab/special.hpp"

using namespace nlab;

TEST_CASE("bump transform matches a direct cosine integral in d = 1") {
  for (double s : {0.0, 0.3, 1.0, 2.5}) {
    const double direct =
        integrate([&](double r) { return bump_profile(1, std::abs(r)) * std::cos(2 * M_PI * s * r); }, -1.0, 1.0, 64,
                  8);
    CHECK(bump_hat(1, s) == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("bump profile has unit integral in d = 2 and 3") {
  for (int d : {2, 3}) {
    const double m = integrate([&](double r) { return bump_profile(d, r) * special::unit_sphere_area(d) * std::pow(r, d - 1); },
                               0.0, 1.0, 64, 8);
    CHECK(m == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("grid mollifier integrates to one") {
  const GridSpec g{2, 64, 2.0};
  const Field f = Mollifier{0.1}.grid_field(g);
  double s = 0.0;
  for (double v : f.values) s += v * g.cell_volume();
  CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("mollified sphere profile carries the sphere mass") {
  for (int d : {2, 3}) {
    const double t = 0.7;
    const Mollifier mol{0.1};
    const double m = integrate(
        [&](double r) { return mollified_sphere_profile(d, t, mol, r) * special::unit_sphere_area(d) * std::pow(r, d - 1); },
        t - 0.1, t + 0.1, 48, 8);
    CHECK(m == doctest::Approx(sphere_mass(d, t)).epsilon(1e-5));
  }
}

TEST_CASE("sphere kernel is even, permutation symmetric and carries the exact mass") {
  const GridSpec g{2, 64, 4.0};
  const KernelField k = build_sphere_kernel(g, 1.0, Mollifier{0.15});
  CHECK(k.mass().real() == doctest::Approx(sphere_mass(2, 1.0)).epsilon(1e-12));
  CHECK(std::abs(k.raw_mass / sphere_mass(2, 1.0) - 1.0) < 0.05);
  for (int i = 0; i < 64; i += 5)
    for (int j = 0; j < 64; j += 3) {
      const double v = k.re[g.ravel({i, j, 0, 0})];
      CHECK(v == k.re[g.ravel({-i, j, 0, 0})]);
      CHECK(v == k.re[g.ravel({j, i, 0, 0})]);
      CHECK(v >= 0.0);
    }
}

TEST_CASE("kernel preconditions") {
  const GridSpec g{2, 64, 4.0};
  CHECK_THROWS_AS(build_sphere_kernel(g, 1.0, Mollifier{0.1}), ValidationError);  // eps < 2h
  CHECK_THROWS_AS(build_sphere_kernel(g, 1.9, Mollifier{0.2}), ValidationError);  // wraps
  CHECK_THROWS_AS(build_alpha_kernel(g, {2.0, 0.0}, Mollifier{0.2}), ValidationError);
  CHECK_THROWS_AS(build_alpha_kernel(g, {1.0, 5.0}, Mollifier{0.2}), ValidationError);
  AlphaOptions o;
  o.branch = AlphaBranch::spatial;
  CHECK_THROWS_AS(build_alpha_kernel(g, {-0.5, 0.0}, Mollifier{0.2}, o), ValidationError);
}

TEST_CASE("alpha symbol at alpha = 1 is the ball indicator transform") {
  CHECK(std::abs(alpha_symbol(3, 1.0, 0.0) - Complex(special::unit_ball_volume(3))) < 1e-13);
  for (double xi : {0.2, 0.9, 2.3}) {
    const double z = 2 * M_PI * xi;
    const double j32 = std::sqrt(2.0 / (M_PI * z)) * (std::sin(z) / z - std::cos(z));
    CHECK(alpha_symbol(3, 1.0, xi).real() == doctest::Approx(j32 / std::pow(xi, 1.5)).epsilon(1e-10));
  }
}

TEST_CASE("spatial and spectral alpha kernels agree") {
  const GridSpec g{2, 128, 4.0};
  const Mollifier mol{0.125};
  for (Complex a : {Complex(1.0, 0.0), Complex(0.6, 0.8)}) {
    AlphaOptions sp, sf;
    sp.branch = AlphaBranch::spatial;
    sf.branch = AlphaBranch::spectral;
    const KernelField x = build_alpha_kernel(g, a, mol, sp), y = build_alpha_kernel(g, a, mol, sf);
    CHECK(relative_l1(x, y) < 0.03);
  }
}

TEST_CASE("alpha = 1 kernel is a mollified ball of the right mass") {
  const GridSpec g{2, 128, 4.0};
  const KernelField k = build_alpha_kernel(g, 1.0, Mollifier{0.125});
  CHECK(k.mass().real() == doctest::Approx(special::unit_ball_volume(2)).epsilon(0.02));
  CHECK_FALSE(k.is_complex());
}

TEST_CASE("conjugate order gives the conjugate kernel") {
  const GridSpec g{2, 64, 4.0};
  const KernelField a = build_alpha_kernel(g, {0.0, 1.5}, Mollifier{0.25});
  const KernelField b = build_alpha_kernel(g, {0.0, -1.5}, Mollifier{0.25});
  REQUIRE(a.is_complex());
  for (std::size_t i = 0; i < a.re.size(); ++i) {
    CHECK(a.re[i] == b.re[i]);
    CHECK(a.im[i] == -b.im[i]);
  }
}

TEST_CASE("sphere kernel spectrum decays like |xi|^{-(d-1)/2}") {
  // eps = 2h keeps the mollifier flat over the fitted shells.
  const GridSpec g{2, 1024, 4.0};
  const KernelField k = build_sphere_kernel(g, 1.0, Mollifier{2.0 * g.h()});
  const std::vector<double> radii{1.0, 1.41, 2.0, 2.83, 4.0, 5.66, 8.0};
  CHECK(std::abs(kernel_fourier_profile(k, radii).gamma_hat - 0.5) < 0.1);
}

TEST_CASE("modulus kernel is |k|") {
  const GridSpec g{2, 64, 4.0};
  const KernelField a = build_alpha_kernel(g, {0.5, 1.0}, Mollifier{0.25});
  const KernelField m = modulus_kernel(a);
  CHECK_FALSE(m.is_complex());
  for (std::size_t i = 0; i < m.re.size(); i += 13) CHECK(m.re[i] == doctest::Approx(std::abs(a.at(i))));
}
