#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <omp.h>

#include <random>

#include "nlab/errors.hpp"
#include "nlab/fft.hpp"
#include "nlab/grid.hpp"
#include "nlab/quadrature.hpp"

using namespace nlab;

TEST_CASE("ravel and unravel are inverse and wrap negative indices") {
  const GridSpec g{3, 8, 2.0};
  for (std::size_t i = 0; i < g.cells(); i += 7) CHECK(g.ravel(g.unravel(i)) == i);
  CHECK(g.ravel({-1, 0, 0, 0}) == g.ravel({7, 0, 0, 0}));
  CHECK(g.wrap(4) == 4);
  CHECK(g.wrap(5) == -3);
  CHECK(g.wrapped_norm2(g.ravel({7, 1, 0, 0})) == 2);
}

TEST_CASE("grid validation rejects bad shapes") {
  CHECK_THROWS_AS((GridSpec{5, 8, 1.0}.validate()), ValidationError);
  CHECK_THROWS_AS((GridSpec{2, 0, 1.0}.validate()), ValidationError);
  CHECK_THROWS_AS((GridSpec{2, 8, -1.0}.validate()), ValidationError);
}

TEST_CASE("deterministic_sum does not depend on the thread count") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(100003);
  for (auto& x : v) x = u(rng) * std::pow(10.0, u(rng) * 8);
  omp_set_num_threads(1);
  const double a = deterministic_sum(v);
  omp_set_num_threads(4);
  const double b = deterministic_sum(v);
  CHECK(a == b);
}

TEST_CASE("parallel_for rethrows the failure of the lowest index") {
  try {
    parallel_for(100, [](std::size_t i) {
      if (i == 17 || i == 60) throw ValidationError("bad " + std::to_string(i));
    });
    FAIL("expected a throw");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()) == "bad 17");
  }
}

TEST_CASE("fit_line recovers an exact line") {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const LineFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.residual == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("physical FFT scaling: round trip, unit atom, Parseval") {
  const GridSpec g{2, 16, 3.0};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> f(g.cells());
  for (auto& x : f) x = u(rng);
  const auto F = fft::forward(g, f);
  const auto back = fft::inverse(g, F);
  double err = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(back[i].real() - f[i]));
  CHECK(err < 1e-13);
  // Σ |f|² h^d = Σ |F|² L^-d.
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    lhs += f[i] * f[i] * g.cell_volume();
    rhs += std::norm(F[i]) * g.dual_cell_volume();
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  std::vector<double> atom(g.cells(), 0.0);
  atom[g.ravel({3, 5, 0, 0})] = 1.0 / g.cell_volume();
  for (const auto& v : fft::forward(g, atom)) CHECK(std::abs(v) == doctest::Approx(1.0));
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  const double v = integrate([](double x) { return std::pow(x, 9) + 3 * x * x; }, -1.0, 2.0, 8);
  CHECK(v == doctest::Approx((std::pow(2.0, 10) - 1.0) / 10.0 + 9.0).epsilon(1e-13));
  CHECK(integrate([](double x) { return std::exp(x); }, 0.0, 1.0, 16, 2) == doctest::Approx(std::exp(1.0) - 1.0));
}
