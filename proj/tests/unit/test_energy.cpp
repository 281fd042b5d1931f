#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlab/energy.hpp"
#include "nlab/errors.hpp"
#include "nlab/fft.hpp"
#include "nlab/reference.hpp"

using namespace nlab;

TEST_CASE("energy of an atom is the lattice sum of |xi|^-alpha") {
  const GridSpec g{2, 32, 2.0};
  const GridMeasure a = GridMeasure::atom(g, 0.5, std::vector<double>{0.5, 0.5});
  double expect = 0.0;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    const double xi = fft::frequency_norm(g, i);
    if (xi > 0.0) expect += std::pow(xi, -1.5) * g.dual_cell_volume();
  }
  const EnergyReport r = energy_integral(g, a.density, 1.5);
  CHECK(r.value == doctest::Approx(expect).epsilon(1e-12));
  CHECK_FALSE(r.alpha_at_least_d);
  CHECK(energy_integral(g, a.density, 2.0).alpha_at_least_d);
}

TEST_CASE("ball energy of an atom grows like R^d") {
  const GridSpec g{2, 256, 2.0};
  const GridMeasure a = GridMeasure::atom(g, 0.5, std::vector<double>{0.5, 0.5});
  const std::vector<double> R{4, 8, 16, 32, 64};
  CHECK(ball_energy_profile(a, R).exponent == doctest::Approx(2.0).epsilon(0.05));
  CHECK_THROWS_AS(ball_energy_profile(a, std::vector<double>{4, 8, 16}), ValidationError);
  CHECK_THROWS_AS(ball_energy_profile(a, std::vector<double>{8, 16, 32, 128}), ValidationError);
}

TEST_CASE("Riesz sums by FFT equal the direct double loop") {
  const GridMeasure mu = build_self_similar_measure(IfsSpec::menger(2), 2, 32, 2.0);
  for (double a : {0.5, 1.0, 1.7}) {
    CHECK(riesz_row_sup(mu, a).sup == doctest::Approx(reference::direct_riesz_row_sup(mu, a)).epsilon(1e-10));
    CHECK(riesz_column_sup(mu, a) == doctest::Approx(riesz_row_sup(mu, a).sup).epsilon(1e-10));
  }
  CHECK_THROWS_AS(riesz_row_sup(mu, 2.5), ValidationError);
}

TEST_CASE("Riesz shells add up to the row sum") {
  const GridMeasure mu = build_self_similar_measure(IfsSpec::cantor_dust(2), 3, 32, 2.0);
  const RieszReport r = riesz_row_sup(mu, 1.0);
  double s = r.self_term;
  for (double v : r.shell_value) s += v;
  CHECK(s == doctest::Approx(r.sup).epsilon(1e-10));
}

TEST_CASE("operator norm matches dense power iteration") {
  const GridMeasure mu = build_self_similar_measure(IfsSpec::cantor_dust(2), 1, 8, 2.0);
  const GridMeasure nu = GridMeasure::uniform_torus(mu.grid);
  const KernelField k = build_sphere_kernel(mu.grid, 0.4, Mollifier{0.5});
  for (const auto& [phi, psi] : {std::pair{&mu, &mu}, std::pair{&mu, &nu}}) {
    const NormResult r = operator_norm(k, *phi, *psi, 2000, 1e-10);
    CHECK(r.norm == doctest::Approx(reference::dense_operator_norm(k, *phi, *psi)).epsilon(1e-7));
    // Rayleigh bound at f = 1 (unit mass source).
    CHECK(r.norm * r.norm >= r.ones_energy * (1.0 - 1e-9));
  }
}

TEST_CASE("non-convergent power iteration raises a numeric error") {
  const GridMeasure mu = build_self_similar_measure(IfsSpec::menger(2), 2, 32, 2.0);
  const KernelField k = build_sphere_kernel(mu.grid, 0.5, Mollifier{0.125});
  CHECK_THROWS_AS(operator_norm(k, mu, mu, 2, 1e-15), NumericError);
}

TEST_CASE("weighted L2 bound is positive and scale invariant") {
  const GridMeasure mu = build_self_similar_measure(IfsSpec::menger(2), 2, 32, 2.0);
  std::vector<double> f(mu.grid.cells(), 1.0), g(mu.grid.cells(), 3.0);
  const double a = weighted_l2_bound_check(mu, f, 1.0), b = weighted_l2_bound_check(mu, g, 1.0);
  CHECK(a > 0.0);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}
