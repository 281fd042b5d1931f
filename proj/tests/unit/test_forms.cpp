#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlab/errors.hpp"
#include "nlab/forms.hpp"
#include "nlab/reference.hpp"

using namespace nlab;

namespace {
GridMeasure cantor16() { return build_self_similar_measure(IfsSpec::cantor_dust(2), 2, 16, 2.0); }
GridMeasure random16() { return build_self_similar_measure(IfsSpec::random_grid(2, 4, 6, 3), 1, 16, 2.0); }
GridMeasure tiny() {
  return build_self_similar_measure(IfsSpec::grid_subcubes(2, 4, {{0, 0}, {1, 0}, {3, 2}, {2, 3}, {0, 3}}), 1, 8, 2.0);
}
KernelField kern(const GridSpec& g) { return build_sphere_kernel(g, 0.4, Mollifier{2.0 * g.h()}); }
double rel(Complex a, Complex b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_CASE("matmul matches the textbook triple loop") {
  Matrix<double> A(37), B(37);
  for (std::size_t i = 0; i < A.a.size(); ++i) {
    A.a[i] = std::sin(0.37 * i);
    B.a[i] = std::cos(0.11 * i);
  }
  const Matrix<double> C = matmul(A, B);
  for (std::size_t i = 0; i < 37; i += 5)
    for (std::size_t j = 0; j < 37; j += 3) {
      double s = 0.0;
      for (std::size_t k = 0; k < 37; ++k) s += A(i, k) * B(k, j);
      CHECK(C(i, j) == doctest::Approx(s).scale(1.0));
    }
}

TEST_CASE("necklace forms match direct cyclic sums") {
  for (const GridMeasure& mu : {cantor16(), random16()}) {
    const KernelField k = kern(mu.grid);
    for (int m = 2; m <= 4; ++m) {
      const FormReport r = necklace_form(mu, k, m);
      CHECK(r.value.real() == doctest::Approx(reference::direct_necklace(mu, k, m)).epsilon(1e-9));
      CHECK(std::abs(r.value.imag()) == 0.0);
    }
  }
}

TEST_CASE("Cauchy-Schwarz gap matches direct sums and is nonnegative") {
  for (const GridMeasure& mu : {cantor16(), random16(), tiny()}) {
    const KernelField k = kern(mu.grid);
    for (int n = 2; n <= 4; ++n) {
      const CsGap g = cs_gap(mu, k, n);
      const auto d = reference::direct_cs_gap(mu, k, n);
      CHECK(g.necklace == doctest::Approx(d.necklace).epsilon(1e-9));
      CHECK(g.chain == doctest::Approx(d.chain).epsilon(1e-9));
      CHECK(g.slack >= -1e-10);
      CHECK(g.note.empty() == (n != 2));
    }
  }
}

TEST_CASE("cs_gap requires a probability measure") {
  GridMeasure mu = cantor16();
  for (double& v : mu.density) v *= 2.0;
  mu.recompute_mass();
  CHECK_THROWS_AS(cs_gap(mu, kern(mu.grid), 3), ValidationError);
}

TEST_CASE("two-necklace ledger") {
  const GridMeasure mu = tiny();
  const KernelField k = kern(mu.grid);
  const TwoNecklace t = two_necklace_form(mu, k);
  CHECK(t.necklace4 == doctest::Approx(reference::direct_necklace(mu, k, 4)).epsilon(1e-12));
  CHECK(t.shared_vertex == doctest::Approx(reference::direct_double_loop(mu, k)).epsilon(1e-12));
  CHECK(t.two_necklaces == doctest::Approx(t.shared_vertex).epsilon(1e-12));
  CHECK(t.slack_low >= -1e-9 * t.shared_vertex);
  for (const GridMeasure& m : {cantor16(), random16()}) {
    const TwoNecklace u = two_necklace_form(m, kern(m.grid));
    CHECK(u.slack_low >= -1e-9 * u.shared_vertex);
    CHECK(u.slack_high >= -1e-9 * u.shared_vertex);
  }
}

TEST_CASE("power forms match direct sums") {
  const GridMeasure mu = random16();
  const KernelField k = kern(mu.grid);
  for (int p : {1, 2, 3})
    CHECK(holder_power_form(mu, k, p).value.real() ==
          doctest::Approx(reference::direct_power_form(mu, k, p)).epsilon(1e-9));
}

TEST_CASE("alpha necklace: dense, pipeline and direct agree") {
  const GridMeasure mu = cantor16();
  const Mollifier mol{0.25};
  for (Complex a : {Complex(1.0, 0.0), Complex(-1.0, 0.7), Complex(0.0, 2.0)}) {
    const KernelField km = build_alpha_kernel(mu.grid, -a, mol, {0.5});
    const KernelField kp = build_alpha_kernel(mu.grid, a, mol, {0.5});
    for (int m : {4, 6}) {
      const Complex dense = alpha_necklace_form(mu, km, kp, m).value;
      const Complex direct = reference::direct_alpha_loop(mu, km, kp, m);
      CHECK(rel(dense, direct) < 1e-9);
      CHECK(rel(alpha_necklace_pipeline(mu, km, kp, m), direct) < 1e-9);
    }
  }
}

TEST_CASE("alpha necklace of the conjugate order is the conjugate value") {
  const GridMeasure mu = cantor16();
  AlphaFormOptions o{0.5, 0.25};
  const Complex a = alpha_necklace_form(mu, {1.0, 0.8}, 4, o).value;
  const Complex b = alpha_necklace_form(mu, {1.0, -0.8}, 4, o).value;
  CHECK(a == std::conj(b));
  CHECK_THROWS_AS(alpha_necklace_form(mu, {0.5, 0.0}, 4, o), ValidationError);
  CHECK_THROWS_AS(alpha_necklace_form(mu, {1.0, 0.0}, 5, o), ValidationError);
}

TEST_CASE("dense operator refuses oversized supports") {
  const GridMeasure mu = GridMeasure::uniform_torus({2, 128, 4.0});
  CHECK_THROWS_AS(build_dense_operator(mu, build_sphere_kernel(mu.grid, 1.0, Mollifier{0.0625})), ValidationError);
}
