#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nlab/special.hpp"

using namespace nlab;
using special::bessel_j;
using special::gamma;

TEST_CASE("gamma matches closed forms") {
  CHECK(std::abs(gamma({0.5, 0.0}) - Complex(std::sqrt(M_PI), 0.0)) < 1e-13);
  CHECK(std::abs(gamma({5.0, 0.0}) - Complex(24.0, 0.0)) < 1e-11);
  CHECK(std::abs(gamma({-0.5, 0.0}) - Complex(-2.0 * std::sqrt(M_PI), 0.0)) < 1e-12);
  // |Γ(iy)|² = π / (y sinh πy).
  const double y = 1.3;
  CHECK(std::norm(gamma({0.0, y})) == doctest::Approx(M_PI / (y * std::sinh(M_PI * y))).epsilon(1e-12));
  CHECK(std::abs(special::rgamma({-2.0, 0.0})) == 0.0);
}

TEST_CASE("sphere and ball constants") {
  CHECK(special::unit_sphere_area(2) == doctest::Approx(2 * M_PI));
  CHECK(special::unit_sphere_area(3) == doctest::Approx(4 * M_PI));
  CHECK(special::unit_ball_volume(4) == doctest::Approx(M_PI * M_PI / 2));
}

TEST_CASE("half-integer Bessel functions are elementary") {
  for (double x : {0.3, 1.0, 4.7, 12.0}) {
    const double j12 = std::sqrt(2.0 / (M_PI * x)) * std::sin(x);
    const double j32 = std::sqrt(2.0 / (M_PI * x)) * (std::sin(x) / x - std::cos(x));
    CHECK(bessel_j({0.5, 0.0}, x).real() == doctest::Approx(j12).epsilon(1e-12));
    CHECK(bessel_j({1.5, 0.0}, x).real() == doctest::Approx(j32).epsilon(1e-12));
  }
}

TEST_CASE("complex-order Bessel obeys the three-term recurrence") {
  const Complex nu{0.7, 1.1};
  for (double x : {0.5, 2.0, 6.0}) {
    const Complex lhs = bessel_j(nu - 1.0, x) + bessel_j(nu + 1.0, x);
    const Complex rhs = 2.0 * nu / x * bessel_j(nu, x);
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("reduced Bessel at zero is 1/Γ(ν+1)") {
  const Complex nu{1.5, 0.4};
  CHECK(std::abs(special::reduced_bessel(nu, 0.0) - special::rgamma(nu + 1.0)) < 1e-14);
  CHECK(std::abs(special::reduced_bessel(nu, 1e-4) - special::rgamma(nu + 1.0)) < 1e-8);
}
