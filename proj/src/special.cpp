#include "nlab/special.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>

#include "nlab/errors.hpp"
#include "nlab/quadrature.hpp"

namespace nlab::special {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                               771.32342877765313,   -176.61502916214059,   12.507343278686905,
                               -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

Complex gamma_right(Complex z) {
  z -= 1.0;
  Complex x = kLanczos[0];
  for (int i = 1; i < 9; ++i) x += kLanczos[i] / (z + static_cast<double>(i));
  const Complex t = z + kLanczosG + 0.5;
  return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

bool is_real(Complex z) { return z.imag() == 0.0; }

// Power series Σ (-z²/4)^k / (k! Γ(k+ν+1)); accurate for moderate z.
Complex reduced_series(Complex nu, double z) {
  const double q = -0.25 * z * z;
  // When ν is a negative integer the leading coefficients vanish and the
  // term recurrence cannot start, so evaluate each coefficient directly.
  const bool negative_integer = is_real(nu) && nu.real() < 0.0 && nu.real() == std::floor(nu.real());
  Complex sum = 0.0;
  if (negative_integer) {
    double qk_over_kfact = 1.0;
    for (int k = 0; k < 120; ++k) {
      if (k > 0) qk_over_kfact *= q / k;
      sum += qk_over_kfact * rgamma(nu + static_cast<double>(k) + 1.0);
    }
    return sum;
  }
  Complex term = rgamma(nu + 1.0);
  sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * (nu + static_cast<double>(k)));
    sum += term;
    if (k > 4 && std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Schläfli integral, valid for complex ν and x > 0:
//   J_ν(x) = (1/π) ∫_0^π cos(νθ - x sinθ) dθ - (sin νπ / π) ∫_0^∞ e^{-x sinh s - ν s} ds
Complex bessel_schlafli(Complex nu, double x) {
  const int panels = 8 + static_cast<int>(std::ceil((x + std::abs(nu)) / 2.0));
  Complex first = integrate([&](double th) { return std::cos(nu * th - x * std::sin(th)); }, 0.0, kPi, 24, panels);
  first /= kPi;
  const Complex s_nu = std::sin(nu * kPi);
  if (std::abs(s_nu) == 0.0) return first;
  // Upper limit where the exponent has dropped by ~60 from its peak.
  double upper = 1.0;
  auto expo = [&](double s) { return -x * std::sinh(s) - nu.real() * s; };
  double peak = 0.0;
  for (double s = 0.0; s < 50.0; s += 0.05) peak = std::max(peak, expo(s));
  while (expo(upper) > peak - 60.0 && upper < 60.0) upper *= 1.25;
  Complex second = integrate([&](double s) { return std::exp(-x * std::sinh(s) - nu * s); }, 0.0, upper, 24, 48);
  return first - s_nu / kPi * second;
}

}  // namespace

Complex gamma(Complex z) {
  if (z.real() < 0.5) return kPi / (std::sin(kPi * z) * gamma_right(1.0 - z));
  return gamma_right(z);
}

Complex rgamma(Complex z) {
  if (is_real(z) && z.real() <= 0.0 && z.real() == std::floor(z.real())) return 0.0;
  if (z.real() < 0.5) return std::sin(kPi * z) * gamma_right(1.0 - z) / kPi;
  return 1.0 / gamma_right(z);
}

double unit_sphere_area(int d) { return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d); }

double unit_ball_volume(int d) { return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

Complex bessel_j(Complex nu, double x) {
  require(x >= 0.0, "bessel_j needs x >= 0");
  if (x == 0.0) {
    if (nu == Complex(0.0)) return 1.0;
    return 0.0;  // Re ν > 0 assumed at the origin; callers use reduced_bessel there.
  }
  if (is_real(nu)) return boost::math::cyl_bessel_j(nu.real(), x);
  if (x <= 4.0) return std::pow(Complex(0.5 * x), nu) * reduced_series(nu, x);
  return bessel_schlafli(nu, x);
}

Complex reduced_bessel(Complex nu, double z) {
  require(z >= 0.0, "reduced_bessel needs z >= 0");
  if (z <= 4.0) return reduced_series(nu, z);
  return std::pow(Complex(0.5 * z), -nu) * bessel_j(nu, z);
}

}  // namespace nlab::special
