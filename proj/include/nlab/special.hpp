#pragma once

#include "nlab/grid.hpp"

namespace nlab::special {

// Γ(z) for complex z (Lanczos, g = 7) with reflection for Re z < 1/2.
Complex gamma(Complex z);
// 1/Γ(z); entire, exactly zero at the non-positive integers.
Complex rgamma(Complex z);

// |S^{d-1}|, the surface area of the unit sphere in R^d.
double unit_sphere_area(int d);
double unit_ball_volume(int d);

// J_ν(x) for complex order and real x >= 0.
Complex bessel_j(Complex nu, double x);

// Λ_ν(z) = (z/2)^{-ν} J_ν(z), entire in z with Λ_ν(0) = 1/Γ(ν+1).
Complex reduced_bessel(Complex nu, double z);

}  // namespace nlab::special
