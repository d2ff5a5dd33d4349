#pragma once

#include <span>

namespace lacelab::detail {

// int_{t0}^inf (d/(2 pi K1 t))^{d/2} exp(-d r2/(2 K1 t)) dt for d >= 3.
double gaussian_tail_integral(int d, double K1, double r2, double t0);

// Leading Gaussian density (d/(2 pi K1 t))^{d/2} exp(-d r2/(2 K1 t)).
double gaussian_density(int d, double K1, double r2, double t);

// Extrapolates values v_i = v + sum_e c_e h_i^{e} to h -> 0; uses the first size-1 exponents.
double richardson(std::span<const double> h, std::span<const double> v, std::span<const double> exponents);

}  // namespace lacelab::detail
