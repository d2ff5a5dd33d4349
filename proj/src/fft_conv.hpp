#pragma once

#include <complex>
#include <span>
#include <vector>

namespace lacelab::detail {

// Periodic convolution of two real arrays laid out with the origin at index 0
// along every axis (each of extent n).
std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b, int d, int n);

}  // namespace lacelab::detail
