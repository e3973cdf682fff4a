#pragma once

#include <complex>
#include <span>
#include <vector>

namespace oamid {

bool is_power_of_two(std::size_t n);

// In-place iterative radix-2 transform, X_m = sum_j x_j exp(-2 pi i j m / N).
// No normalization. Throws std::invalid_argument unless the length is a
// power of two.
void fft_inplace(std::span<std::complex<double>> data);

// Fourier-series coefficients of uniformly sampled periodic data:
// c_m = (1/N) sum_j x_j exp(-i m phi_j), phi_j = 2 pi j / N. Index m of
// the result lives at bin (m mod N).
std::vector<std::complex<double>> fourier_coefficients(std::span<const std::complex<double>> samples);

} // namespace oamid
