#include <oamid/fft.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace oamid {

bool is_power_of_two(std::size_t n)
{
    return n != 0 && (n & (n - 1)) == 0;
}

void fft_inplace(std::span<std::complex<double>> data)
{
    const std::size_t n = data.size();
    if (!is_power_of_two(n))
        throw std::invalid_argument("fft length must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(data[i], data[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        for (std::size_t j = 0; j < half; ++j) {
            // twiddles from the exact angle to keep error O(eps log n)
            const std::complex<double> w =
                std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(len));
            for (std::size_t i = 0; i < n; i += len) {
                const std::complex<double> u = data[i + j];
                const std::complex<double> v = data[i + j + half] * w;
                data[i + j] = u + v;
                data[i + j + half] = u - v;
            }
        }
    }
}

std::vector<std::complex<double>> fourier_coefficients(std::span<const std::complex<double>> samples)
{
    std::vector<std::complex<double>> out(samples.begin(), samples.end());
    fft_inplace(out);
    const double scale = 1.0 / static_cast<double>(out.size());
    for (auto& c : out)
        c *= scale;
    return out;
}

} // namespace oamid
