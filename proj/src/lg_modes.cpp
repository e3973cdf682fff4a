#include <oamid/lg_modes.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace oamid {

namespace {

constexpr int kTableSize = 257;

const std::array<double, kTableSize>& log_factorial_table()
{
    static const std::array<double, kTableSize> table = [] {
        std::array<double, kTableSize> t{};
        long double acc = 0.0L;
        t[0] = 0.0;
        for (int n = 1; n < kTableSize; ++n) {
            acc += std::log(static_cast<long double>(n));
            t[n] = static_cast<double>(acc);
        }
        return t;
    }();
    return table;
}

void check_index(LGIndex idx)
{
    if (idx.abs() > kMaxModeIndex)
        throw std::invalid_argument("mode index |l| = " + std::to_string(idx.abs()) +
                                    " exceeds guard " + std::to_string(kMaxModeIndex));
}

} // namespace

void ModeGeometry::validate() const
{
    if (!(w0 > 0.0) || !std::isfinite(w0))
        throw std::invalid_argument("beam waist w0 must be positive");
    if (l_max < 1 || l_max > kMaxModeIndex)
        throw std::invalid_argument("l_max must lie in [1, " + std::to_string(kMaxModeIndex) + "]");
}

double ModeGeometry::rho_from_radius(double r) const
{
    return std::numbers::sqrt2 * r / w0;
}

double ModeGeometry::radius_from_rho(double rho) const
{
    return rho * w0 / std::numbers::sqrt2;
}

double log_factorial(int n)
{
    if (n < 0)
        throw std::invalid_argument("log_factorial of negative argument");
    if (n < kTableSize)
        return log_factorial_table()[static_cast<std::size_t>(n)];
    return std::lgamma(static_cast<double>(n) + 1.0);
}

double mode_normalization(LGIndex idx)
{
    check_index(idx);
    return std::exp(0.5 * (std::log(2.0 / std::numbers::pi) - log_factorial(idx.abs())));
}

std::complex<double> mode_amplitude(LGIndex idx, double rho, double phi)
{
    check_index(idx);
    if (!(rho >= 0.0))
        throw std::invalid_argument("mode_amplitude requires rho >= 0");
    const int a = idx.abs();
    double radial;
    if (rho == 0.0) {
        radial = a == 0 ? mode_normalization(idx) : 0.0;
    } else {
        const double log_mag = 0.5 * (std::log(2.0 / std::numbers::pi) - log_factorial(a)) +
                               a * std::log(rho) - 0.5 * rho * rho;
        radial = std::exp(log_mag);
    }
    return std::polar(radial, idx.l * phi);
}

double ring_radius(LGIndex k, LGIndex l, const ModeGeometry& geometry)
{
    return geometry.w0 * std::sqrt(0.5 * (k.abs() + l.abs()));
}

} // namespace oamid
