#pragma once

#include <complex>
#include <cstdlib>

namespace oamid {

// Largest |l| accepted by the mode functions. ln(|l|!) is computed in log
// space, so this only bounds the index range, not an overflow.
inline constexpr int kMaxModeIndex = 170;

// Azimuthal index l of a p = 0 Laguerre-Gauss mode.
struct LGIndex
{
    int l = 0;

    constexpr LGIndex() = default;
    constexpr explicit LGIndex(int value) : l(value) {}

    constexpr int abs() const { return l < 0 ? -l : l; }
    friend constexpr bool operator==(LGIndex, LGIndex) = default;
};

// Beam waist (physical length unit of the caller, e.g. micrometres) and the
// OAM truncation order. All radial work uses rho = sqrt(2) r / w0.
struct ModeGeometry
{
    double w0 = 1.0;
    int l_max = 12;

    // Throws std::invalid_argument unless w0 > 0 and 1 <= l_max <= kMaxModeIndex.
    void validate() const;

    double rho_from_radius(double r) const;
    double radius_from_rho(double rho) const;
    int dimension() const { return 2 * l_max + 1; }
    bool contains(LGIndex idx) const { return idx.abs() <= l_max; }
};

// ln(n!) to better than 1e-13 relative. Exact table up to n = 256,
// lgamma beyond.
double log_factorial(int n);

// Normalization N_l = sqrt(2 / (pi |l|!)) of the p = 0 mode in the scaled
// coordinate. With the area element (1/2) rho drho dphi (i.e. r dr dphi in
// units of w0^2) the modes have unit norm.
double mode_normalization(LGIndex idx);

// u_l(rho, phi) = N_l rho^|l| exp(-rho^2 / 2) exp(i l phi).
// Throws std::invalid_argument for rho < 0 or |l| > kMaxModeIndex.
std::complex<double> mode_amplitude(LGIndex idx, double rho, double phi);

// Radius w0 sqrt((|k| + |l|) / 2): the maximum of the annular intensity
// |u_n|^2 with n = |k| + |l|, i.e. the object ring probed by A_kl.
double ring_radius(LGIndex k, LGIndex l, const ModeGeometry& geometry);

} // namespace oamid
