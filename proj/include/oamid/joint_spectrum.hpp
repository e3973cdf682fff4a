#pragma once

#include <oamid/projection.hpp>
#include <oamid/spdc_spectrum.hpp>

#include <Eigen/Dense>
#include <json.hpp>

#include <map>
#include <ostream>
#include <vector>

namespace oamid {

// Two-photon amplitudes P(l_r, l_o) after the object, |l_r|, |l_o| <= l_max.
//
// Without the parity flip the reference photon of a pair carries l_p - l
// when the object photon enters with l, so
//   P(l_r, l_o) = C_{l_p - l_r} A_{l_o, l_p - l_r}
// and the no-object spectrum lies on l_r + l_o = l_p. With the flip the
// reference index is negated and the same cells sit on l_r = l_o (for
// l_p = 0).
class JointSpectrum
{
public:
    JointSpectrum() = default;
    JointSpectrum(int l_max, int l_p, bool parity_flip, Eigen::MatrixXcd amplitudes);

    int l_max() const { return l_max_; }
    int l_p() const { return l_p_; }
    bool parity_flip() const { return parity_flip_; }

    std::complex<double> amplitude(int l_r, int l_o) const { return amplitudes_(l_r + l_max_, l_o + l_max_); }
    double rate(int l_r, int l_o) const { return rates_(l_r + l_max_, l_o + l_max_); }
    const Eigen::MatrixXcd& amplitudes() const { return amplitudes_; }
    const Eigen::MatrixXd& rates() const { return rates_; }
    double total_rate() const { return rates_.sum(); }

    // l_r in the physical (unflipped) convention for a stored row index.
    int physical_reference(int stored_l_r) const { return parity_flip_ ? -stored_l_r : stored_l_r; }
    // m = l_o + l_r - l_p of a stored cell.
    int total_oam(int stored_l_r, int l_o) const { return l_o + physical_reference(stored_l_r) - l_p_; }

private:
    int l_max_ = 0;
    int l_p_ = 0;
    bool parity_flip_ = false;
    Eigen::MatrixXcd amplitudes_;
    Eigen::MatrixXd rates_;
};

// Throws std::invalid_argument if the truncation orders differ.
JointSpectrum synthesize(const NaturalSpectrum& spectrum, const OperatorMatrix& matrix);

// l_r -> -l_r, toggling the flag. An involution.
JointSpectrum apply_parity_flip(const JointSpectrum& js);

// Rates over l_o at the stored reference index l_r (unnormalized).
std::vector<double> cross_section(const JointSpectrum& js, int l_r);

// S_m = sum of rates with l_o + l_r - l_p = m (physical convention), for
// every m reachable in the truncation.
std::map<int, double> diagonal_sums(const JointSpectrum& js);

// Rate outside the conservation diagonal m = 0.
double off_diagonal_rate(const JointSpectrum& js);

struct IsolatedMatrix
{
    OperatorMatrix estimate;
    // valid(k + l_max, l + l_max) is false where |C_l| < floor; the
    // corresponding estimate entries are meaningless, not zero.
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> valid;

    bool is_valid(int k, int l) const { return valid(k + estimate.l_max(), l + estimate.l_max()); }
};

// A_kl = P(l_p - l, k) / C_l where |C_l| >= floor. Throws
// std::invalid_argument for floor <= 0, a truncation mismatch or when every
// coefficient is below the floor.
IsolatedMatrix isolate_object(const JointSpectrum& js, const NaturalSpectrum& spectrum, double floor);

nlohmann::json to_json(const JointSpectrum& js);

// "l_r,l_o,rate" for every cell.
void write_rates_csv(std::ostream& out, const JointSpectrum& js);
// "l_o,rate" at the given reference index.
void write_cross_section_csv(std::ostream& out, const JointSpectrum& js, int l_r);
// "m,rate,fraction".
void write_diagonal_sums_csv(std::ostream& out, const JointSpectrum& js);
// "l,rate" along the conservation diagonal (no-object histogram).
void write_conservation_diagonal_csv(std::ostream& out, const JointSpectrum& js);

} // namespace oamid
