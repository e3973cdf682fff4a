#pragma once

#include <complex>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

namespace oamid {

// Natural OAM spectrum C_l of the down-converted pair, |l| <= l_max,
// normalized to sum |C_l|^2 = 1. The pump carries OAM l_p (0 for a
// Gaussian pump).
class NaturalSpectrum
{
public:
    NaturalSpectrum() = default;
    // Normalizes `coefficients` (index l + l_max). Throws
    // std::invalid_argument on a size mismatch or an all-zero spectrum.
    NaturalSpectrum(int l_max, std::vector<std::complex<double>> coefficients, std::string source, int l_p = 0);

    int l_max() const { return l_max_; }
    int l_p() const { return l_p_; }
    const std::string& source() const { return source_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    const std::vector<std::complex<double>>& coefficients() const { return coefficients_; }

    // C_l, 0 outside the truncation.
    std::complex<double> operator()(int l) const;

    // Largest relative mismatch between |C_l| and |C_-l|.
    double asymmetry() const;

    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }
    NaturalSpectrum with_pump(int l_p) const;

private:
    int l_max_ = 0;
    int l_p_ = 0;
    std::vector<std::complex<double>> coefficients_;
    std::string source_;
    std::vector<std::string> warnings_;
};

// C_l proportional to eta^|l|, 0 < eta < 1.
NaturalSpectrum parametric_spectrum(double eta, int l_max);

// CSV rows "l,re,im" or "l,magnitude"; '#' comments and a non-numeric header
// line are skipped. Indices outside the truncation are ignored, missing ones
// are 0. Warns when |C_l| and |C_-l| differ by more than 5%.
NaturalSpectrum load_spectrum(const std::filesystem::path& path, int l_max);
NaturalSpectrum parse_spectrum_csv(std::istream& in, int l_max, const std::string& source);

nlohmann::json to_json(const NaturalSpectrum& spectrum);

} // namespace oamid
