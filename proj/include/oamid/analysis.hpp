#pragma once

#include <oamid/joint_spectrum.hpp>
#include <oamid/measurement.hpp>

#include <json.hpp>

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace oamid {

struct RatioRequest
{
    int m_a = 0;
    int m_b = 0;
};

struct CrossSectionRatio
{
    int m_a = 0;
    int m_b = 0;
    int l_r = 0;
    double rate_a = 0.0;  // summed over +-m_a within the row
    double rate_b = 0.0;
    std::optional<double> ratio;  // empty when rate_b == 0
};

struct SymmetryReport
{
    double total_rate = 0.0;
    std::map<int, double> signed_power;  // m -> fraction of total
    std::map<int, double> merged_power;  // |m| -> fraction, +-m summed
    std::optional<int> dominant_m;       // largest merged power with m != 0
    std::vector<std::pair<int, double>> harmonics;       // n * dominant_m, n >= 2, above threshold
    std::vector<std::pair<int, double>> subsymmetries;   // other m != 0 above threshold
    std::vector<CrossSectionRatio> cross_section_ratios;
    double threshold = 0.05;
};

// Powers below this fraction count as absent when picking dominant_m.
inline constexpr double kSignatureFloor = 1e-12;

// Throws std::invalid_argument for an empty (zero-rate) input or a threshold
// outside (0, 1).
SymmetryReport symmetry_report(const JointSpectrum& js, double threshold = 0.05,
                               const std::vector<RatioRequest>& ratios = {}, int ratio_l_r = 0);
// Uses the mean counts of the measured cells; unmeasured cells count as 0.
SymmetryReport symmetry_report(const CountTable& table, double threshold = 0.05,
                               const std::vector<RatioRequest>& ratios = {}, int ratio_l_r = 0);

CrossSectionRatio cross_section_ratio(const JointSpectrum& js, int l_r, int m_a, int m_b);

// Full-diagonal powers of the +-m_a and +-m_b families. A larger power is
// read as a larger region of the object carrying that symmetry; this is a
// heuristic proxy, not a measurement of area.
struct RegionComparison
{
    int m_a = 0;
    int m_b = 0;
    double power_a = 0.0;
    double power_b = 0.0;
    double ratio = 0.0;  // power_a / power_b (inf if power_b == 0)
    int larger = 0;      // m_a or m_b
    std::string note;
};

RegionComparison compare_region_sizes(const JointSpectrum& js, int m_a, int m_b);

struct Candidate
{
    std::string id;
    JointSpectrum expected;  // rates at unit count scale
};

struct IdentificationResult
{
    std::vector<std::pair<std::string, double>> scores;  // log-likelihood, candidate order
    std::string best;
    double confidence = 0.0;  // posterior of best under a uniform prior
    bool tie = false;
    bool anomaly = false;     // counts where every candidate expects none
    std::vector<std::string> warnings;
};

// Expected counts below this are raised to it so a single stray count does
// not give -inf.
inline constexpr double kExpectedCountFloor = 1e-9;

// Poisson log-likelihood of every run of every plan cell under each
// candidate, mean count_scale * rate. Phase-blind, hence rotation invariant.
IdentificationResult identify(const CountTable& measured, const MeasurementPlan& plan,
                              const std::vector<Candidate>& candidates, double count_scale);
IdentificationResult identify(const CountTable& measured, const MeasurementPlan& plan,
                              const std::vector<std::pair<std::string, OperatorMatrix>>& candidates,
                              const NaturalSpectrum& spectrum, double count_scale);

nlohmann::json to_json(const SymmetryReport& report);
nlohmann::json to_json(const RegionComparison& cmp);
nlohmann::json to_json(const IdentificationResult& result);

void print_report(std::ostream& out, const SymmetryReport& report);
void print_report(std::ostream& out, const IdentificationResult& result);

} // namespace oamid
