#pragma once

#include <oamid/joint_spectrum.hpp>
#include <oamid/projection.hpp>
#include <oamid/spdc_spectrum.hpp>

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace oamid {

struct Cell
{
    int l_r = 0;
    int l_o = 0;

    friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct SimulationSpec
{
    double rate_scale = 1e5;   // counts per second at unit joint-spectrum rate (arbitrary)
    double integration_time = 1.0;  // seconds per cell and run
    int runs = 4;
    std::uint64_t seed = 1;
    double background_rate = 0.0;  // accidental coincidences per second; not modeled, must be 0

    double count_scale() const { return rate_scale * integration_time; }
    void validate() const;
};

// Coincidence counts per measured cell and run, in the cell convention of
// the joint spectrum they were drawn from.
struct CountTable
{
    int l_max = 0;
    int l_p = 0;
    bool parity_flip = false;
    SimulationSpec spec;
    std::vector<Cell> cells;
    std::vector<std::vector<std::int64_t>> counts;  // [cell][run]
    std::vector<double> mean;
    std::vector<double> stddev;  // sample standard deviation over runs (n - 1)

    std::optional<std::size_t> find(int l_r, int l_o) const;
    std::size_t runs() const { return static_cast<std::size_t>(spec.runs); }
};

struct MeasurementPlan
{
    std::vector<Cell> cells;
    int budget = 0;
    std::string strategy;
    std::vector<std::string> warnings;

    // Sequential measurement: one setting per cell and run.
    double total_time(const SimulationSpec& spec) const
    {
        return static_cast<double>(cells.size()) * spec.integration_time * spec.runs;
    }
};

// Poisson counts with mean count_scale * rate in every cell (or in the plan
// cells only). Each (cell, run) draws from its own stream derived from
// (seed, l_r, l_o, run), so the table does not depend on thread scheduling.
CountTable simulate_counts(const JointSpectrum& js, const SimulationSpec& spec,
                           const MeasurementPlan* plan = nullptr, unsigned threads = 0);

// reference_time * total(reference) / total(js).
double adjust_integration_time(const JointSpectrum& js, const JointSpectrum& reference, double reference_time);

enum class PlanStrategy { greedy, random };
PlanStrategy parse_plan_strategy(const std::string& name);

// Chooses up to `budget` distinct cells. Greedy: each step adds the cell that
// maximizes the smallest accumulated Hellinger separation
// (sqrt(r_a) - sqrt(r_b))^2 over candidate pairs that differ anywhere, ties
// broken by the summed separation and then by (l_r, l_o). Random: uniform
// sample with the seed. Candidates are synthesized with `spectrum`; the
// cells use the parity convention given.
MeasurementPlan plan_measurements(std::span<const OperatorMatrix> candidates, const NaturalSpectrum& spectrum,
                                  int budget, PlanStrategy strategy, std::uint64_t seed,
                                  bool parity_flip = false);
MeasurementPlan plan_measurements(std::span<const JointSpectrum> candidates, int budget, PlanStrategy strategy,
                                  std::uint64_t seed);

// |A_kl|^2 estimated from counts: the cell (l_r, l_o) measures
// k = l_o, l = l_p - l_r (physical convention).
struct Abs2Estimate
{
    int k = 0;
    int l = 0;
    double value = 0.0;
    double standard_error = 0.0;  // Poisson, from the mean count over runs
    double expected_counts = 0.0; // count_scale * |C_l|^2 * value, i.e. the mean count per run
};

std::vector<Abs2Estimate> isolate_abs2(const CountTable& table, const NaturalSpectrum& spectrum, double floor);

nlohmann::json to_json(const CountTable& table);
nlohmann::json to_json(const MeasurementPlan& plan);
CountTable count_table_from_json(const nlohmann::json& j);
MeasurementPlan plan_from_json(const nlohmann::json& j);
// Rows "l_r,l_o,run,counts" per run, then rows with run = mean and run = stddev.
void write_counts_csv(std::ostream& out, const CountTable& table);

} // namespace oamid
