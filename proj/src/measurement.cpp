#include <oamid/measurement.hpp>

#include <oamid/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace oamid {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, int l_r, int l_o, int run)
{
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(l_r)));
    h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(l_o)));
    return splitmix64(h ^ static_cast<std::uint64_t>(run));
}

std::vector<Cell> all_cells(int l_max)
{
    std::vector<Cell> cells;
    for (int l_r = -l_max; l_r <= l_max; ++l_r)
        for (int l_o = -l_max; l_o <= l_max; ++l_o)
            cells.push_back({l_r, l_o});
    return cells;
}

} // namespace

void SimulationSpec::validate() const
{
    if (!(rate_scale > 0.0))
        throw std::invalid_argument("rate_scale must be positive");
    if (!(integration_time > 0.0))
        throw std::invalid_argument("integration time must be positive");
    if (runs < 1)
        throw std::invalid_argument("runs must be at least 1");
    if (background_rate != 0.0)
        throw std::invalid_argument("background coincidences are not modeled; background_rate must be 0");
}

std::optional<std::size_t> CountTable::find(int l_r, int l_o) const
{
    const auto it = std::find(cells.begin(), cells.end(), Cell{l_r, l_o});
    if (it == cells.end())
        return std::nullopt;
    return static_cast<std::size_t>(it - cells.begin());
}

CountTable simulate_counts(const JointSpectrum& js, const SimulationSpec& spec, const MeasurementPlan* plan,
                           unsigned threads)
{
    spec.validate();
    CountTable table;
    table.l_max = js.l_max();
    table.l_p = js.l_p();
    table.parity_flip = js.parity_flip();
    table.spec = spec;
    table.cells = plan ? plan->cells : all_cells(js.l_max());
    for (const auto& c : table.cells) {
        if (std::abs(c.l_r) > js.l_max() || std::abs(c.l_o) > js.l_max())
            throw std::invalid_argument("plan cell outside the joint-spectrum truncation");
    }
    const std::size_t n = table.cells.size();
    table.counts.assign(n, std::vector<std::int64_t>(static_cast<std::size_t>(spec.runs), 0));
    table.mean.assign(n, 0.0);
    table.stddev.assign(n, 0.0);

    parallel_for(n, threads, [&](std::size_t i) {
        const Cell c = table.cells[i];
        const double mu = spec.count_scale() * js.rate(c.l_r, c.l_o);
        auto& row = table.counts[i];
        for (int run = 0; run < spec.runs; ++run) {
            if (mu > 0.0) {
                std::mt19937_64 rng(stream_seed(spec.seed, c.l_r, c.l_o, run));
                std::poisson_distribution<std::int64_t> draw(mu);
                row[static_cast<std::size_t>(run)] = draw(rng);
            }
        }
        double sum = 0.0;
        for (auto v : row)
            sum += static_cast<double>(v);
        const double mean = sum / spec.runs;
        double ss = 0.0;
        for (auto v : row)
            ss += (static_cast<double>(v) - mean) * (static_cast<double>(v) - mean);
        table.mean[i] = mean;
        table.stddev[i] = spec.runs > 1 ? std::sqrt(ss / (spec.runs - 1)) : 0.0;
    });
    return table;
}

double adjust_integration_time(const JointSpectrum& js, const JointSpectrum& reference, double reference_time)
{
    const double ref_total = reference.total_rate();
    if (!(ref_total > 0.0))
        throw std::invalid_argument("reference spectrum has zero total rate");
    const double total = js.total_rate();
    if (!(total > 0.0))
        throw std::invalid_argument("object transmits no light; integration time is unbounded");
    return reference_time * ref_total / total;
}

PlanStrategy parse_plan_strategy(const std::string& name)
{
    if (name == "greedy")
        return PlanStrategy::greedy;
    if (name == "random")
        return PlanStrategy::random;
    throw std::invalid_argument("unknown plan strategy '" + name + "' (greedy or random)");
}

MeasurementPlan plan_measurements(std::span<const JointSpectrum> candidates, int budget, PlanStrategy strategy,
                                  std::uint64_t seed)
{
    if (candidates.size() < 2)
        throw std::invalid_argument("planning needs at least two candidates");
    if (budget < 1)
        throw std::invalid_argument("measurement budget must be at least 1");
    const int L = candidates.front().l_max();
    for (const auto& c : candidates) {
        if (c.l_max() != L || c.parity_flip() != candidates.front().parity_flip())
            throw std::invalid_argument("candidates use different truncations or conventions");
    }

    MeasurementPlan plan;
    plan.strategy = strategy == PlanStrategy::greedy ? "greedy" : "random";
    const auto grid = all_cells(L);
    std::size_t take = static_cast<std::size_t>(budget);
    if (take > grid.size()) {
        plan.warnings.push_back("budget " + std::to_string(budget) + " exceeds the " + std::to_string(grid.size()) +
                                " grid cells; clamped");
        take = grid.size();
    }
    plan.budget = static_cast<int>(take);

    if (strategy == PlanStrategy::random) {
        auto cells = grid;
        std::mt19937_64 rng(seed);
        std::shuffle(cells.begin(), cells.end(), rng);
        cells.resize(take);
        plan.cells = std::move(cells);
        return plan;
    }

    // sqrt rates per candidate and cell
    const std::size_t nc = candidates.size();
    std::vector<std::vector<double>> root(nc, std::vector<double>(grid.size()));
    for (std::size_t c = 0; c < nc; ++c)
        for (std::size_t i = 0; i < grid.size(); ++i)
            root[c][i] = std::sqrt(candidates[c].rate(grid[i].l_r, grid[i].l_o));

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < nc; ++a) {
        for (std::size_t b = a + 1; b < nc; ++b) {
            bool differs = false;
            for (std::size_t i = 0; i < grid.size() && !differs; ++i)
                differs = std::abs(root[a][i] - root[b][i]) > 0.0;
            if (differs)
                pairs.emplace_back(a, b);
        }
    }
    std::vector<double> accumulated(pairs.size(), 0.0);
    std::vector<bool> used(grid.size(), false);
    constexpr double kTie = 1e-12;

    if (pairs.empty())
        plan.warnings.push_back("candidates have identical rates; no cell separates them");

    for (std::size_t step = 0; step < take; ++step) {
        std::size_t best = grid.size();
        double best_min = -1.0;
        double best_sum = -1.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (used[i])
                continue;
            double lo = std::numeric_limits<double>::infinity();
            double sum = 0.0;
            if (pairs.empty()) {
                // nothing to separate: prefer bright cells
                lo = 0.0;
                for (std::size_t c = 0; c < nc; ++c)
                    sum += root[c][i] * root[c][i];
            }
            for (std::size_t p = 0; p < pairs.size(); ++p) {
                const double d = root[pairs[p].first][i] - root[pairs[p].second][i];
                const double v = accumulated[p] + d * d;
                lo = std::min(lo, v);
                sum += v;
            }
            const double scale = std::max({std::abs(lo), std::abs(best_min), 1e-300});
            bool better = false;
            if (best == grid.size() || lo > best_min + kTie * scale)
                better = true;
            else if (std::abs(lo - best_min) <= kTie * scale &&
                     sum > best_sum + kTie * std::max(std::abs(sum), 1e-300))
                better = true;
            if (better) {
                best = i;
                best_min = lo;
                best_sum = sum;
            }
        }
        used[best] = true;
        plan.cells.push_back(grid[best]);
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const double d = root[pairs[p].first][best] - root[pairs[p].second][best];
            accumulated[p] += d * d;
        }
    }
    return plan;
}

MeasurementPlan plan_measurements(std::span<const OperatorMatrix> candidates, const NaturalSpectrum& spectrum,
                                  int budget, PlanStrategy strategy, std::uint64_t seed, bool parity_flip)
{
    std::vector<JointSpectrum> spectra;
    spectra.reserve(candidates.size());
    for (const auto& m : candidates) {
        auto js = synthesize(spectrum, m);
        spectra.push_back(parity_flip ? apply_parity_flip(js) : std::move(js));
    }
    return plan_measurements(spectra, budget, strategy, seed);
}

std::vector<Abs2Estimate> isolate_abs2(const CountTable& table, const NaturalSpectrum& spectrum, double floor)
{
    if (!(floor > 0.0))
        throw std::invalid_argument("isolation floor must be positive");
    if (spectrum.l_max() != table.l_max)
        throw std::invalid_argument("spectrum and count table have different l_max");
    std::vector<Abs2Estimate> out;
    const double scale = table.spec.count_scale();
    for (std::size_t i = 0; i < table.cells.size(); ++i) {
        const Cell c = table.cells[i];
        const int phys_r = table.parity_flip ? -c.l_r : c.l_r;
        const int l = table.l_p - phys_r;
        const double c2 = std::norm(spectrum(l));
        if (std::sqrt(c2) < floor)
            continue;
        Abs2Estimate e;
        e.k = c.l_o;
        e.l = l;
        e.value = table.mean[i] / (scale * c2);
        e.standard_error = std::sqrt(table.mean[i] / static_cast<double>(table.runs())) / (scale * c2);
        e.expected_counts = table.mean[i];
        out.push_back(e);
    }
    return out;
}

nlohmann::json to_json(const CountTable& table)
{
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t i = 0; i < table.cells.size(); ++i) {
        cells.push_back({{"l_r", table.cells[i].l_r},
                         {"l_o", table.cells[i].l_o},
                         {"counts", table.counts[i]},
                         {"mean", table.mean[i]},
                         {"stddev", table.stddev[i]}});
    }
    return {{"l_max", table.l_max},
            {"l_p", table.l_p},
            {"parity_flip", table.parity_flip},
            {"metadata",
             {{"seed", table.spec.seed},
              {"integration_time_s", table.spec.integration_time},
              {"rate_scale", table.spec.rate_scale},
              {"rate_scale_note", "arbitrary: folds pump power, coupling and detector efficiency"},
              {"runs", table.spec.runs},
              {"background_rate", table.spec.background_rate}}},
            {"cells", std::move(cells)}};
}

nlohmann::json to_json(const MeasurementPlan& plan)
{
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : plan.cells)
        cells.push_back({c.l_r, c.l_o});
    return {{"strategy", plan.strategy}, {"budget", plan.budget}, {"cells", std::move(cells)}, {"warnings", plan.warnings}};
}

CountTable count_table_from_json(const nlohmann::json& j)
{
    CountTable t;
    try {
        t.l_max = j.at("l_max").get<int>();
        t.l_p = j.value("l_p", 0);
        t.parity_flip = j.value("parity_flip", false);
        const auto& meta = j.at("metadata");
        t.spec.seed = meta.at("seed").get<std::uint64_t>();
        t.spec.integration_time = meta.at("integration_time_s").get<double>();
        t.spec.rate_scale = meta.at("rate_scale").get<double>();
        t.spec.runs = meta.at("runs").get<int>();
        t.spec.background_rate = meta.value("background_rate", 0.0);
        for (const auto& c : j.at("cells")) {
            t.cells.push_back({c.at("l_r").get<int>(), c.at("l_o").get<int>()});
            t.counts.push_back(c.at("counts").get<std::vector<std::int64_t>>());
            t.mean.push_back(c.at("mean").get<double>());
            t.stddev.push_back(c.at("stddev").get<double>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("count table json: ") + e.what());
    }
    t.spec.validate();
    for (std::size_t i = 0; i < t.cells.size(); ++i) {
        if (t.counts[i].size() != t.runs())
            throw std::invalid_argument("count table json: run count mismatch");
        for (auto n : t.counts[i])
            if (n < 0)
                throw std::invalid_argument("count table json: negative count");
    }
    return t;
}

MeasurementPlan plan_from_json(const nlohmann::json& j)
{
    MeasurementPlan p;
    p.strategy = j.value("strategy", "");
    p.budget = j.value("budget", 0);
    for (const auto& c : j.at("cells"))
        p.cells.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
    return p;
}

void write_counts_csv(std::ostream& out, const CountTable& table)
{
    out << "l_r,l_o,run,counts\n";
    for (std::size_t i = 0; i < table.cells.size(); ++i)
        for (std::size_t r = 0; r < table.counts[i].size(); ++r)
            out << table.cells[i].l_r << ',' << table.cells[i].l_o << ',' << r << ',' << table.counts[i][r] << '\n';
    out << std::setprecision(17);
    for (std::size_t i = 0; i < table.cells.size(); ++i)
        out << table.cells[i].l_r << ',' << table.cells[i].l_o << ",mean," << table.mean[i] << '\n';
    for (std::size_t i = 0; i < table.cells.size(); ++i)
        out << table.cells[i].l_r << ',' << table.cells[i].l_o << ",stddev," << table.stddev[i] << '\n';
}

} // namespace oamid
