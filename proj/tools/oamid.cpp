// oamid: command-line front end for the OAM object-identification simulator.
//
//   oamid spectrum      joint spectrum, histograms and symmetry report
//   oamid simulate      Poisson coincidence counts (full grid or planned cells)
//   oamid identify      plan sparse measurements and identify the object
//   oamid oracle-check  fast projection against the direct double integral
//   oamid sweep-offset  six-to-three cross-section ratio over strip offsets

#include <oamid/analysis.hpp>
#include <oamid/joint_spectrum.hpp>
#include <oamid/measurement.hpp>
#include <oamid/oracle_harness.hpp>
#include <oamid/projection.hpp>
#include <oamid/run_config.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace oamid;

namespace {

struct CommonArgs
{
    std::string config;
    std::vector<std::string> sets;
    std::optional<std::string> out;
    std::optional<int> l_max;
    std::optional<double> eta;
    std::optional<std::string> spectrum_file;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, CommonArgs& a)
{
    cmd->add_option("-c,--config", a.config, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--set", a.sets, "override a config value, e.g. --set measurement.runs=8");
    cmd->add_option("-o,--out", a.out, "output directory (output.dir)");
    cmd->add_option("--l-max", a.l_max, "OAM truncation order (geometry.l_max)");
    cmd->add_option("--spdc-eta", a.eta, "geometric spectrum parameter (spdc.eta)");
    cmd->add_option("--spdc-file", a.spectrum_file, "measured spectrum CSV (spdc.file)");
    cmd->add_option("--seed", a.seed, "random seed (measurement.seed)");
    cmd->add_option("--threads", a.threads, "worker threads, 0 = all cores (projection.threads)");
}

RunConfig make_config(const CommonArgs& a)
{
    json doc = json::object();
    fs::path base = fs::current_path();
    if (!a.config.empty()) {
        std::ifstream in(a.config);
        if (!in)
            throw std::runtime_error("cannot open config " + a.config);
        doc = json::parse(in, nullptr, true, true);
        base = fs::absolute(a.config).parent_path();
    }
    if (a.out)
        doc["output"]["dir"] = *a.out;
    if (a.l_max)
        doc["geometry"]["l_max"] = *a.l_max;
    if (a.eta) {
        doc["spdc"]["eta"] = *a.eta;
        doc["spdc"]["file"] = "";
    }
    if (a.spectrum_file)
        doc["spdc"]["file"] = fs::absolute(*a.spectrum_file).string();
    if (a.seed)
        doc["measurement"]["seed"] = *a.seed;
    if (a.threads)
        doc["projection"]["threads"] = *a.threads;
    for (const auto& s : a.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects path=value, got '" + s + "'");
        apply_override(doc, s.substr(0, eq), s.substr(eq + 1));
    }
    RunConfig cfg = resolve_config(doc, base);
    if (cfg.output_dir.is_relative())
        cfg.output_dir = fs::current_path() / cfg.output_dir;
    return cfg;
}

// Writes files into the output directory, stamping each with the config hash.
class Output
{
public:
    explicit Output(const RunConfig& cfg) : cfg_(cfg), hash_(config_hash(cfg.document))
    {
        fs::create_directories(cfg.output_dir);
    }

    const std::string& hash() const { return hash_; }

    template <typename Writer>
    void csv(const std::string& name, Writer&& write)
    {
        if (!cfg_.wants("csv"))
            return;
        std::ofstream out = open(name);
        out << "# config_hash " << hash_ << '\n';
        write(out);
    }

    void json_file(const std::string& name, json body)
    {
        if (!cfg_.wants("json"))
            return;
        body["config_hash"] = hash_;
        std::ofstream out = open(name);
        out << body.dump(2) << '\n';
    }

    void text(const std::string& name, const std::string& body)
    {
        std::ofstream out = open(name);
        out << "# config_hash " << hash_ << '\n' << body;
    }

    void config_copy() { json_file("run_config.json", cfg_.document); }

private:
    std::ofstream open(const std::string& name)
    {
        const fs::path p = cfg_.output_dir / name;
        std::ofstream out(p);
        if (!out)
            throw std::runtime_error("cannot write " + p.string());
        written_.push_back(p);
        std::cerr << "wrote " << p.string() << '\n';
        return out;
    }

    const RunConfig& cfg_;
    std::string hash_;
    std::vector<fs::path> written_;
};

JointSpectrum joint_for(const RunConfig& cfg, const OperatorMatrix& matrix, const NaturalSpectrum& spectrum)
{
    JointSpectrum js = synthesize(spectrum, matrix);
    return cfg.parity_flip ? apply_parity_flip(js) : js;
}

std::string spectrum_plot_script(const RunConfig& cfg)
{
    std::ostringstream g;
    g << "set datafile separator ','\n"
      << "set key off\n"
      << "set terminal pngcairo size 1400,420\n"
      << "set output 'spectrum.png'\n"
      << "set multiplot layout 1,3\n"
      << "set title 'joint spectrum rates'\n"
      << "set xlabel 'l_o'\nset ylabel 'l_r" << (cfg.parity_flip ? " (flipped)" : "") << "'\n"
      << "plot 'joint_spectrum.csv' every ::1 using 2:1:3 with image\n"
      << "set title 'conservation diagonal'\nset xlabel 'l'\nset ylabel 'rate'\nset style fill solid\n"
      << "plot 'conservation_diagonal.csv' every ::1 using 1:2 with boxes\n"
      << "set title 'cross section at l_r = " << cfg.cross_section_l_r << "'\nset xlabel 'l_o'\n"
      << "plot 'cross_section.csv' every ::1 using 1:2 with boxes\n"
      << "unset multiplot\n";
    return g.str();
}

int cmd_spectrum(const CommonArgs& args)
{
    const RunConfig cfg = make_config(args);
    Output out(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const ObjectMask mask = cfg.mask();
    const NaturalSpectrum spectrum = cfg.spectrum();
    for (const auto& w : spectrum.warnings())
        std::cerr << "warning: " << w << '\n';
    const OperatorMatrix matrix = compute_matrix(mask, cfg.geometry.l_max, cfg.projection);
    const JointSpectrum js = joint_for(cfg, matrix, spectrum);
    const SymmetryReport report = symmetry_report(js, cfg.threshold, cfg.ratios, cfg.cross_section_l_r);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    out.config_copy();
    out.json_file("operator_matrix.json", to_json(flushed_for_report(matrix)));
    out.csv("operator_matrix_abs2.csv", [&](std::ostream& o) { write_abs2_csv(o, matrix); });
    out.json_file("joint_spectrum.json", to_json(js));
    out.csv("joint_spectrum.csv", [&](std::ostream& o) { write_rates_csv(o, js); });
    out.csv("conservation_diagonal.csv", [&](std::ostream& o) { write_conservation_diagonal_csv(o, js); });
    out.csv("cross_section.csv", [&](std::ostream& o) { write_cross_section_csv(o, js, cfg.cross_section_l_r); });
    out.csv("diagonal_sums.csv", [&](std::ostream& o) { write_diagonal_sums_csv(o, js); });
    json rep = to_json(report);
    rep["runtime_s"] = seconds;
    out.json_file("symmetry_report.json", rep);
    out.text("spectrum.gp", spectrum_plot_script(cfg));

    std::cout << "config " << out.hash() << "  l_max " << cfg.geometry.l_max << "  off-diagonal fraction "
              << off_diagonal_rate(js) / js.total_rate() << '\n';
    print_report(std::cout, report);
    return 0;
}

std::vector<std::pair<std::string, OperatorMatrix>> library_matrices(const RunConfig& cfg)
{
    std::vector<std::pair<std::string, OperatorMatrix>> lib;
    for (const auto& e : cfg.library)
        lib.emplace_back(e.id, compute_matrix(build_mask(e.mask, cfg.geometry, cfg.base_dir), cfg.geometry.l_max,
                                              cfg.projection));
    return lib;
}

MeasurementPlan make_plan(const RunConfig& cfg, const NaturalSpectrum& spectrum,
                          const std::vector<std::pair<std::string, OperatorMatrix>>& lib)
{
    if (lib.size() >= 2) {
        std::vector<OperatorMatrix> mats;
        for (const auto& [id, m] : lib)
            mats.push_back(m);
        return plan_measurements(mats, spectrum, cfg.budget, cfg.strategy, cfg.simulation.seed, cfg.parity_flip);
    }
    // Without a library there is nothing to discriminate: sample cells at random.
    std::vector<OperatorMatrix> two(2, OperatorMatrix(cfg.geometry.l_max));
    auto plan = plan_measurements(two, spectrum, cfg.budget, PlanStrategy::random, cfg.simulation.seed,
                                  cfg.parity_flip);
    plan.warnings.push_back("no candidate library; cells sampled at random");
    return plan;
}

int cmd_simulate(const CommonArgs& args)
{
    const RunConfig cfg = make_config(args);
    Output out(cfg);
    const NaturalSpectrum spectrum = cfg.spectrum();
    const OperatorMatrix matrix = compute_matrix(cfg.mask(), cfg.geometry.l_max, cfg.projection);
    const JointSpectrum js = joint_for(cfg, matrix, spectrum);

    std::optional<MeasurementPlan> plan;
    if (cfg.budget > 0) {
        plan = make_plan(cfg, spectrum, library_matrices(cfg));
        for (const auto& w : plan->warnings)
            std::cerr << "warning: " << w << '\n';
    }
    const CountTable table = simulate_counts(js, cfg.simulation, plan ? &*plan : nullptr, cfg.projection.threads);

    out.config_copy();
    out.csv("counts.csv", [&](std::ostream& o) { write_counts_csv(o, table); });
    out.json_file("counts.json", to_json(table));
    if (plan) {
        json p = to_json(*plan);
        p["total_time_s"] = plan->total_time(cfg.simulation);
        out.json_file("plan.json", p);
    }
    std::size_t total = 0;
    for (const auto& row : table.counts)
        for (auto n : row)
            total += static_cast<std::size_t>(n);
    std::cout << "config " << out.hash() << "  cells " << table.cells.size() << "  runs " << cfg.simulation.runs
              << "  total counts " << total << '\n';
    return 0;
}

int cmd_identify(const CommonArgs& args, const std::optional<std::string>& counts_path,
                 const std::optional<std::string>& plan_path)
{
    const RunConfig cfg = make_config(args);
    if (cfg.library.size() < 2)
        throw CLI::ValidationError("identify", "the library needs at least two entries (identify.library)");
    if (cfg.budget < 1 && !plan_path)
        throw CLI::ValidationError("identify", "a measurement budget of at least 1 is required (measurement.budget)");
    Output out(cfg);
    const NaturalSpectrum spectrum = cfg.spectrum();
    const auto lib = library_matrices(cfg);

    MeasurementPlan plan;
    if (plan_path) {
        std::ifstream in(*plan_path);
        if (!in)
            throw std::runtime_error("cannot open plan " + *plan_path);
        plan = plan_from_json(json::parse(in));
    } else {
        plan = make_plan(cfg, spectrum, lib);
    }
    for (const auto& w : plan.warnings)
        std::cerr << "warning: " << w << '\n';

    std::vector<Candidate> candidates;
    for (const auto& [id, m] : lib)
        candidates.push_back({id, joint_for(cfg, m, spectrum)});

    json result;
    result["plan"] = to_json(plan);
    result["plan"]["total_time_s"] = plan.total_time(cfg.simulation);
    if (counts_path) {
        std::ifstream in(*counts_path);
        if (!in)
            throw std::runtime_error("cannot open counts " + *counts_path);
        const CountTable table = count_table_from_json(json::parse(in));
        const auto res = identify(table, plan, candidates, table.spec.count_scale());
        result["identification"] = to_json(res);
        print_report(std::cout, res);
    } else {
        if (cfg.truth.empty())
            throw CLI::ValidationError("identify", "set identify.truth or pass --counts");
        ObjectMask truth_mask = cfg.library_mask(cfg.truth);
        if (cfg.truth_rotation != 0.0)
            truth_mask = rotate_mask(truth_mask, cfg.truth_rotation);
        const JointSpectrum truth =
            joint_for(cfg, compute_matrix(truth_mask, cfg.geometry.l_max, cfg.projection), spectrum);
        int correct = 0;
        json trials = json::array();
        IdentificationResult last;
        for (int t = 0; t < cfg.trials; ++t) {
            SimulationSpec spec = cfg.simulation;
            spec.seed = cfg.simulation.seed + static_cast<std::uint64_t>(t);
            const CountTable table = simulate_counts(truth, spec, &plan, cfg.projection.threads);
            last = identify(table, plan, candidates, spec.count_scale());
            correct += last.best == cfg.truth ? 1 : 0;
            trials.push_back({{"seed", spec.seed}, {"best", last.best}, {"confidence", last.confidence}});
        }
        result["truth"] = cfg.truth;
        result["truth_rotation"] = cfg.truth_rotation;
        result["trials"] = std::move(trials);
        result["accuracy"] = static_cast<double>(correct) / cfg.trials;
        result["identification"] = to_json(last);
        print_report(std::cout, last);
        std::cout << "accuracy " << correct << "/" << cfg.trials << '\n';
    }
    out.config_copy();
    out.json_file("identification.json", result);
    return 0;
}

int cmd_oracle(const CommonArgs& args, std::vector<int> orders)
{
    const RunConfig cfg = make_config(args);
    Output out(cfg);
    const ObjectMask mask = cfg.mask();
    const int l_max = std::min(cfg.geometry.l_max, kFactorizationMaxOrder);
    OracleGrid grid;
    grid.threads = cfg.projection.threads;
    const auto fact = check_factorization(mask, l_max, cfg.document["mask"].dump(), kFactorizationTolerance,
                                          cfg.projection, grid);
    std::vector<SelectionReport> sel;
    if (!orders.empty()) {
        const OperatorMatrix full = compute_matrix(mask, cfg.geometry.l_max, cfg.projection);
        for (int m : orders)
            sel.push_back(selection_rule_report(full, m, "m=" + std::to_string(m)));
    }
    const json report = harness_json({fact}, sel);
    out.json_file("oracle_report.json", report);
    std::cout << "factorization l_max " << l_max << "  max |fast - oracle| " << fact.max_abs_error << " at ("
              << fact.worst_k << ", " << fact.worst_l << ")  " << (fact.pass ? "pass" : "FAIL") << '\n';
    for (const auto& s : sel)
        std::cout << "selection rule m = " << s.m << "  max forbidden " << s.max_forbidden << "  "
                  << (s.pass ? "holds" : "violated") << '\n';
    return report["pass"].get<bool>() ? 0 : 1;
}

int cmd_sweep(const CommonArgs& args, double from, std::optional<double> to_opt, int steps)
{
    const RunConfig cfg = make_config(args);
    const double to = to_opt.value_or(0.2 * cfg.geometry.w0);
    if (steps < 1 || !(to >= from))
        throw CLI::ValidationError("sweep-offset", "need steps >= 1 and to >= from");
    Output out(cfg);
    const NaturalSpectrum spectrum = cfg.spectrum();
    const double width = cfg.document["mask"].value("width", kDefaultStripWidthFraction * cfg.geometry.w0);

    std::ostringstream rows;
    rows << "offset,ratio_6_3,fraction_3,fraction_6,dominant_m\n" << std::setprecision(10);
    for (int i = 0; i <= steps; ++i) {
        const double offset = from + (to - from) * i / steps;
        StripSpec s;
        s.width = width;
        s.offset = offset;
        const ObjectMask mask = make_cross(3, s, {}, cfg.geometry);
        const JointSpectrum js = joint_for(cfg, compute_matrix(mask, cfg.geometry.l_max, cfg.projection), spectrum);
        const auto rep = symmetry_report(js, cfg.threshold, {{6, 3}}, cfg.cross_section_l_r);
        const auto& r = rep.cross_section_ratios.front();
        rows << offset << ',' << (r.ratio ? *r.ratio : std::nan("")) << ',' << rep.merged_power.at(3) << ','
             << rep.merged_power.at(6) << ',' << (rep.dominant_m ? *rep.dominant_m : 0) << '\n';
    }
    out.text("offset_sweep.csv", rows.str());
    std::cout << rows.str();
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Correlated-OAM object identification: spectra, counts, identification"};
    app.require_subcommand(1);

    CommonArgs spectrum_args, simulate_args, identify_args, oracle_args, sweep_args;
    auto* spectrum = app.add_subcommand("spectrum", "joint spectrum, histograms and symmetry report");
    add_common(spectrum, spectrum_args);

    auto* simulate = app.add_subcommand("simulate", "Poisson coincidence counts with error bars");
    add_common(simulate, simulate_args);
    std::optional<int> sim_budget;
    simulate->add_option("--budget", sim_budget, "planned cells (measurement.budget, 0 = full grid)");

    auto* ident = app.add_subcommand("identify", "plan sparse measurements and identify the object");
    add_common(ident, identify_args);
    std::optional<int> id_budget;
    std::optional<std::string> counts_path, plan_path;
    ident->add_option("--budget", id_budget, "planned cells (measurement.budget)");
    ident->add_option("--counts", counts_path, "identify from a counts.json instead of simulating")
        ->check(CLI::ExistingFile);
    ident->add_option("--plan", plan_path, "use the cells of a plan.json")->check(CLI::ExistingFile);

    auto* oracle = app.add_subcommand("oracle-check", "compare the fast projection with the direct integral");
    add_common(oracle, oracle_args);
    std::vector<int> orders;
    oracle->add_option("--selection", orders, "symmetry orders m whose selection rule is checked");

    auto* sweep = app.add_subcommand("sweep-offset", "three-strip cross: 6:3 cross-section ratio versus offset");
    add_common(sweep, sweep_args);
    double from = 0.0;
    std::optional<double> to;
    int steps = 20;
    sweep->add_option("--from", from, "first offset (unit of geometry.w0)");
    sweep->add_option("--to", to, "last offset (default 0.2 w0)");
    sweep->add_option("--steps", steps, "number of intervals");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim_budget)
            simulate_args.sets.push_back("measurement.budget=" + std::to_string(*sim_budget));
        if (id_budget)
            identify_args.sets.push_back("measurement.budget=" + std::to_string(*id_budget));
        if (*spectrum)
            return cmd_spectrum(spectrum_args);
        if (*simulate)
            return cmd_simulate(simulate_args);
        if (*ident)
            return cmd_identify(identify_args, counts_path, plan_path);
        if (*oracle)
            return cmd_oracle(oracle_args, orders);
        if (*sweep)
            return cmd_sweep(sweep_args, from, to, steps);
    } catch (const CLI::Error& e) {
        app.exit(e);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
