#include <oamid/analysis.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace oamid {

namespace {

JointSpectrum from_counts(const CountTable& table)
{
    const int L = table.l_max;
    Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(2 * L + 1, 2 * L + 1);
    for (std::size_t i = 0; i < table.cells.size(); ++i)
        amp(table.cells[i].l_r + L, table.cells[i].l_o + L) = std::sqrt(std::max(table.mean[i], 0.0));
    return JointSpectrum(L, table.l_p, table.parity_flip, std::move(amp));
}

double family_power(const std::map<int, double>& sums, int m)
{
    double p = 0.0;
    if (auto it = sums.find(m); it != sums.end())
        p += it->second;
    if (m != 0) {
        if (auto it = sums.find(-m); it != sums.end())
            p += it->second;
    }
    return p;
}

} // namespace

CrossSectionRatio cross_section_ratio(const JointSpectrum& js, int l_r, int m_a, int m_b)
{
    if (std::abs(l_r) > js.l_max())
        throw std::out_of_range("cross-section index outside truncation");
    CrossSectionRatio r{m_a, m_b, l_r, 0.0, 0.0, std::nullopt};
    const int a = std::abs(m_a);
    const int b = std::abs(m_b);
    for (int l_o = -js.l_max(); l_o <= js.l_max(); ++l_o) {
        const int m = std::abs(js.total_oam(l_r, l_o));
        if (m == a)
            r.rate_a += js.rate(l_r, l_o);
        if (m == b)
            r.rate_b += js.rate(l_r, l_o);
    }
    if (r.rate_b > 0.0)
        r.ratio = r.rate_a / r.rate_b;
    return r;
}

SymmetryReport symmetry_report(const JointSpectrum& js, double threshold, const std::vector<RatioRequest>& ratios,
                               int ratio_l_r)
{
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("threshold must lie in (0, 1)");
    SymmetryReport rep;
    rep.threshold = threshold;
    rep.total_rate = js.total_rate();
    if (!(rep.total_rate > 0.0))
        throw std::invalid_argument("joint spectrum carries no rate");

    for (const auto& [m, s] : diagonal_sums(js)) {
        const double f = s / rep.total_rate;
        rep.signed_power[m] = f;
        rep.merged_power[std::abs(m)] += f;
    }

    double best = kSignatureFloor;
    for (const auto& [m, f] : rep.merged_power) {
        if (m != 0 && f > best) {
            best = f;
            rep.dominant_m = m;
        }
    }
    if (rep.dominant_m) {
        const int d = *rep.dominant_m;
        for (const auto& [m, f] : rep.merged_power) {
            if (m == 0 || m == d || f < threshold)
                continue;
            if (m % d == 0)
                rep.harmonics.emplace_back(m, f);
            else
                rep.subsymmetries.emplace_back(m, f);
        }
    }
    for (const auto& req : ratios)
        rep.cross_section_ratios.push_back(cross_section_ratio(js, ratio_l_r, req.m_a, req.m_b));
    return rep;
}

SymmetryReport symmetry_report(const CountTable& table, double threshold, const std::vector<RatioRequest>& ratios,
                               int ratio_l_r)
{
    return symmetry_report(from_counts(table), threshold, ratios, ratio_l_r);
}

RegionComparison compare_region_sizes(const JointSpectrum& js, int m_a, int m_b)
{
    if (std::abs(m_a) == std::abs(m_b))
        throw std::invalid_argument("compare_region_sizes needs two different symmetry orders");
    const auto sums = diagonal_sums(js);
    RegionComparison c;
    c.m_a = std::abs(m_a);
    c.m_b = std::abs(m_b);
    c.power_a = family_power(sums, c.m_a);
    c.power_b = family_power(sums, c.m_b);
    if (c.power_a == 0.0 && c.power_b == 0.0)
        throw std::invalid_argument("neither symmetry order carries any power");
    c.ratio = c.power_b > 0.0 ? c.power_a / c.power_b : std::numeric_limits<double>::infinity();
    c.larger = c.power_a >= c.power_b ? c.m_a : c.m_b;
    c.note = "heuristic: full-diagonal power used as a proxy for the size of the region carrying each symmetry";
    return c;
}

IdentificationResult identify(const CountTable& measured, const MeasurementPlan& plan,
                              const std::vector<Candidate>& candidates, double count_scale)
{
    if (candidates.empty())
        throw std::invalid_argument("identification needs at least one candidate");
    if (!(count_scale > 0.0))
        throw std::invalid_argument("count scale must be positive");
    std::vector<std::size_t> rows;
    for (const auto& c : plan.cells) {
        const auto idx = measured.find(c.l_r, c.l_o);
        if (!idx)
            throw std::invalid_argument("measured counts do not cover plan cell (" + std::to_string(c.l_r) + ", " +
                                        std::to_string(c.l_o) + ")");
        rows.push_back(*idx);
    }
    for (const auto& cand : candidates) {
        if (cand.expected.l_max() != measured.l_max || cand.expected.parity_flip() != measured.parity_flip)
            throw std::invalid_argument("candidate " + cand.id + " does not match the count table convention");
    }

    IdentificationResult res;
    for (const auto& cand : candidates) {
        double ll = 0.0;
        for (const auto i : rows) {
            const Cell c = measured.cells[i];
            const double mu = std::max(count_scale * cand.expected.rate(c.l_r, c.l_o), kExpectedCountFloor);
            for (const auto n : measured.counts[i]) {
                const auto nd = static_cast<double>(n);
                ll += nd * std::log(mu) - mu - std::lgamma(nd + 1.0);
            }
        }
        res.scores.emplace_back(cand.id, ll);
    }

    for (const auto i : rows) {
        const Cell c = measured.cells[i];
        const bool observed = std::any_of(measured.counts[i].begin(), measured.counts[i].end(),
                                          [](auto n) { return n > 0; });
        const bool expected = std::any_of(candidates.begin(), candidates.end(),
                                          [&](const Candidate& k) {
                                              return count_scale * k.expected.rate(c.l_r, c.l_o) > kExpectedCountFloor;
                                          });
        if (observed && !expected) {
            res.anomaly = true;
            res.warnings.push_back("counts in cell (" + std::to_string(c.l_r) + ", " + std::to_string(c.l_o) +
                                   ") where no candidate expects any");
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < res.scores.size(); ++i) {
        if (res.scores[i].second > res.scores[best].second)
            best = i;
    }
    const double top = res.scores[best].second;
    double z = 0.0;
    for (const auto& [id, s] : res.scores) {
        z += std::exp(s - top);
        if (&id != &res.scores[best].first && std::abs(s - top) <= 1e-9 * std::max(1.0, std::abs(top)))
            res.tie = true;
    }
    res.best = res.scores[best].first;
    res.confidence = 1.0 / z;
    return res;
}

IdentificationResult identify(const CountTable& measured, const MeasurementPlan& plan,
                              const std::vector<std::pair<std::string, OperatorMatrix>>& candidates,
                              const NaturalSpectrum& spectrum, double count_scale)
{
    if (spectrum.l_p() != measured.l_p)
        throw std::invalid_argument("spectrum pump OAM differs from the count table");
    std::vector<Candidate> cands;
    for (const auto& [id, matrix] : candidates) {
        auto js = synthesize(spectrum, matrix);
        cands.push_back({id, measured.parity_flip ? apply_parity_flip(js) : std::move(js)});
    }
    return identify(measured, plan, cands, count_scale);
}

nlohmann::json to_json(const SymmetryReport& r)
{
    nlohmann::json signed_power = nlohmann::json::object();
    for (const auto& [m, f] : r.signed_power)
        signed_power[std::to_string(m)] = f;
    nlohmann::json merged = nlohmann::json::object();
    for (const auto& [m, f] : r.merged_power)
        merged[std::to_string(m)] = f;
    auto pairs = [](const std::vector<std::pair<int, double>>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& [m, f] : v)
            a.push_back({{"m", m}, {"fraction", f}});
        return a;
    };
    nlohmann::json ratios = nlohmann::json::array();
    for (const auto& c : r.cross_section_ratios) {
        ratios.push_back({{"m_a", c.m_a},
                          {"m_b", c.m_b},
                          {"l_r", c.l_r},
                          {"rate_a", c.rate_a},
                          {"rate_b", c.rate_b},
                          {"ratio", c.ratio ? nlohmann::json(*c.ratio) : nlohmann::json(nullptr)}});
    }
    return {{"total_rate", r.total_rate},
            {"threshold", r.threshold},
            {"diagonal_power", std::move(signed_power)},
            {"merged_power", std::move(merged)},
            {"dominant_m", r.dominant_m ? nlohmann::json(*r.dominant_m) : nlohmann::json(nullptr)},
            {"harmonics", pairs(r.harmonics)},
            {"subsymmetries", pairs(r.subsymmetries)},
            {"cross_section_ratios", std::move(ratios)}};
}

nlohmann::json to_json(const RegionComparison& c)
{
    return {{"m_a", c.m_a},
            {"m_b", c.m_b},
            {"power_a", c.power_a},
            {"power_b", c.power_b},
            {"ratio", std::isfinite(c.ratio) ? nlohmann::json(c.ratio) : nlohmann::json("inf")},
            {"larger", c.larger},
            {"note", c.note}};
}

nlohmann::json to_json(const IdentificationResult& r)
{
    nlohmann::json scores = nlohmann::json::array();
    for (const auto& [id, s] : r.scores)
        scores.push_back({{"id", id}, {"log_likelihood", s}});
    return {{"scores", std::move(scores)},
            {"best", r.best},
            {"confidence", r.confidence},
            {"tie", r.tie},
            {"anomaly", r.anomaly},
            {"warnings", r.warnings}};
}

void print_report(std::ostream& out, const SymmetryReport& r)
{
    out << std::fixed << std::setprecision(6);
    out << "  |m|   fraction\n";
    for (const auto& [m, f] : r.merged_power) {
        if (f > 0.0)
            out << std::setw(5) << m << "   " << f << '\n';
    }
    out << "dominant m: " << (r.dominant_m ? std::to_string(*r.dominant_m) : std::string("none")) << '\n';
    for (const auto& [m, f] : r.harmonics)
        out << "harmonic m = " << m << "  fraction " << f << '\n';
    for (const auto& [m, f] : r.subsymmetries)
        out << "subsymmetry m = " << m << "  fraction " << f << '\n';
    for (const auto& c : r.cross_section_ratios) {
        out << "cross-section l_r = " << c.l_r << "  " << c.m_a << ":" << c.m_b << " = ";
        if (c.ratio)
            out << *c.ratio << '\n';
        else
            out << "undefined\n";
    }
    out.unsetf(std::ios::floatfield);
}

void print_report(std::ostream& out, const IdentificationResult& r)
{
    out << std::setprecision(10);
    for (const auto& [id, s] : r.scores)
        out << std::setw(20) << id << "  " << s << '\n';
    out << "best: " << r.best << "  confidence " << r.confidence << (r.tie ? "  (tie)" : "")
        << (r.anomaly ? "  (anomaly)" : "") << '\n';
}

} // namespace oamid
