#include <oamid/oracle_harness.hpp>

#include <cmath>
#include <stdexcept>

namespace oamid {

namespace {

nlohmann::json meta_json(const QuadratureMeta& m)
{
    return {{"method", m.method},
            {"azimuthal_scheme", m.azimuthal_scheme},
            {"azimuthal_nodes", m.azimuthal_nodes},
            {"radial_nodes_max", m.radial_nodes_max},
            {"radial_error_estimate", m.radial_error_estimate},
            {"azimuthal_error_estimate", m.azimuthal_error_estimate}};
}

} // namespace

OracleReport check_factorization(const ObjectMask& mask, int l_max, const std::string& label, double tolerance,
                                 const ProjectionOptions& options, const OracleGrid& grid)
{
    if (l_max < 0 || l_max > kFactorizationMaxOrder)
        throw std::invalid_argument("check_factorization supports l_max <= " +
                                    std::to_string(kFactorizationMaxOrder));
    const OperatorMatrix fast = compute_matrix(mask, l_max, options);
    const OperatorMatrix slow = matrix_oracle(mask, l_max, grid);

    OracleReport r;
    r.label = label;
    r.l_max = l_max;
    r.tolerance = tolerance;
    r.fast = fast.meta();
    r.oracle = slow.meta();
    for (int k = -l_max; k <= l_max; ++k) {
        for (int l = -l_max; l <= l_max; ++l) {
            const double e = std::abs(fast(k, l) - slow(k, l));
            if (e > r.max_abs_error) {
                r.max_abs_error = e;
                r.worst_k = k;
                r.worst_l = l;
            }
        }
    }
    r.pass = r.max_abs_error < tolerance;
    return r;
}

SelectionReport selection_rule_report(const OperatorMatrix& matrix, int m, const std::string& label,
                                      double tolerance)
{
    if (m < 1)
        throw std::invalid_argument("selection-rule order must be positive");
    SelectionReport r;
    r.label = label;
    r.m = m;
    const int L = matrix.l_max();
    for (int k = -L; k <= L; ++k) {
        for (int l = -L; l <= L; ++l) {
            if ((k - l) % m == 0)
                continue;
            const double a = std::abs(matrix(k, l));
            if (a > r.max_forbidden) {
                r.max_forbidden = a;
                r.worst_k = k;
                r.worst_l = l;
            }
        }
    }
    r.pass = r.max_forbidden < tolerance;
    return r;
}

bool check_selection_rule(const ObjectMask& mask, int m)
{
    return selection_rule_report(compute_matrix(mask), m).pass;
}

nlohmann::json to_json(const OracleReport& r)
{
    return {{"label", r.label},
            {"l_max", r.l_max},
            {"max_abs_error", r.max_abs_error},
            {"worst_entry", {r.worst_k, r.worst_l}},
            {"tolerance", r.tolerance},
            {"pass", r.pass},
            {"grids", {{"fast", meta_json(r.fast)}, {"oracle", meta_json(r.oracle)}}}};
}

nlohmann::json to_json(const SelectionReport& r)
{
    return {{"label", r.label},
            {"m", r.m},
            {"max_forbidden", r.max_forbidden},
            {"worst_entry", {r.worst_k, r.worst_l}},
            {"pass", r.pass}};
}

nlohmann::json harness_json(const std::vector<OracleReport>& factorization,
                            const std::vector<SelectionReport>& selection)
{
    bool pass = true;
    nlohmann::json f = nlohmann::json::array();
    for (const auto& r : factorization) {
        pass = pass && r.pass;
        f.push_back(to_json(r));
    }
    nlohmann::json s = nlohmann::json::array();
    for (const auto& r : selection) {
        pass = pass && r.pass;
        s.push_back(to_json(r));
    }
    return {{"pass", pass}, {"factorization", std::move(f)}, {"selection_rule", std::move(s)}};
}

} // namespace oamid
