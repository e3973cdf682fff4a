#pragma once

#include <oamid/object_mask.hpp>
#include <oamid/projection.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace oamid {

inline constexpr int kFactorizationMaxOrder = 6;
inline constexpr double kFactorizationTolerance = 1e-6;
inline constexpr double kSelectionTolerance = 1e-8;

struct OracleReport
{
    std::string label;
    int l_max = 0;
    double max_abs_error = 0.0;
    int worst_k = 0;
    int worst_l = 0;
    double tolerance = kFactorizationTolerance;
    bool pass = false;
    QuadratureMeta fast;
    QuadratureMeta oracle;
};

// Fast path against the direct double integral, entrywise. Throws
// std::invalid_argument for l_max > kFactorizationMaxOrder.
OracleReport check_factorization(const ObjectMask& mask, int l_max, const std::string& label = "",
                                 double tolerance = kFactorizationTolerance, const ProjectionOptions& options = {},
                                 const OracleGrid& grid = {});

struct SelectionReport
{
    std::string label;
    int m = 0;
    double max_forbidden = 0.0;  // largest |A_kl| with (k - l) mod m != 0
    int worst_k = 0;
    int worst_l = 0;
    bool pass = false;
};

SelectionReport selection_rule_report(const OperatorMatrix& matrix, int m, const std::string& label = "",
                                      double tolerance = kSelectionTolerance);
// True iff every |A_kl| with (k - l) mod m != 0 is below 1e-8, using the
// fast path at the mask's truncation order.
bool check_selection_rule(const ObjectMask& mask, int m);

nlohmann::json to_json(const OracleReport& report);
nlohmann::json to_json(const SelectionReport& report);
// {"pass": all passed, "factorization": [...], "selection_rule": [...]}
nlohmann::json harness_json(const std::vector<OracleReport>& factorization,
                            const std::vector<SelectionReport>& selection);

} // namespace oamid
