#pragma once

#include <oamid/analysis.hpp>
#include <oamid/measurement.hpp>
#include <oamid/object_mask.hpp>
#include <oamid/projection.hpp>
#include <oamid/spdc_spectrum.hpp>

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace oamid {

// Builds a mask from a JSON tree such as
//   {"type": "cross", "arms": 3, "width": 175, "offset": 14}
//   {"type": "product", "factors": [ {...}, {...} ]}
//   {"type": "rotate", "angle": 0.3, "mask": {...}}
// Lengths are in the unit of geometry.w0. Raster paths are resolved against
// base_dir. Throws std::invalid_argument on unknown types or bad fields.
ObjectMask build_mask(const nlohmann::json& spec, const ModeGeometry& geometry,
                      const std::filesystem::path& base_dir = {});

struct LibraryEntry
{
    std::string id;
    nlohmann::json mask;
};

// Parsed and validated run configuration. `document` keeps the full JSON
// (with defaults filled in), which is what the hash covers.
struct RunConfig
{
    nlohmann::json document;
    std::filesystem::path base_dir;

    ModeGeometry geometry;
    ProjectionOptions projection;
    SimulationSpec simulation;
    int budget = 0;  // 0: full grid
    PlanStrategy strategy = PlanStrategy::greedy;
    int l_p = 0;
    bool parity_flip = true;
    double threshold = 0.05;
    std::vector<RatioRequest> ratios;
    int cross_section_l_r = 0;
    std::vector<LibraryEntry> library;
    std::string truth;
    double truth_rotation = 0.0;
    int trials = 1;
    std::filesystem::path output_dir = "out";
    std::vector<std::string> formats{"csv", "json"};

    ObjectMask mask() const;
    NaturalSpectrum spectrum() const;
    ObjectMask library_mask(const std::string& id) const;
    bool wants(const std::string& format) const;
};

nlohmann::json default_config();

// Deep-merges `overlay` into the defaults and validates every section,
// including building the mask, library and spectrum once. Throws
// std::invalid_argument with the offending path on failure.
RunConfig resolve_config(const nlohmann::json& overlay, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// Sets `value` at a dotted path ("measurement.runs"). The value text is
// parsed as JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& dotted_path, const std::string& value);

// FNV-1a (64 bit) of the canonical JSON dump, as 16 hex digits. The output
// section and projection.threads are left out.
std::string config_hash(const nlohmann::json& document);

} // namespace oamid
