#include <oamid/run_config.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace oamid {

using nlohmann::json;
using cd = std::complex<double>;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what)
{
    throw std::invalid_argument(where + ": " + what);
}

cd complex_from(const json& j, const std::string& where)
{
    if (j.is_number())
        return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    bad(where, "expected a number or [re, im]");
}

template <typename T>
T field(const json& j, const char* key, T fallback, const std::string& where)
{
    if (!j.contains(key))
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        bad(where + "." + key, "wrong type");
    }
}

void merge(json& base, const json& overlay)
{
    if (!overlay.is_object() || !base.is_object()) {
        base = overlay;
        return;
    }
    for (const auto& [k, v] : overlay.items()) {
        if (base.contains(k) && base[k].is_object() && v.is_object())
            merge(base[k], v);
        else
            base[k] = v;
    }
}

} // namespace

ObjectMask build_mask(const json& spec, const ModeGeometry& geometry, const std::filesystem::path& base_dir)
{
    const std::string where = "mask";
    if (!spec.is_object() || !spec.contains("type") || !spec["type"].is_string())
        bad(where, "mask spec needs a string field 'type'");
    const std::string type = spec["type"].get<std::string>();

    if (type == "empty")
        return empty_mask(geometry);
    if (type == "strip" || type == "cross") {
        StripSpec s;
        s.width = field(spec, "width", kDefaultStripWidthFraction * geometry.w0, where);
        s.angle = field(spec, "angle", 0.0, where);
        s.offset = field(spec, "offset", 0.0, where);
        if (spec.contains("transmittance"))
            s.transmittance = complex_from(spec["transmittance"], where + ".transmittance");
        const int arms = type == "strip" ? 1 : field(spec, "arms", 2, where);
        std::vector<double> offsets = field(spec, "offsets", std::vector<double>{}, where);
        return make_cross(arms, s, offsets, geometry);
    }
    if (type == "sector") {
        const cd inside = spec.contains("inside") ? complex_from(spec["inside"], where + ".inside") : cd(1.0);
        const cd outside = spec.contains("outside") ? complex_from(spec["outside"], where + ".outside") : cd(0.0);
        return make_sector(field(spec, "start", 0.0, where), field(spec, "end", std::numbers::pi, where), geometry,
                           inside, outside);
    }
    if (type == "half_plane")
        return make_half_plane(geometry);
    if (type == "pinwheel")
        return make_pinwheel(field(spec, "blades", 4, where), geometry, field(spec, "phase", 0.0, where));
    if (type == "disk") {
        const cd inside = spec.contains("inside") ? complex_from(spec["inside"], where + ".inside") : cd(0.0);
        const cd outside = spec.contains("outside") ? complex_from(spec["outside"], where + ".outside") : cd(1.0);
        if (!spec.contains("radius"))
            bad(where, "disk needs 'radius'");
        return make_disk(field(spec, "radius", 0.0, where), geometry, inside, outside);
    }
    if (type == "vortex")
        return make_phase_vortex(field(spec, "charge", 1, where), geometry);
    if (type == "smooth_random")
        return make_smooth_random(field<std::uint64_t>(spec, "seed", 1, where), geometry,
                                  field(spec, "terms", 4, where));
    if (type == "product") {
        if (!spec.contains("factors") || !spec["factors"].is_array() || spec["factors"].empty())
            bad(where, "product needs a non-empty 'factors' array");
        ObjectMask out = build_mask(spec["factors"][0], geometry, base_dir);
        for (std::size_t i = 1; i < spec["factors"].size(); ++i)
            out = multiply(out, build_mask(spec["factors"][i], geometry, base_dir));
        return out;
    }
    if (type == "rotate") {
        if (!spec.contains("mask"))
            bad(where, "rotate needs 'mask'");
        return rotate_mask(build_mask(spec["mask"], geometry, base_dir), field(spec, "angle", 0.0, where));
    }
    if (type == "radial_composite") {
        if (!spec.contains("inner") || !spec.contains("outer") || !spec.contains("radius"))
            bad(where, "radial_composite needs 'inner', 'outer' and 'radius'");
        return radial_composite(build_mask(spec["inner"], geometry, base_dir),
                                build_mask(spec["outer"], geometry, base_dir), field(spec, "radius", 0.0, where));
    }
    if (type == "sector_composite") {
        if (!spec.contains("inside") || !spec.contains("outside"))
            bad(where, "sector_composite needs 'inside' and 'outside'");
        return sector_composite(build_mask(spec["inside"], geometry, base_dir),
                                build_mask(spec["outside"], geometry, base_dir), field(spec, "start", 0.0, where),
                                field(spec, "end", std::numbers::pi, where));
    }
    if (type == "raster") {
        if (!spec.contains("amplitude") || !spec.contains("sidecar"))
            bad(where, "raster needs 'amplitude' and 'sidecar' paths");
        auto resolve = [&](const std::string& p) {
            std::filesystem::path path(p);
            return path.is_absolute() ? path : base_dir / path;
        };
        const RasterMeta meta = read_raster_sidecar(resolve(spec["sidecar"].get<std::string>()));
        if (std::abs(meta.w0_um - geometry.w0) > 1e-9 * geometry.w0)
            bad(where, "raster sidecar w0_um differs from geometry.w0");
        std::optional<std::filesystem::path> phase;
        if (spec.contains("phase"))
            phase = resolve(spec["phase"].get<std::string>());
        const cd exterior = spec.contains("exterior") ? complex_from(spec["exterior"], where + ".exterior") : cd(1.0);
        return load_raster(resolve(spec["amplitude"].get<std::string>()), meta, geometry.l_max, phase, exterior);
    }
    bad(where, "unknown mask type '" + type + "'");
}

json default_config()
{
    return {
        {"geometry", {{"w0", 210.0}, {"l_max", 12}}},
        {"mask", {{"type", "empty"}}},
        {"spdc", {{"eta", 0.5}, {"l_p", 0}}},
        {"parity_flip", true},
        {"projection",
         {{"n_phi", 256},
          {"radial_nodes", 64},
          {"max_radial_nodes", 256},
          {"segment_nodes", 16},
          {"max_segment_nodes", 512},
          {"radial_tolerance", 1e-10},
          {"threads", 0}}},
        {"measurement",
         {{"rate_scale", 1e5},
          {"integration_time", 1.0},
          {"runs", 4},
          {"seed", 1},
          {"background_rate", 0.0},
          {"budget", 0},
          {"strategy", "greedy"}}},
        {"analysis", {{"threshold", 0.05}, {"ratios", json::array()}, {"cross_section_l_r", 0}}},
        {"identify", {{"library", json::array()}, {"truth", ""}, {"truth_rotation", 0.0}, {"trials", 1}}},
        {"output", {{"dir", "out"}, {"formats", {"csv", "json"}}}},
    };
}

RunConfig resolve_config(const json& overlay, const std::filesystem::path& base_dir)
{
    if (!overlay.is_object())
        throw std::invalid_argument("config must be a JSON object");
    RunConfig cfg;
    cfg.document = default_config();
    merge(cfg.document, overlay);
    cfg.base_dir = base_dir;
    const json& d = cfg.document;

    try {
        cfg.geometry.w0 = d.at("geometry").at("w0").get<double>();
        cfg.geometry.l_max = d.at("geometry").at("l_max").get<int>();

        const json& p = d.at("projection");
        cfg.projection.n_phi = p.at("n_phi").get<int>();
        cfg.projection.radial_nodes = p.at("radial_nodes").get<int>();
        cfg.projection.max_radial_nodes = p.at("max_radial_nodes").get<int>();
        cfg.projection.segment_nodes = p.at("segment_nodes").get<int>();
        cfg.projection.max_segment_nodes = p.at("max_segment_nodes").get<int>();
        cfg.projection.radial_tolerance = p.at("radial_tolerance").get<double>();
        cfg.projection.threads = p.at("threads").get<unsigned>();

        const json& m = d.at("measurement");
        cfg.simulation.rate_scale = m.at("rate_scale").get<double>();
        cfg.simulation.integration_time = m.at("integration_time").get<double>();
        cfg.simulation.runs = m.at("runs").get<int>();
        cfg.simulation.seed = m.at("seed").get<std::uint64_t>();
        cfg.simulation.background_rate = m.at("background_rate").get<double>();
        cfg.budget = m.at("budget").get<int>();
        cfg.strategy = parse_plan_strategy(m.at("strategy").get<std::string>());

        cfg.l_p = d.at("spdc").value("l_p", 0);
        cfg.parity_flip = d.at("parity_flip").get<bool>();

        const json& a = d.at("analysis");
        cfg.threshold = a.at("threshold").get<double>();
        for (const auto& r : a.at("ratios")) {
            if (!r.is_array() || r.size() != 2)
                bad("analysis.ratios", "each entry must be [m_a, m_b]");
            cfg.ratios.push_back({r[0].get<int>(), r[1].get<int>()});
        }
        cfg.cross_section_l_r = a.at("cross_section_l_r").get<int>();

        const json& id = d.at("identify");
        for (const auto& e : id.at("library")) {
            if (!e.contains("id") || !e.contains("mask"))
                bad("identify.library", "entries need 'id' and 'mask'");
            cfg.library.push_back({e["id"].get<std::string>(), e["mask"]});
        }
        cfg.truth = id.at("truth").get<std::string>();
        cfg.truth_rotation = id.at("truth_rotation").get<double>();
        cfg.trials = id.at("trials").get<int>();

        cfg.output_dir = d.at("output").at("dir").get<std::string>();
        cfg.formats = d.at("output").at("formats").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }

    cfg.geometry.validate();
    cfg.simulation.validate();
    if (cfg.budget < 0)
        bad("measurement.budget", "must be >= 0 (0 measures the full grid)");
    if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0))
        bad("analysis.threshold", "must lie in (0, 1)");
    if (std::abs(cfg.cross_section_l_r) > cfg.geometry.l_max)
        bad("analysis.cross_section_l_r", "outside truncation");
    if (cfg.trials < 1)
        bad("identify.trials", "must be >= 1");
    if (cfg.projection.n_phi < 4 * cfg.geometry.l_max + 4)
        bad("projection.n_phi", "must be at least 4 l_max + 4");
    for (const auto& f : cfg.formats) {
        if (f != "csv" && f != "json")
            bad("output.formats", "unknown format '" + f + "'");
    }
    for (std::size_t i = 0; i < cfg.library.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.library.size(); ++j)
            if (cfg.library[i].id == cfg.library[j].id)
                bad("identify.library", "duplicate id '" + cfg.library[i].id + "'");

    // Build everything once so errors surface before any computation.
    (void)cfg.mask();
    (void)cfg.spectrum();
    for (const auto& e : cfg.library)
        (void)build_mask(e.mask, cfg.geometry, cfg.base_dir);
    if (!cfg.truth.empty())
        (void)cfg.library_mask(cfg.truth);
    return cfg;
}

ObjectMask RunConfig::mask() const
{
    return build_mask(document.at("mask"), geometry, base_dir);
}

NaturalSpectrum RunConfig::spectrum() const
{
    const json& s = document.at("spdc");
    NaturalSpectrum out;
    if (s.contains("file") && s["file"].is_string() && !s["file"].get<std::string>().empty()) {
        std::filesystem::path p = s["file"].get<std::string>();
        out = load_spectrum(p.is_absolute() ? p : base_dir / p, geometry.l_max);
    } else {
        out = parametric_spectrum(s.at("eta").get<double>(), geometry.l_max);
    }
    return out.with_pump(l_p);
}

ObjectMask RunConfig::library_mask(const std::string& id) const
{
    for (const auto& e : library) {
        if (e.id == id)
            return build_mask(e.mask, geometry, base_dir);
    }
    throw std::invalid_argument("identify: no library entry '" + id + "'");
}

bool RunConfig::wants(const std::string& format) const
{
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
    return resolve_config(doc, path.parent_path());
}

void apply_override(json& doc, const std::string& dotted_path, const std::string& value)
{
    if (dotted_path.empty())
        throw std::invalid_argument("empty override path");
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::parse_error&) {
        parsed = value;
    }
    std::string pointer;
    std::istringstream parts(dotted_path);
    for (std::string part; std::getline(parts, part, '.');) {
        if (part.empty())
            throw std::invalid_argument("bad override path '" + dotted_path + "'");
        pointer += "/" + part;
    }
    doc[json::json_pointer(pointer)] = parsed;
}

std::string config_hash(const json& document)
{
    // Output location and thread count do not change any result.
    json canonical = document;
    canonical.erase("output");
    if (canonical.contains("projection") && canonical["projection"].is_object())
        canonical["projection"].erase("threads");
    const std::string text = canonical.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << h;
    return out.str();
}

} // namespace oamid
