#include <oamid/object_mask.hpp>
#include <oamid/pgm.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

namespace oamid {

using cd = std::complex<double>;
using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double reduce_angle(double phi)
{
    double r = std::fmod(phi, kTwoPi);
    if (r < 0.0)
        r += kTwoPi;
    if (r >= kTwoPi)
        r = 0.0;
    return r;
}

json complex_json(cd z)
{
    return json::array({z.real(), z.imag()});
}

void check_passive(cd t, const char* what)
{
    if (std::abs(t) > 1.0 + 1e-12)
        throw std::invalid_argument(std::string(what) + ": |transmittance| must not exceed 1");
}

bool in_sector(double phi, double start, double end)
{
    const double width = end - start;
    if (width >= kTwoPi)
        return true;
    return reduce_angle(phi - start) < width;
}

// --- nodes -----------------------------------------------------------------

class ConstantNode final : public detail::MaskNode
{
public:
    explicit ConstantNode(cd v) : v_(v) {}
    cd value(double, double) const override { return v_; }
    json describe() const override
    {
        if (v_ == cd(1.0))
            return {{"type", "none"}};
        return {{"type", "constant"}, {"value", complex_json(v_)}};
    }

private:
    cd v_;
};

struct StripGeom
{
    double normal_angle;  // rho units below
    double offset;
    double half_width;
    cd transmittance;
};

class StripSetNode final : public detail::MaskNode
{
public:
    StripSetNode(std::vector<StripGeom> strips, json descriptor)
        : strips_(std::move(strips)), descriptor_(std::move(descriptor))
    {
    }

    cd value(double rho, double phi) const override
    {
        cd v = 1.0;
        for (const auto& s : strips_) {
            const double d = rho * std::cos(phi - s.normal_angle) - s.offset;
            if (std::abs(d) < s.half_width)
                v *= s.transmittance;
        }
        return v;
    }

    void collect_edges(MaskEdges& edges) const override
    {
        for (const auto& s : strips_) {
            edges.lines.push_back({s.normal_angle, s.offset - s.half_width});
            edges.lines.push_back({s.normal_angle, s.offset + s.half_width});
        }
    }

    json describe() const override { return descriptor_; }

private:
    std::vector<StripGeom> strips_;
    json descriptor_;
};

class SectorNode final : public detail::MaskNode
{
public:
    SectorNode(double start, double end, cd inside, cd outside)
        : start_(start), end_(end), inside_(inside), outside_(outside)
    {
    }

    cd value(double, double phi) const override
    {
        return in_sector(phi, start_, end_) ? inside_ : outside_;
    }

    void collect_edges(MaskEdges& edges) const override
    {
        if (end_ - start_ < kTwoPi) {
            edges.rays.push_back(start_);
            edges.rays.push_back(end_);
        }
    }

    json describe() const override
    {
        return {{"type", "sector"},
                {"phi_start", start_},
                {"phi_end", end_},
                {"inside", complex_json(inside_)},
                {"outside", complex_json(outside_)}};
    }

private:
    double start_, end_;
    cd inside_, outside_;
};

class PinwheelNode final : public detail::MaskNode
{
public:
    PinwheelNode(int blades, double phase) : blades_(blades), phase_(phase) {}

    cd value(double, double phi) const override
    {
        const double u = reduce_angle(phi - phase_) * blades_ / kTwoPi;
        return (u - std::floor(u)) < 0.5 ? 1.0 : 0.0;
    }

    void collect_edges(MaskEdges& edges) const override
    {
        for (int j = 0; j < 2 * blades_; ++j)
            edges.rays.push_back(phase_ + j * std::numbers::pi / blades_);
    }

    json describe() const override { return {{"type", "pinwheel"}, {"blades", blades_}, {"phase", phase_}}; }

private:
    int blades_;
    double phase_;
};

class DiskNode final : public detail::MaskNode
{
public:
    DiskNode(double radius_rho, cd inside, cd outside, json descriptor)
        : radius_(radius_rho), inside_(inside), outside_(outside), descriptor_(std::move(descriptor))
    {
    }

    cd value(double rho, double) const override { return rho < radius_ ? inside_ : outside_; }
    void collect_edges(MaskEdges& edges) const override { edges.circles.push_back(radius_); }
    json describe() const override { return descriptor_; }

private:
    double radius_;
    cd inside_, outside_;
    json descriptor_;
};

class VortexNode final : public detail::MaskNode
{
public:
    explicit VortexNode(int charge) : charge_(charge) {}
    cd value(double, double phi) const override { return std::polar(1.0, charge_ * phi); }
    json describe() const override { return {{"type", "phase_vortex"}, {"charge", charge_}}; }

private:
    int charge_;
};

struct SmoothTerm
{
    double amplitude;
    int harmonic;
    double phase;
    double center;  // in rho^2
    double spread;  // in rho^4
};

class SmoothRandomNode final : public detail::MaskNode
{
public:
    SmoothRandomNode(double base, std::vector<SmoothTerm> terms, std::uint64_t seed)
        : base_(base), terms_(std::move(terms)), seed_(seed)
    {
    }

    cd value(double rho, double phi) const override
    {
        const double t = rho * rho;
        double v = base_;
        for (const auto& term : terms_) {
            const double dt = t - term.center;
            v += term.amplitude * std::cos(term.harmonic * phi + term.phase) * std::exp(-dt * dt / term.spread);
        }
        return v;
    }

    json describe() const override
    {
        return {{"type", "smooth_random"}, {"seed", seed_}, {"terms", terms_.size()}};
    }

private:
    double base_;
    std::vector<SmoothTerm> terms_;
    std::uint64_t seed_;
};

class ProductNode final : public detail::MaskNode
{
public:
    ProductNode(std::shared_ptr<const detail::MaskNode> a, std::shared_ptr<const detail::MaskNode> b)
        : a_(std::move(a)), b_(std::move(b))
    {
    }

    cd value(double rho, double phi) const override
    {
        const cd va = a_->value(rho, phi);
        if (va == cd(0.0))
            return 0.0;
        return va * b_->value(rho, phi);
    }

    void collect_edges(MaskEdges& edges) const override
    {
        a_->collect_edges(edges);
        b_->collect_edges(edges);
    }

    double sample_pitch() const override { return min_pitch(a_->sample_pitch(), b_->sample_pitch()); }

    json describe() const override { return {{"type", "product"}, {"factors", json::array({a_->describe(), b_->describe()})}}; }

    static double min_pitch(double p, double q)
    {
        if (p <= 0.0)
            return q;
        if (q <= 0.0)
            return p;
        return std::min(p, q);
    }

private:
    std::shared_ptr<const detail::MaskNode> a_, b_;
};

class RadialCompositeNode final : public detail::MaskNode
{
public:
    RadialCompositeNode(std::shared_ptr<const detail::MaskNode> inner,
                        std::shared_ptr<const detail::MaskNode> outer, double radius_rho, double radius)
        : inner_(std::move(inner)), outer_(std::move(outer)), radius_rho_(radius_rho), radius_(radius)
    {
    }

    cd value(double rho, double phi) const override
    {
        return rho < radius_rho_ ? inner_->value(rho, phi) : outer_->value(rho, phi);
    }

    void collect_edges(MaskEdges& edges) const override
    {
        edges.circles.push_back(radius_rho_);
        inner_->collect_edges(edges);
        outer_->collect_edges(edges);
    }

    double sample_pitch() const override
    {
        return ProductNode::min_pitch(inner_->sample_pitch(), outer_->sample_pitch());
    }

    json describe() const override
    {
        return {{"type", "radial_composite"},
                {"radius", radius_},
                {"inner", inner_->describe()},
                {"outer", outer_->describe()}};
    }

private:
    std::shared_ptr<const detail::MaskNode> inner_, outer_;
    double radius_rho_;
    double radius_;
};

class SectorCompositeNode final : public detail::MaskNode
{
public:
    SectorCompositeNode(std::shared_ptr<const detail::MaskNode> inside,
                        std::shared_ptr<const detail::MaskNode> outside, double start, double end)
        : inside_(std::move(inside)), outside_(std::move(outside)), start_(start), end_(end)
    {
    }

    cd value(double rho, double phi) const override
    {
        return in_sector(phi, start_, end_) ? inside_->value(rho, phi) : outside_->value(rho, phi);
    }

    void collect_edges(MaskEdges& edges) const override
    {
        if (end_ - start_ < kTwoPi) {
            edges.rays.push_back(start_);
            edges.rays.push_back(end_);
        }
        inside_->collect_edges(edges);
        outside_->collect_edges(edges);
    }

    double sample_pitch() const override
    {
        return ProductNode::min_pitch(inside_->sample_pitch(), outside_->sample_pitch());
    }

    json describe() const override
    {
        return {{"type", "sector_composite"},
                {"phi_start", start_},
                {"phi_end", end_},
                {"inside", inside_->describe()},
                {"outside", outside_->describe()}};
    }

private:
    std::shared_ptr<const detail::MaskNode> inside_, outside_;
    double start_, end_;
};

class RotationNode final : public detail::MaskNode
{
public:
    RotationNode(std::shared_ptr<const detail::MaskNode> base, double delta)
        : base_(std::move(base)), delta_(delta)
    {
    }

    cd value(double rho, double phi) const override { return base_->value(rho, reduce_angle(phi - delta_)); }

    void collect_edges(MaskEdges& edges) const override
    {
        MaskEdges inner;
        base_->collect_edges(inner);
        for (auto line : inner.lines) {
            line.normal_angle += delta_;
            edges.lines.push_back(line);
        }
        for (double r : inner.circles)
            edges.circles.push_back(r);
        for (double a : inner.rays)
            edges.rays.push_back(a + delta_);
    }

    double sample_pitch() const override { return base_->sample_pitch(); }

    json describe() const override { return {{"type", "rotated"}, {"delta", delta_}, {"base", base_->describe()}}; }

    const std::shared_ptr<const detail::MaskNode>& base() const { return base_; }
    double delta() const { return delta_; }

private:
    std::shared_ptr<const detail::MaskNode> base_;
    double delta_;
};

class CutoffNode final : public detail::MaskNode
{
public:
    CutoffNode(std::shared_ptr<const detail::MaskNode> base, double cutoff, cd exterior)
        : base_(std::move(base)), cutoff_(cutoff), exterior_(exterior)
    {
    }

    cd value(double rho, double phi) const override { return rho > cutoff_ ? exterior_ : base_->value(rho, phi); }

    void collect_edges(MaskEdges& edges) const override
    {
        edges.circles.push_back(cutoff_);
        base_->collect_edges(edges);
    }

    double sample_pitch() const override { return base_->sample_pitch(); }

    json describe() const override
    {
        return {{"type", "cutoff"},
                {"rho_cutoff", cutoff_},
                {"exterior", complex_json(exterior_)},
                {"base", base_->describe()}};
    }

private:
    std::shared_ptr<const detail::MaskNode> base_;
    double cutoff_;
    cd exterior_;
};

class RasterNode final : public detail::MaskNode
{
public:
    RasterNode(RasterMask raster, double rho_to_length, cd exterior)
        : raster_(std::move(raster)), rho_to_length_(rho_to_length), exterior_(exterior)
    {
    }

    cd value(double rho, double phi) const override
    {
        const double r = rho * rho_to_length_;
        const double col = raster_.origin_x + r * std::cos(phi) / raster_.pixel_pitch;
        const double row = raster_.origin_y - r * std::sin(phi) / raster_.pixel_pitch;
        const int w = raster_.width;
        const int h = raster_.height;
        if (!(col >= 0.0 && col <= w - 1 && row >= 0.0 && row <= h - 1))
            return exterior_;
        const int c0 = std::min(static_cast<int>(col), w - 2);
        const int r0 = std::min(static_cast<int>(row), h - 2);
        const double fx = col - c0;
        const double fy = row - r0;
        const auto at = [&](int rr, int cc) {
            return raster_.pixels[static_cast<std::size_t>(rr) * static_cast<std::size_t>(w) +
                                  static_cast<std::size_t>(cc)];
        };
        return (1.0 - fy) * ((1.0 - fx) * at(r0, c0) + fx * at(r0, c0 + 1)) +
               fy * ((1.0 - fx) * at(r0 + 1, c0) + fx * at(r0 + 1, c0 + 1));
    }

    double sample_pitch() const override { return raster_.pixel_pitch / rho_to_length_; }

    json describe() const override
    {
        return {{"type", "raster"},
                {"width", raster_.width},
                {"height", raster_.height},
                {"pixel_pitch", raster_.pixel_pitch},
                {"origin_px", {raster_.origin_x, raster_.origin_y}},
                {"exterior", complex_json(exterior_)}};
    }

private:
    RasterMask raster_;
    double rho_to_length_;
    cd exterior_;
};

// --- edge geometry ---------------------------------------------------------

void push_angle(std::vector<double>& out, double a)
{
    out.push_back(reduce_angle(a));
}

std::vector<double> compute_angular_breaks(const MaskEdges& edges)
{
    std::vector<double> out;
    for (double a : edges.rays)
        push_angle(out, a);

    for (std::size_t i = 0; i < edges.lines.size(); ++i) {
        const auto& li = edges.lines[i];
        if (std::abs(li.offset) >= kFarRadius)
            continue;
        // foot of the perpendicular and the two directions parallel to the line
        push_angle(out, li.normal_angle);
        push_angle(out, li.normal_angle + std::numbers::pi);
        push_angle(out, li.normal_angle + 0.5 * std::numbers::pi);
        push_angle(out, li.normal_angle - 0.5 * std::numbers::pi);

        for (std::size_t j = i + 1; j < edges.lines.size(); ++j) {
            const auto& lj = edges.lines[j];
            const double det = std::sin(lj.normal_angle - li.normal_angle);
            if (std::abs(det) < 1e-12)
                continue;
            const double x = (li.offset * std::sin(lj.normal_angle) - lj.offset * std::sin(li.normal_angle)) / det;
            const double y = (lj.offset * std::cos(li.normal_angle) - li.offset * std::cos(lj.normal_angle)) / det;
            const double r = std::hypot(x, y);
            if (r < 1e-14 || r >= kFarRadius)
                continue;
            push_angle(out, std::atan2(y, x));
        }

        for (double radius : edges.circles) {
            if (radius >= kFarRadius || std::abs(li.offset) >= radius)
                continue;
            const double half_chord = std::sqrt(radius * radius - li.offset * li.offset);
            const double fx = li.offset * std::cos(li.normal_angle);
            const double fy = li.offset * std::sin(li.normal_angle);
            const double tx = -std::sin(li.normal_angle);
            const double ty = std::cos(li.normal_angle);
            push_angle(out, std::atan2(fy + half_chord * ty, fx + half_chord * tx));
            push_angle(out, std::atan2(fy - half_chord * ty, fx - half_chord * tx));
        }
    }

    std::sort(out.begin(), out.end());
    std::vector<double> unique;
    for (double a : out) {
        if (unique.empty() || a - unique.back() > 1e-12)
            unique.push_back(a);
    }
    if (unique.size() > 1 && kTwoPi - unique.back() < 1e-12)
        unique.pop_back();
    return unique;
}

std::shared_ptr<const detail::MaskNode> unit_node()
{
    static const auto node = std::make_shared<ConstantNode>(1.0);
    return node;
}

void check_same_geometry(const ObjectMask& a, const ObjectMask& b)
{
    if (std::abs(a.geometry().w0 - b.geometry().w0) > 1e-12 * a.geometry().w0)
        throw std::invalid_argument("cannot combine masks with different beam waists");
}

} // namespace

// --- ObjectMask ------------------------------------------------------------

ObjectMask::ObjectMask(const ModeGeometry& geometry) : ObjectMask(unit_node(), geometry) {}

ObjectMask::ObjectMask(std::shared_ptr<const detail::MaskNode> node, const ModeGeometry& geometry)
    : node_(std::move(node)), geometry_(geometry)
{
    if (!node_)
        throw std::invalid_argument("ObjectMask needs a node");
    geometry_.validate();
    finalize();
}

void ObjectMask::finalize()
{
    edges_ = {};
    node_->collect_edges(edges_);
    angular_breaks_ = compute_angular_breaks(edges_);
    sample_pitch_ = node_->sample_pitch();
}

cd ObjectMask::value(double rho, double phi) const
{
    return node_->value(rho, reduce_angle(phi));
}

std::vector<double> ObjectMask::radial_breaks(double phi) const
{
    std::vector<double> out;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    for (const auto& line : edges_.lines) {
        const double q = c * std::cos(line.normal_angle) + s * std::sin(line.normal_angle);
        if (std::abs(q) < 1e-300)
            continue;
        const double r = line.offset / q;
        if (r > 0.0 && r < kFarRadius)
            out.push_back(r);
    }
    for (double r : edges_.circles) {
        if (r > 0.0 && r < kFarRadius)
            out.push_back(r);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return b - a < 1e-13; }), out.end());
    return out;
}

json ObjectMask::descriptor() const
{
    return {{"w0", geometry_.w0}, {"mask", node_->describe()}};
}

ObjectMask ObjectMask::with_cutoff(double rho_cutoff, cd exterior) const
{
    if (!(rho_cutoff > 0.0))
        throw std::invalid_argument("cutoff radius must be positive");
    return ObjectMask(std::make_shared<CutoffNode>(node_, rho_cutoff, exterior), geometry_);
}

cd mask_value(const ObjectMask& mask, double rho, double phi)
{
    return mask.value(rho, phi);
}

// --- factories -------------------------------------------------------------

ObjectMask empty_mask(const ModeGeometry& geometry)
{
    return ObjectMask(geometry);
}

ObjectMask make_strip(const StripSpec& strip, const ModeGeometry& geometry)
{
    return make_cross(1, strip, {}, geometry);
}

ObjectMask make_cross(int arms, const StripSpec& strip, std::span<const double> per_arm_offsets,
                      const ModeGeometry& geometry)
{
    geometry.validate();
    if (arms < 1)
        throw std::invalid_argument("make_cross: arms must be >= 1");
    if (!per_arm_offsets.empty() && per_arm_offsets.size() != static_cast<std::size_t>(arms))
        throw std::invalid_argument("make_cross: need one offset per arm");
    if (!(strip.width > 0.0))
        throw std::invalid_argument("make_cross: strip width must be positive");
    check_passive(strip.transmittance, "make_cross");

    const double scale = std::numbers::sqrt2 / geometry.w0;
    const double step = (arms % 2 == 1 ? kTwoPi : std::numbers::pi) / arms;
    std::vector<StripGeom> strips;
    json offsets = json::array();
    for (int i = 0; i < arms; ++i) {
        const double offset = per_arm_offsets.empty() ? strip.offset : per_arm_offsets[static_cast<std::size_t>(i)];
        offsets.push_back(offset);
        strips.push_back({strip.angle + 0.5 * std::numbers::pi + i * step, offset * scale, 0.5 * strip.width * scale,
                          strip.transmittance});
    }
    json descriptor = {{"type", arms == 1 ? "strip" : "cross"},
                       {"arms", arms},
                       {"width", strip.width},
                       {"angle", strip.angle},
                       {"offsets", offsets},
                       {"transmittance", complex_json(strip.transmittance)}};
    return ObjectMask(std::make_shared<StripSetNode>(std::move(strips), std::move(descriptor)), geometry);
}

ObjectMask make_sector(double phi_start, double phi_end, const ModeGeometry& geometry, cd inside, cd outside)
{
    if (!(phi_end > phi_start))
        throw std::invalid_argument("make_sector: phi_end must exceed phi_start");
    check_passive(inside, "make_sector");
    check_passive(outside, "make_sector");
    return ObjectMask(std::make_shared<SectorNode>(phi_start, phi_end, inside, outside), geometry);
}

ObjectMask make_half_plane(const ModeGeometry& geometry)
{
    return make_sector(0.0, std::numbers::pi, geometry);
}

ObjectMask make_pinwheel(int blades, const ModeGeometry& geometry, double phase)
{
    if (blades < 1)
        throw std::invalid_argument("make_pinwheel: blades must be >= 1");
    return ObjectMask(std::make_shared<PinwheelNode>(blades, phase), geometry);
}

ObjectMask make_disk(double radius, const ModeGeometry& geometry, cd inside, cd outside)
{
    geometry.validate();
    if (!(radius > 0.0))
        throw std::invalid_argument("make_disk: radius must be positive");
    check_passive(inside, "make_disk");
    check_passive(outside, "make_disk");
    json descriptor = {{"type", "disk"},
                       {"radius", radius},
                       {"inside", complex_json(inside)},
                       {"outside", complex_json(outside)}};
    return ObjectMask(std::make_shared<DiskNode>(geometry.rho_from_radius(radius), inside, outside,
                                                 std::move(descriptor)),
                      geometry);
}

ObjectMask make_phase_vortex(int charge, const ModeGeometry& geometry)
{
    return ObjectMask(std::make_shared<VortexNode>(charge), geometry);
}

ObjectMask make_smooth_random(std::uint64_t seed, const ModeGeometry& geometry, int terms)
{
    if (terms < 1)
        throw std::invalid_argument("make_smooth_random: terms must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> harmonic(1, 6);

    std::vector<double> share(static_cast<std::size_t>(terms));
    double total = 0.0;
    for (auto& s : share) {
        s = 0.1 + unit(rng);
        total += s;
    }
    const double budget = 0.5 * (0.5 + 0.5 * unit(rng));
    std::vector<SmoothTerm> out;
    for (int j = 0; j < terms; ++j) {
        SmoothTerm t{};
        t.amplitude = budget * share[static_cast<std::size_t>(j)] / total;
        t.harmonic = harmonic(rng);
        t.phase = kTwoPi * unit(rng);
        t.center = 0.5 + 5.5 * unit(rng);
        t.spread = 1.0 + 3.0 * unit(rng);
        out.push_back(t);
    }
    return ObjectMask(std::make_shared<SmoothRandomNode>(0.5, std::move(out), seed), geometry);
}

ObjectMask multiply(const ObjectMask& a, const ObjectMask& b)
{
    check_same_geometry(a, b);
    return ObjectMask(std::make_shared<ProductNode>(a.node(), b.node()), a.geometry());
}

ObjectMask radial_composite(const ObjectMask& inner, const ObjectMask& outer, double radius)
{
    check_same_geometry(inner, outer);
    if (!(radius > 0.0))
        throw std::invalid_argument("radial_composite: radius must be positive");
    return ObjectMask(std::make_shared<RadialCompositeNode>(inner.node(), outer.node(),
                                                            inner.geometry().rho_from_radius(radius), radius),
                      inner.geometry());
}

ObjectMask sector_composite(const ObjectMask& inside, const ObjectMask& outside, double phi_start, double phi_end)
{
    check_same_geometry(inside, outside);
    if (!(phi_end > phi_start))
        throw std::invalid_argument("sector_composite: phi_end must exceed phi_start");
    return ObjectMask(std::make_shared<SectorCompositeNode>(inside.node(), outside.node(), phi_start, phi_end),
                      inside.geometry());
}

ObjectMask rotate_mask(const ObjectMask& mask, double delta)
{
    if (const auto* rotated = dynamic_cast<const RotationNode*>(mask.node().get()))
        return ObjectMask(std::make_shared<RotationNode>(rotated->base(), rotated->delta() + delta), mask.geometry());
    return ObjectMask(std::make_shared<RotationNode>(mask.node(), delta), mask.geometry());
}

// --- rasters ---------------------------------------------------------------

void RasterMask::validate() const
{
    if (width < 2 || height < 2)
        throw std::invalid_argument("raster grid must be at least 2x2");
    if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw std::invalid_argument("raster pixel count does not match its dimensions");
    if (!(pixel_pitch > 0.0))
        throw std::invalid_argument("raster pixel pitch must be positive");
}

ObjectMask make_raster_mask(RasterMask raster, const ModeGeometry& geometry, cd exterior)
{
    geometry.validate();
    raster.validate();
    for (auto& p : raster.pixels) {
        const double mag = std::abs(p);
        if (mag > 1.0)
            p /= mag;
    }
    const double rho_to_length = geometry.w0 / std::numbers::sqrt2;
    return ObjectMask(std::make_shared<RasterNode>(std::move(raster), rho_to_length, exterior), geometry);
}

RasterMask render_raster(const ObjectMask& mask, int width, int height, double pixel_pitch, int supersample)
{
    if (supersample < 1)
        throw std::invalid_argument("render_raster: supersample must be >= 1");
    RasterMask raster;
    raster.width = width;
    raster.height = height;
    raster.pixel_pitch = pixel_pitch;
    raster.origin_x = 0.5 * (width - 1);
    raster.origin_y = 0.5 * (height - 1);
    raster.pixels.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0);
    raster.validate();

    const ModeGeometry& g = mask.geometry();
    const double inv = 1.0 / (supersample * supersample);
    for (int row = 0; row < height; ++row) {
        for (int col = 0; col < width; ++col) {
            cd acc = 0.0;
            for (int sy = 0; sy < supersample; ++sy) {
                for (int sx = 0; sx < supersample; ++sx) {
                    const double x = (col - raster.origin_x + (sx + 0.5) / supersample - 0.5) * pixel_pitch;
                    const double y = (raster.origin_y - row - (sy + 0.5) / supersample + 0.5) * pixel_pitch;
                    acc += mask.value(g.rho_from_radius(std::hypot(x, y)), std::atan2(y, x));
                }
            }
            raster.pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                          static_cast<std::size_t>(col)] = acc * inv;
        }
    }
    return raster;
}

RasterMeta read_raster_sidecar(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open raster sidecar " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("raster sidecar " + path.string() + ": " + e.what());
    }
    RasterMeta meta;
    try {
        meta.pixel_pitch_um = j.at("pixel_pitch_um").get<double>();
        const auto& origin = j.at("origin_px");
        if (!origin.is_array() || origin.size() != 2)
            throw std::invalid_argument("origin_px must be [x, y]");
        meta.origin_x = origin[0].get<double>();
        meta.origin_y = origin[1].get<double>();
        meta.w0_um = j.at("w0_um").get<double>();
    } catch (const json::exception& e) {
        throw std::invalid_argument("raster sidecar " + path.string() + ": " + e.what());
    }
    return meta;
}

ObjectMask load_raster(const std::filesystem::path& amplitude_pgm, const RasterMeta& meta, int l_max,
                       const std::optional<std::filesystem::path>& phase_pgm, cd exterior)
{
    if (!(meta.pixel_pitch_um > 0.0) || !(meta.w0_um > 0.0))
        throw std::invalid_argument("raster metadata needs positive pixel_pitch_um and w0_um");

    const GrayImage amp = read_pgm(amplitude_pgm);
    std::optional<GrayImage> phase;
    if (phase_pgm) {
        phase = read_pgm(*phase_pgm);
        if (phase->width != amp.width || phase->height != amp.height)
            throw std::invalid_argument("phase image dimensions differ from amplitude image");
    }
    if (meta.origin_x < 0.0 || meta.origin_x > amp.width - 1 || meta.origin_y < 0.0 ||
        meta.origin_y > amp.height - 1)
        throw std::invalid_argument("raster origin lies outside the image");

    RasterMask raster;
    raster.width = amp.width;
    raster.height = amp.height;
    raster.pixel_pitch = meta.pixel_pitch_um;
    raster.origin_x = meta.origin_x;
    raster.origin_y = meta.origin_y;
    raster.pixels.resize(amp.pixels.size());
    for (std::size_t i = 0; i < amp.pixels.size(); ++i) {
        const double a = static_cast<double>(amp.pixels[i]) / amp.maxval;
        if (a < 0.0 || a > 1.0)
            throw std::invalid_argument("raster amplitude outside [0, 1]");
        const double ph = phase ? kTwoPi * phase->pixels[i] / (phase->maxval + 1.0) : 0.0;
        raster.pixels[i] = std::polar(a, ph);
    }
    ModeGeometry geometry{meta.w0_um, l_max};
    return make_raster_mask(std::move(raster), geometry, exterior);
}

} // namespace oamid
