#pragma once

#include <oamid/lg_modes.hpp>

#include <json.hpp>

#include <complex>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace oamid {

// Radius (in rho) beyond which the Gaussian weight is below 1e-35 for every
// order used here; edge intersections further out are ignored.
inline constexpr double kFarRadius = 12.0;

// Straight edge {p : p . n = offset}, n = (cos normal_angle, sin normal_angle), rho units.
struct EdgeLine
{
    double normal_angle = 0.0;
    double offset = 0.0;
};

// Curves along which a mask may be discontinuous. Used to place radial
// breakpoints along rays and to split the azimuthal integral into panels on
// which R_kl(phi) is smooth.
struct MaskEdges
{
    std::vector<EdgeLine> lines;
    std::vector<double> circles;  // radii
    std::vector<double> rays;     // angles of half-lines from the origin
};

namespace detail {

class MaskNode
{
public:
    virtual ~MaskNode() = default;

    // phi is already reduced to [0, 2 pi).
    virtual std::complex<double> value(double rho, double phi) const = 0;
    virtual void collect_edges(MaskEdges&) const {}
    // Pixel pitch in rho for sampled data, 0 for analytic nodes.
    virtual double sample_pitch() const { return 0.0; }
    virtual nlohmann::json describe() const = 0;
};

} // namespace detail

// Opaque (or partially transmitting) band of infinite length. Lengths are in
// the unit of ModeGeometry::w0. The offset displaces the centerline along its
// normal.
struct StripSpec
{
    double width = 0.0;
    double angle = 0.0;   // direction of the strip axis, radians
    double offset = 0.0;
    std::complex<double> transmittance = 0.0;
};

// Default strip width as a fraction of w0 (175 um strips on a 210 um waist).
inline constexpr double kDefaultStripWidthFraction = 0.83;

// Complex amplitude transmission A(rho, phi) of a target. Immutable; copies
// share the node tree, so evaluation is reentrant.
class ObjectMask
{
public:
    // No object: A = 1 everywhere.
    explicit ObjectMask(const ModeGeometry& geometry = {});
    ObjectMask(std::shared_ptr<const detail::MaskNode> node, const ModeGeometry& geometry);

    // A(rho, phi) with phi reduced mod 2 pi.
    std::complex<double> value(double rho, double phi) const;

    // Sorted radii in (0, kFarRadius) where A may jump along the ray at phi.
    std::vector<double> radial_breaks(double phi) const;

    // Sorted angles in [0, 2 pi) separating azimuthal intervals on which every
    // radial integral of A is a smooth function of phi. Empty for masks
    // without edges.
    const std::vector<double>& angular_breaks() const { return angular_breaks_; }

    const MaskEdges& edges() const { return edges_; }
    double sample_pitch() const { return sample_pitch_; }
    bool is_sampled() const { return sample_pitch_ > 0.0; }

    const ModeGeometry& geometry() const { return geometry_; }
    nlohmann::json descriptor() const;

    // Same mask, replaced by `exterior` for rho > rho_cutoff.
    ObjectMask with_cutoff(double rho_cutoff, std::complex<double> exterior = 1.0) const;

    const std::shared_ptr<const detail::MaskNode>& node() const { return node_; }

private:
    void finalize();

    std::shared_ptr<const detail::MaskNode> node_;
    ModeGeometry geometry_;
    MaskEdges edges_;
    std::vector<double> angular_breaks_;
    double sample_pitch_ = 0.0;
};

std::complex<double> mask_value(const ObjectMask& mask, double rho, double phi);

ObjectMask empty_mask(const ModeGeometry& geometry);

ObjectMask make_strip(const StripSpec& strip, const ModeGeometry& geometry);

// Product of `arms` copies of `strip` with axes at strip.angle + i pi / arms.
// Offsets are per arm (empty: every arm uses strip.offset). For an odd arm
// count the offset of arm i is measured along a normal rotated by
// 2 pi i / arms, so equal offsets keep the arms-fold rotation symmetry (three
// displaced strips enclose a small triangle). With zero offsets the mask has
// 2 * arms-fold symmetry.
ObjectMask make_cross(int arms, const StripSpec& strip, std::span<const double> per_arm_offsets,
                      const ModeGeometry& geometry);

// `inside` on phi in [phi_start, phi_end) (mod 2 pi), `outside` elsewhere.
ObjectMask make_sector(double phi_start, double phi_end, const ModeGeometry& geometry,
                       std::complex<double> inside = 1.0, std::complex<double> outside = 0.0);

// Transmits phi in [0, pi).
ObjectMask make_half_plane(const ModeGeometry& geometry);

// `blades` open sectors of angular width pi / blades, exactly blades-fold symmetric.
ObjectMask make_pinwheel(int blades, const ModeGeometry& geometry, double phase = 0.0);

// Disk of radius `radius` with transmittance `inside`, `outside` beyond.
ObjectMask make_disk(double radius, const ModeGeometry& geometry, std::complex<double> inside = 0.0,
                     std::complex<double> outside = 1.0);

// Pure phase vortex exp(i charge phi).
ObjectMask make_phase_vortex(int charge, const ModeGeometry& geometry);

// Seeded real mask with values in [0, 1]: a constant plus a few azimuthal
// harmonics with Gaussian-in-rho^2 envelopes.
ObjectMask make_smooth_random(std::uint64_t seed, const ModeGeometry& geometry, int terms = 4);

// Pointwise product (stacked transmission masks).
ObjectMask multiply(const ObjectMask& a, const ObjectMask& b);

// `inner` for r < radius, `outer` beyond.
ObjectMask radial_composite(const ObjectMask& inner, const ObjectMask& outer, double radius);

// `inside` on phi in [phi_start, phi_end), `outside` elsewhere.
ObjectMask sector_composite(const ObjectMask& inside, const ObjectMask& outside, double phi_start,
                            double phi_end);

// mask'(rho, phi) = mask(rho, phi - delta).
ObjectMask rotate_mask(const ObjectMask& mask, double delta);

// Sampled transmission on a pixel grid, row-major, row 0 at the top.
struct RasterMask
{
    int width = 0;
    int height = 0;
    std::vector<std::complex<double>> pixels;
    double pixel_pitch = 0.0;  // length per pixel, unit of w0
    double origin_x = 0.0;     // pixel coordinates of the optical axis
    double origin_y = 0.0;

    // Throws std::invalid_argument on a grid smaller than 2x2, a pixel count
    // mismatch or a non-positive pitch.
    void validate() const;
};

// Bilinear interpolation of the grid; `exterior` outside it.
ObjectMask make_raster_mask(RasterMask raster, const ModeGeometry& geometry,
                            std::complex<double> exterior = 1.0);

// Samples `mask` on a width x height grid centred on the optical axis,
// averaging supersample^2 points per pixel.
RasterMask render_raster(const ObjectMask& mask, int width, int height, double pixel_pitch,
                         int supersample = 1);

struct RasterMeta
{
    double pixel_pitch_um = 0.0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    double w0_um = 0.0;
};

// Reads {pixel_pitch_um, origin_px: [x, y], w0_um}.
RasterMeta read_raster_sidecar(const std::filesystem::path& path);

// Amplitude from a binary PGM (gray / maxval), optional phase PGM mapped to
// [0, 2 pi) as 2 pi gray / (maxval + 1). Geometry w0 comes from the metadata;
// l_max from `l_max`. Throws std::runtime_error on unreadable files and
// std::invalid_argument on metadata or dimension mismatches.
ObjectMask load_raster(const std::filesystem::path& amplitude_pgm, const RasterMeta& meta, int l_max,
                       const std::optional<std::filesystem::path>& phase_pgm = std::nullopt,
                       std::complex<double> exterior = 1.0);

} // namespace oamid
