#include <doctest.h>

#include <oamid/object_mask.hpp>
#include <oamid/pgm.hpp>
#include <oamid/projection.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

using namespace oamid;
using cd = std::complex<double>;
namespace fs = std::filesystem;

namespace {

const double kPi = std::numbers::pi;

fs::path scratch_dir(const char* name)
{
    const fs::path p = fs::temp_directory_path() / ("oamid_test_" + std::string(name));
    fs::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("empty mask transmits everywhere")
{
    const ObjectMask m = empty_mask(ModeGeometry{});
    CHECK(m.value(0.0, 0.0) == cd(1.0));
    CHECK(m.value(3.0, -2.0) == cd(1.0));
    CHECK(m.angular_breaks().empty());
    CHECK(m.radial_breaks(0.3).empty());
}

TEST_CASE("single strip blocks a band around its axis")
{
    ModeGeometry g{1.0, 12};
    const ObjectMask s = make_strip({0.4, 0.0, 0.0, 0.0}, g);
    // width 0.4 w0 -> half width 0.2 sqrt(2) in rho
    const double h = 0.2 * std::numbers::sqrt2;
    CHECK(s.value(1.0, 0.0) == cd(0.0));
    CHECK(s.value(1.0, kPi / 2) == cd(1.0));
    CHECK(s.value(h / std::sin(0.5) * 0.99, 0.5) == cd(0.0));
    CHECK(s.value(h / std::sin(0.5) * 1.01, 0.5) == cd(1.0));
    const auto breaks = s.radial_breaks(0.5);
    REQUIRE(breaks.size() == 1);
    CHECK(breaks[0] == doctest::Approx(h / std::sin(0.5)));
}

TEST_CASE("cross symmetry")
{
    ModeGeometry g{1.0, 12};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> r(0.0, 4.0);
    SUBCASE("two arms are four-fold symmetric")
    {
        const ObjectMask m = make_cross(2, {0.83, 0.2, 0.0, 0.0}, {}, g);
        for (int i = 0; i < 200; ++i) {
            const double rho = r(rng), phi = u(rng);
            CHECK(m.value(rho, phi) == m.value(rho, phi + kPi / 2));
        }
    }
    SUBCASE("three displaced arms keep three-fold symmetry")
    {
        const ObjectMask m = make_cross(3, {0.83, 0.0, 0.1, 0.0}, {}, g);
        int differs = 0;
        for (int i = 0; i < 400; ++i) {
            const double rho = r(rng), phi = u(rng);
            CHECK(m.value(rho, phi) == m.value(rho, phi + 2 * kPi / 3));
            differs += m.value(rho, phi) != m.value(rho, phi + kPi / 3) ? 1 : 0;
        }
        CHECK(differs > 0);
    }
    SUBCASE("per-arm offsets must match the arm count")
    {
        const std::vector<double> two{0.1, 0.2};
        CHECK_THROWS_AS(make_cross(3, {0.83, 0.0, 0.0, 0.0}, two, g), std::invalid_argument);
    }
}

TEST_CASE("sectors, pinwheels and disks")
{
    ModeGeometry g{2.0, 12};
    const ObjectMask half = make_half_plane(g);
    CHECK(half.value(1.0, 0.5) == cd(1.0));
    CHECK(half.value(1.0, -0.5) == cd(0.0));
    CHECK(half.value(1.0, 2 * kPi + 0.5) == cd(1.0));

    const ObjectMask pin = make_pinwheel(4, g);
    for (double phi : {0.1, 0.5, 1.0, 2.0})
        CHECK(pin.value(1.0, phi) == pin.value(1.0, phi + kPi / 2));

    const ObjectMask disk = make_disk(1.0, g);  // radius 1 = rho sqrt(2) / 2
    CHECK(disk.value(0.5, 0.0) == cd(0.0));
    CHECK(disk.value(0.8, 0.0) == cd(1.0));
    CHECK(disk.radial_breaks(1.0).size() == 1);
    CHECK_THROWS_AS(make_disk(1.0, g, cd(2.0)), std::invalid_argument);
}

TEST_CASE("smooth random masks are seeded and bounded")
{
    ModeGeometry g{1.0, 12};
    const ObjectMask a = make_smooth_random(17, g);
    const ObjectMask b = make_smooth_random(17, g);
    const ObjectMask c = make_smooth_random(18, g);
    bool any_diff = false;
    for (double rho = 0.0; rho < 6.0; rho += 0.37) {
        for (double phi = 0.0; phi < 6.28; phi += 0.41) {
            const cd v = a.value(rho, phi);
            CHECK(v == b.value(rho, phi));
            CHECK(v.imag() == 0.0);
            CHECK(v.real() >= 0.0);
            CHECK(v.real() <= 1.0);
            any_diff = any_diff || v != c.value(rho, phi);
        }
    }
    CHECK(any_diff);
    CHECK(a.angular_breaks().empty());
}

TEST_CASE("rotation shifts the azimuth")
{
    ModeGeometry g{1.0, 12};
    const ObjectMask base = make_cross(3, {0.83, 0.0, 0.1, 0.0}, {}, g);
    const ObjectMask rot = rotate_mask(rotate_mask(base, 0.2), 0.1);
    for (double phi = 0.0; phi < 6.0; phi += 0.13)
        CHECK(rot.value(1.3, phi + 0.3) == base.value(1.3, phi));
    // breaks rotate with the mask
    for (double b : base.angular_breaks()) {
        bool found = false;
        for (double rb : rot.angular_breaks())
            found = found || std::abs(std::remainder(rb - b - 0.3, 2 * kPi)) < 1e-12;
        CHECK(found);
    }
}

TEST_CASE("combinators")
{
    ModeGeometry g{1.0, 12};
    const ObjectMask half = make_half_plane(g);
    const ObjectMask strip = make_strip({0.5, kPi / 2, 0.0, 0.0}, g);
    const ObjectMask prod = multiply(half, strip);
    CHECK(prod.value(1.0, 0.3) == cd(1.0));
    CHECK(prod.value(1.0, -0.3) == cd(0.0));
    CHECK(prod.value(1.0, kPi / 2) == cd(0.0));

    const ObjectMask rc = radial_composite(empty_mask(g), half, 1.0);
    CHECK(rc.value(1.0, -0.5) == cd(1.0));   // r = rho / sqrt(2) < 1
    CHECK(rc.value(1.6, -0.5) == cd(0.0));

    const ObjectMask sc = sector_composite(empty_mask(g), ObjectMask(make_disk(0.5, g)), 0.0, kPi);
    CHECK(sc.value(0.1, 1.0) == cd(1.0));
    CHECK(sc.value(0.1, -1.0) == cd(0.0));

    CHECK_THROWS_AS(multiply(half, make_half_plane(ModeGeometry{2.0, 12})), std::invalid_argument);
}

TEST_CASE("cutoff replaces the exterior")
{
    ModeGeometry g{1.0, 12};
    const ObjectMask m = make_half_plane(g).with_cutoff(2.0);
    CHECK(m.value(1.0, -1.0) == cd(0.0));
    CHECK(m.value(3.0, -1.0) == cd(1.0));
}

TEST_CASE("pgm round trip and raster loading")
{
    const fs::path dir = scratch_dir("raster");
    GrayImage img;
    img.width = 5;
    img.height = 4;
    img.maxval = 255;
    img.pixels = {0, 255, 128, 7, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24};
    write_pgm(dir / "a.pgm", img);
    const GrayImage back = read_pgm(dir / "a.pgm");
    CHECK(back.width == 5);
    CHECK(back.height == 4);
    CHECK(back.pixels == img.pixels);

    GrayImage wide = img;
    wide.maxval = 1000;
    wide.pixels[3] = 999;
    write_pgm(dir / "w.pgm", wide);
    CHECK(read_pgm(dir / "w.pgm").pixels[3] == 999);

    {
        std::ofstream bad(dir / "bad.pgm", std::ios::binary);
        bad << "P5\n2 2\n255\n" << char(1);
    }
    CHECK_THROWS_AS(read_pgm(dir / "bad.pgm"), std::runtime_error);
    CHECK_THROWS_AS(read_pgm(dir / "missing.pgm"), std::runtime_error);

    RasterMeta meta{10.0, 2.0, 1.5, 100.0};
    const ObjectMask m = load_raster(dir / "a.pgm", meta, 4);
    CHECK(m.is_sampled());
    // the optical axis sits between rows 1 and 2 at column 2
    CHECK(std::abs(m.value(0.0, 0.0) - cd(0.5 * (12.0 + 17.0) / 255.0)) < 1e-12);

    RasterMeta off = meta;
    off.origin_x = 7.0;
    CHECK_THROWS_AS(load_raster(dir / "a.pgm", off, 4), std::invalid_argument);

    GrayImage small = img;
    small.width = 4;
    small.pixels.resize(16);
    write_pgm(dir / "small.pgm", small);
    CHECK_THROWS_AS(load_raster(dir / "a.pgm", meta, 4, dir / "small.pgm"), std::invalid_argument);

    {
        std::ofstream side(dir / "meta.json");
        side << R"({"pixel_pitch_um": 3.5, "origin_px": [1, 2], "w0_um": 210})";
    }
    const RasterMeta parsed = read_raster_sidecar(dir / "meta.json");
    CHECK(parsed.pixel_pitch_um == 3.5);
    CHECK(parsed.origin_y == 2.0);
    {
        std::ofstream side(dir / "meta_bad.json");
        side << R"({"pixel_pitch_um": 3.5, "origin_px": [1], "w0_um": 210})";
    }
    CHECK_THROWS_AS(read_raster_sidecar(dir / "meta_bad.json"), std::invalid_argument);
}

TEST_CASE("rasterized smooth mask reproduces the analytic matrix")
{
    ModeGeometry g{1.0, 4};
    const ObjectMask smooth = make_smooth_random(3, g);
    // 6.4 w0 wide at 0.02 w0 per pixel, bilinear error ~ pitch^2
    const RasterMask raster = render_raster(smooth, 321, 321, 0.02);
    const ObjectMask sampled = make_raster_mask(raster, g, smooth.value(20.0, 0.0));
    const OperatorMatrix a = compute_matrix(smooth, 4);
    const OperatorMatrix b = compute_matrix(sampled, 4);
    CHECK(a.max_abs_difference(b) < 1e-3);
}
