#include <doctest.h>

#include <oamid/projection.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

using namespace oamid;
using cd = std::complex<double>;

namespace {

const double kPi = std::numbers::pi;

// Unmasked radial factor Gamma(n/2 + 1) / sqrt(|k|! |l|!).
double radial_factor(int k, int l)
{
    const int n = std::abs(k) + std::abs(l);
    return std::exp(std::lgamma(0.5 * n + 1.0) - 0.5 * (std::lgamma(std::abs(k) + 1.0) + std::lgamma(std::abs(l) + 1.0)));
}

// (1/2 pi) int_a^b exp(-i m phi) dphi
cd sector_coefficient(int m, double a, double b)
{
    if (m == 0)
        return (b - a) / (2 * kPi);
    return (std::polar(1.0, -m * a) - std::polar(1.0, -m * b)) / (cd(0.0, 2 * kPi * m));
}

} // namespace

TEST_CASE("no object gives the identity")
{
    const OperatorMatrix a = compute_matrix(ObjectMask(ModeGeometry{1.0, 12}), 12);
    CHECK((a.entries() - Eigen::MatrixXcd::Identity(25, 25)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(a.meta().method == "fast");
    CHECK(a.meta().azimuthal_scheme == "uniform_fft");
}

TEST_CASE("sector masks match the closed form")
{
    ModeGeometry g{1.0, 10};
    for (auto [a, b] : {std::pair{0.0, kPi}, std::pair{0.3, 2.0}, std::pair{-1.0, 4.5}}) {
        const OperatorMatrix m = compute_matrix(make_sector(a, b, g), 10);
        double worst = 0.0;
        for (int k = -10; k <= 10; ++k)
            for (int l = -10; l <= 10; ++l)
                worst = std::max(worst, std::abs(m(k, l) - radial_factor(k, l) * sector_coefficient(k - l, a, b)));
        CHECK(worst < 1e-12);
        CHECK(m.meta().azimuthal_scheme == "panel_gauss");
    }
}

TEST_CASE("opaque disk matches the incomplete gamma function")
{
    ModeGeometry g{1.0, 12};
    const double radius = 0.9;
    const double a2 = std::pow(g.rho_from_radius(radius), 2);
    const OperatorMatrix m = compute_matrix(make_disk(radius, g), 12);
    for (int k = -12; k <= 12; ++k) {
        for (int l = -12; l <= 12; ++l) {
            if (k != l) {
                CHECK(std::abs(m(k, l)) < 1e-14);
                continue;
            }
            // Q(|l| + 1, a^2) = exp(-a^2) sum_j a^(2j) / j!
            double q = 0.0, term = 1.0;
            for (int j = 0; j <= std::abs(l); ++j) {
                if (j > 0)
                    term *= a2 / j;
                q += term;
            }
            q *= std::exp(-a2);
            CHECK(std::abs(m(k, l) - q) < 1e-12);
        }
    }
}

TEST_CASE("phase vortex shifts the OAM by its charge")
{
    ModeGeometry g{1.0, 8};
    const OperatorMatrix m = compute_matrix(make_phase_vortex(3, g), 8);
    for (int k = -8; k <= 8; ++k)
        for (int l = -8; l <= 8; ++l)
            CHECK(std::abs(m(k, l) - (k == l + 3 ? radial_factor(k, l) : 0.0)) < 1e-12);
}

TEST_CASE("fast path agrees with the direct integral")
{
    ModeGeometry g{1.0, 6};
    for (std::uint64_t seed : {1u, 2u}) {
        const ObjectMask m = make_smooth_random(seed, g);
        CHECK(compute_matrix(m, 6).max_abs_difference(matrix_oracle(m, 6)) < 1e-9);
    }
    const ObjectMask cross = make_cross(3, {0.83, 0.1, 0.07, 0.0}, {}, g);
    CHECK(compute_matrix(cross, 6).max_abs_difference(matrix_oracle(cross, 6)) < 1e-9);
    CHECK_THROWS_AS(matrix_oracle(cross, kOracleMaxOrder + 1), std::invalid_argument);
}

TEST_CASE("profiles assemble into the same matrix")
{
    ModeGeometry g{1.0, 3};
    for (const ObjectMask& m : {make_smooth_random(4, g), make_cross(2, {0.83, 0.0, 0.0, 0.0}, {}, g)}) {
        ProjectionOptions opt;
        auto grid = std::make_shared<const AzimuthalGrid>(make_azimuthal_grid(m, 3, opt));
        std::vector<AzimuthalProfile> profiles;
        for (int k = -3; k <= 3; ++k)
            for (int l = -3; l <= 3; ++l)
                profiles.push_back(radial_profile(m, LGIndex(k), LGIndex(l), grid, opt));
        const OperatorMatrix a = matrix_from_profile(profiles, 3);
        CHECK(a.max_abs_difference(compute_matrix(m, 3, opt)) < 1e-13);
        profiles.pop_back();
        CHECK_THROWS_AS(matrix_from_profile(profiles, 3), std::invalid_argument);
    }
}

TEST_CASE("uniform profile of an edge-free mask")
{
    const ObjectMask m = make_smooth_random(9, ModeGeometry{1.0, 4});
    const AzimuthalProfile p = radial_profile(m, LGIndex(2), LGIndex(-1), 64);
    CHECK(p.values.size() == 64);
    CHECK(p.grid->scheme == AzimuthalScheme::uniform_fft);
    double wsum = 0.0;
    for (double w : p.grid->weights)
        wsum += w;
    CHECK(wsum == doctest::Approx(2 * kPi));
}

TEST_CASE("rotation multiplies entries by a phase")
{
    ModeGeometry g{1.0, 8};
    const ObjectMask base = make_cross(3, {0.83, 0.0, 0.05, 0.0}, {}, g);
    const double delta = 0.731;
    const OperatorMatrix a = compute_matrix(base, 8);
    const OperatorMatrix b = compute_matrix(rotate_mask(base, delta), 8);
    double worst = 0.0;
    for (int k = -8; k <= 8; ++k)
        for (int l = -8; l <= 8; ++l)
            worst = std::max(worst, std::abs(b(k, l) - std::polar(1.0, -(k - l) * delta) * a(k, l)));
    CHECK(worst < 1e-12);
}

TEST_CASE("results do not depend on the thread count")
{
    const ObjectMask m = make_cross(2, {0.83, 0.3, 0.0, 0.0}, {}, ModeGeometry{1.0, 12});
    ProjectionOptions one, four;
    one.threads = 1;
    four.threads = 4;
    CHECK(compute_matrix(m, 12, one).entries() == compute_matrix(m, 12, four).entries());
}

TEST_CASE("option validation and quadrature failure")
{
    const ObjectMask smooth = make_smooth_random(1, ModeGeometry{1.0, 12});
    ProjectionOptions opt;
    opt.n_phi = 48;
    CHECK_THROWS_AS(compute_matrix(smooth, 12, opt), std::invalid_argument);
    opt.n_phi = 96;
    CHECK_THROWS_AS(compute_matrix(smooth, 12, opt), std::invalid_argument);

    ProjectionOptions starved;
    starved.radial_nodes = 4;
    starved.max_radial_nodes = 4;
    starved.segment_nodes = 2;
    starved.max_segment_nodes = 2;
    try {
        compute_matrix(smooth, 12, starved);
        FAIL("expected a quadrature error");
    } catch (const QuadratureError& e) {
        CHECK(e.worst_phi() >= 0.0);
        CHECK(e.worst_phi() < 2 * kPi);
    }
}

TEST_CASE("serialization")
{
    const OperatorMatrix a = compute_matrix(make_half_plane(ModeGeometry{1.0, 2}), 2);
    const OperatorMatrix b = operator_matrix_from_json(to_json(a));
    CHECK(b.l_max() == 2);
    CHECK(a.entries() == b.entries());
    CHECK(b.meta().azimuthal_scheme == a.meta().azimuthal_scheme);

    std::ostringstream csv;
    write_abs2_csv(csv, a);
    CHECK(csv.str().rfind("k,l,abs2\n", 0) == 0);

    const OperatorMatrix f = flushed_for_report(a);
    CHECK(f(1, 0) != cd(0.0));
    CHECK(f(2, 0) == cd(0.0));  // even m vanishes for the half-plane

    CHECK_THROWS_AS(operator_matrix_from_json(nlohmann::json{{"l_max", 1}, {"entries", {{1, 0}}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(a.at(LGIndex(3), LGIndex(0)), std::out_of_range);
    CHECK(a.sub_block(1).dimension() == 3);
}
