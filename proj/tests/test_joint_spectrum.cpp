#include <doctest.h>

#include <oamid/joint_spectrum.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

using namespace oamid;
using cd = std::complex<double>;

namespace {

OperatorMatrix random_matrix(int l_max, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXcd e(2 * l_max + 1, 2 * l_max + 1);
    for (Eigen::Index i = 0; i < e.size(); ++i)
        e(i) = cd(g(rng), g(rng));
    return OperatorMatrix(l_max, e);
}

NaturalSpectrum random_spectrum(int l_max, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<cd> c(static_cast<std::size_t>(2 * l_max + 1));
    for (auto& v : c)
        v = cd(g(rng), g(rng));
    return NaturalSpectrum(l_max, c, "random");
}

const ModeGeometry kGeom{210.0, 12};
const StripSpec kStrip{0.83 * 210.0, 0.0, 0.0, 0.0};

} // namespace

TEST_CASE("no object: anti-diagonal with the natural spectrum")
{
    const NaturalSpectrum c = parametric_spectrum(0.5, 12);
    const JointSpectrum js = synthesize(c, OperatorMatrix(12, Eigen::MatrixXcd::Identity(25, 25)));
    for (int l_r = -12; l_r <= 12; ++l_r)
        for (int l_o = -12; l_o <= 12; ++l_o)
            CHECK(js.rate(l_r, l_o) == (l_o == -l_r ? std::norm(c(l_r)) : 0.0));
    CHECK(off_diagonal_rate(js) == 0.0);
    const auto sums = diagonal_sums(js);
    CHECK(sums.at(0) == doctest::Approx(js.total_rate()));
    CHECK(sums.size() == 49);

    const JointSpectrum flipped = apply_parity_flip(js);
    for (int l = -12; l <= 12; ++l)
        CHECK(flipped.rate(l, l) == doctest::Approx(std::norm(c(l))));
    CHECK(off_diagonal_rate(flipped) == 0.0);
    const auto row = cross_section(flipped, 0);
    for (int l_o = -12; l_o <= 12; ++l_o)
        CHECK((row[static_cast<std::size_t>(l_o + 12)] > 0.0) == (l_o == 0));
}

TEST_CASE("pump-like spectrum populates one row")
{
    std::vector<cd> delta(25, 0.0);
    delta[12] = 1.0;
    const NaturalSpectrum c(12, delta, "delta");
    const OperatorMatrix a = random_matrix(12, 3);
    const JointSpectrum js = synthesize(c, a);
    for (int l_r = -12; l_r <= 12; ++l_r)
        for (int l_o = -12; l_o <= 12; ++l_o)
            CHECK(js.rate(l_r, l_o) == (l_r == 0 ? doctest::Approx(std::norm(a(l_o, 0))) : doctest::Approx(0.0)));
}

TEST_CASE("rows are the spectrum times rows of the operator")
{
    const int L = 6;
    const OperatorMatrix a = random_matrix(L, 7);
    const NaturalSpectrum c = random_spectrum(L, 8);
    const JointSpectrum js = synthesize(c, a);
    for (int l_r = -L; l_r <= L; ++l_r)
        for (int l_o = -L; l_o <= L; ++l_o) {
            CHECK(js.amplitude(l_r, l_o) == c(-l_r) * a(l_o, -l_r));
            CHECK(js.rate(l_r, l_o) == std::norm(js.amplitude(l_r, l_o)));
        }
    CHECK_THROWS_AS(synthesize(parametric_spectrum(0.5, 5), a), std::invalid_argument);
}

TEST_CASE("parity flip is an involution and a permutation")
{
    const JointSpectrum js = synthesize(random_spectrum(5, 1), random_matrix(5, 2));
    const JointSpectrum twice = apply_parity_flip(apply_parity_flip(js));
    CHECK(twice.parity_flip() == js.parity_flip());
    CHECK(twice.amplitudes() == js.amplitudes());
    std::vector<double> a(js.rates().data(), js.rates().data() + js.rates().size());
    const JointSpectrum f = apply_parity_flip(js);
    std::vector<double> b(f.rates().data(), f.rates().data() + f.rates().size());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    // diagonal sums are convention independent (up to summation order)
    const auto da = diagonal_sums(js), db = diagonal_sums(f);
    REQUIRE(da.size() == db.size());
    for (const auto& [m, v] : da)
        CHECK(db.at(m) == doctest::Approx(v).epsilon(1e-14));
}

TEST_CASE("diagonal sums partition the total")
{
    const JointSpectrum js = synthesize(random_spectrum(4, 5), random_matrix(4, 6));
    double s = 0.0;
    for (const auto& [m, v] : diagonal_sums(js))
        s += v;
    CHECK(s == doctest::Approx(js.total_rate()).epsilon(1e-14));
}

TEST_CASE("pump OAM moves the conservation diagonal")
{
    const NaturalSpectrum c = parametric_spectrum(0.5, 6).with_pump(2);
    const JointSpectrum js = synthesize(c, OperatorMatrix(6, Eigen::MatrixXcd::Identity(13, 13)));
    for (int l_r = -6; l_r <= 6; ++l_r)
        for (int l_o = -6; l_o <= 6; ++l_o)
            if (js.rate(l_r, l_o) > 0.0)
                CHECK(l_r + l_o == 2);
    CHECK(off_diagonal_rate(js) == 0.0);
}

TEST_CASE("two-strip cross adds diagonals at +-4 and matches the direct integral")
{
    const int L = 6;
    const ModeGeometry g{210.0, L};
    const ObjectMask cross = make_cross(2, kStrip, {}, g);
    const NaturalSpectrum c = parametric_spectrum(0.5, L);
    const JointSpectrum fast = synthesize(c, compute_matrix(cross, L));
    const JointSpectrum slow = synthesize(c, matrix_oracle(cross, L));
    CHECK((fast.rates() - slow.rates()).cwiseAbs().maxCoeff() < 1e-10);
    const auto sums = diagonal_sums(fast);
    CHECK(sums.at(4) > 1e-3 * fast.total_rate());
    CHECK(sums.at(-4) > 1e-3 * fast.total_rate());
    for (const auto& [m, v] : sums)
        if (m % 4 != 0)
            CHECK(v < 1e-16);

    const auto row = cross_section(apply_parity_flip(fast), 0);
    const double r0 = row[static_cast<std::size_t>(L)];
    const double r4 = row[static_cast<std::size_t>(L + 4)];
    for (int l_o = -L; l_o <= L; ++l_o)
        if (l_o % 4 != 0)
            CHECK(row[static_cast<std::size_t>(l_o + L)] < 1e-16);
    CHECK(r4 > 0.0);
    CHECK(r0 > r4);
    CHECK_THROWS_AS(cross_section(fast, L + 1), std::out_of_range);
}

TEST_CASE("rotating the object leaves every rate unchanged")
{
    const ObjectMask m = make_cross(3, {175.0, 0.0, 10.0, 0.0}, {}, kGeom);
    const NaturalSpectrum c = parametric_spectrum(0.6, 12);
    const JointSpectrum a = synthesize(c, compute_matrix(m, 12));
    const JointSpectrum b = synthesize(c, compute_matrix(rotate_mask(m, 1.1), 12));
    CHECK((a.rates() - b.rates()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("isolation inverts synthesis")
{
    const int L = 5;
    const OperatorMatrix a = random_matrix(L, 11);
    const NaturalSpectrum c = random_spectrum(L, 12);
    for (bool flip : {false, true}) {
        JointSpectrum js = synthesize(c, a);
        if (flip)
            js = apply_parity_flip(js);
        const IsolatedMatrix iso = isolate_object(js, c, 1e-12);
        for (int k = -L; k <= L; ++k)
            for (int l = -L; l <= L; ++l) {
                CHECK(iso.is_valid(k, l));
                CHECK(std::abs(iso.estimate(k, l) - a(k, l)) < 1e-12 * std::max(1.0, std::abs(a(k, l))));
            }
    }

    std::vector<cd> narrow(2 * L + 1, 0.0);
    for (int l = -3; l <= 3; ++l)
        narrow[static_cast<std::size_t>(l + L)] = 1.0;
    const NaturalSpectrum cn(L, narrow, "narrow");
    const IsolatedMatrix iso = isolate_object(synthesize(cn, a), cn, 1e-9);
    for (int k = -L; k <= L; ++k)
        for (int l = -L; l <= L; ++l)
            CHECK(iso.is_valid(k, l) == (std::abs(l) <= 3));

    CHECK_THROWS_AS(isolate_object(synthesize(cn, a), cn, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(isolate_object(synthesize(cn, a), cn, 10.0), std::invalid_argument);
}

TEST_CASE("exports")
{
    const JointSpectrum js = apply_parity_flip(synthesize(parametric_spectrum(0.5, 2),
                                                          OperatorMatrix(2, Eigen::MatrixXcd::Identity(5, 5))));
    const auto j = to_json(js);
    CHECK(j["parity_flip"] == true);
    CHECK(j["rates"].size() == 5);
    std::ostringstream rates, cs, ds, cons;
    write_rates_csv(rates, js);
    write_cross_section_csv(cs, js, 0);
    write_diagonal_sums_csv(ds, js);
    write_conservation_diagonal_csv(cons, js);
    CHECK(rates.str().rfind("l_r,l_o,rate\n", 0) == 0);
    CHECK(cs.str().rfind("l_o,rate\n", 0) == 0);
    CHECK(ds.str().find("\n0,") != std::string::npos);
    CHECK(cons.str().rfind("l,rate\n", 0) == 0);
}
