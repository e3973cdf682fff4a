#include <doctest.h>

#include <oamid/quadrature.hpp>

#include <cmath>
#include <stdexcept>

using namespace oamid::quad;

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n - 1")
{
    for (int n : {1, 2, 5, 16, 64}) {
        const Rule r = gauss_legendre(n);
        double wsum = 0.0;
        for (double w : r.weights)
            wsum += w;
        CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
        const int deg = 2 * n - 2;  // even, nonzero integral
        double s = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i)
            s += r.weights[i] * std::pow(r.nodes[i], deg);
        CHECK(s == doctest::Approx(2.0 / (deg + 1)).epsilon(1e-13));
    }
}

TEST_CASE("generalized Gauss-Laguerre moments")
{
    for (double alpha : {0.0, 0.5, 3.0, 12.0}) {
        for (int n : {8, 64, 256}) {
            const Rule r = gauss_laguerre(n, alpha);
            for (int j : {0, 1, 5, 10}) {
                double s = 0.0;
                for (std::size_t i = 0; i < r.size(); ++i)
                    s += r.weights[i] * std::pow(r.nodes[i], j);
                const double exact = std::tgamma(alpha + j + 1.0);
                CHECK(std::abs(s - exact) / exact < 1e-12);
            }
        }
    }
}

TEST_CASE("Laguerre far-node weights stay accurate for growing integrands")
{
    // int_0^inf (4 + s)^12 exp(-s) ds = sum_j C(12, j) 4^(12 - j) j!
    double exact = 0.0;
    double binom = 1.0;
    double fact = 1.0;
    for (int j = 0; j <= 12; ++j) {
        if (j > 0) {
            binom = binom * (12 - j + 1) / j;
            fact *= j;
        }
        exact += binom * std::pow(4.0, 12 - j) * fact;
    }
    for (int n : {64, 128, 256}) {
        const Rule& r = cached_gauss_laguerre(n, 0.0);
        double s = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i)
            s += r.weights[i] * std::pow(4.0 + r.nodes[i], 12);
        CHECK(std::abs(s - exact) / exact < 1e-12);
    }
}

TEST_CASE("rule argument checks and caching")
{
    CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
    CHECK_THROWS_AS(gauss_laguerre(4, -1.0), std::invalid_argument);
    CHECK(&cached_gauss_legendre(24) == &cached_gauss_legendre(24));
    CHECK(&cached_gauss_laguerre(64, 1.5) == &cached_gauss_laguerre(64, 1.5));
}
