#pragma once

#include <memory>
#include <vector>

namespace oamid::quad {

struct Rule
{
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre rule on [-1, 1]. Nodes by Newton iteration on the
// three-term recurrence.
Rule gauss_legendre(int n);

// Generalized Gauss-Laguerre rule for the weight t^alpha exp(-t) on
// [0, inf), alpha > -1. Golub-Welsch on the Jacobi matrix; the weights sum
// to Gamma(alpha + 1).
Rule gauss_laguerre(int n, double alpha);

// Cached, thread-safe accessors. The returned rules stay alive for the
// lifetime of the process.
const Rule& cached_gauss_legendre(int n);
const Rule& cached_gauss_laguerre(int n, double alpha);

} // namespace oamid::quad
