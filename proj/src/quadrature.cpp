#include <oamid/quadrature.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace oamid::quad {

Rule gauss_legendre(int n)
{
    if (n < 1)
        throw std::invalid_argument("gauss_legendre needs n >= 1");
    Rule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        {
            // final derivative at the converged node
            double p0 = 1.0;
            double p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1)
        rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

Rule gauss_laguerre(int n, double alpha)
{
    if (n < 1)
        throw std::invalid_argument("gauss_laguerre needs n >= 1");
    if (!(alpha > -1.0))
        throw std::invalid_argument("gauss_laguerre needs alpha > -1");

    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(n > 1 ? n - 1 : 1);
    for (int i = 0; i < n; ++i)
        diag(i) = 2.0 * i + alpha + 1.0;
    for (int i = 1; i < n; ++i)
        sub(i - 1) = std::sqrt(i * (i + alpha));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("gauss_laguerre: eigensolver failed");

    // The eigenvector weights mu0 v0^2 are only accurate in absolute terms;
    // the far nodes carry weights far below the rounding level of v0, which
    // matters once the integrand grows polynomially. Polish every node with
    // Newton on the orthonormal recurrence and take the Christoffel weight
    // mu0 / sum_j q_j(t)^2, carrying the running scale in log form.
    const double mu0 = std::tgamma(alpha + 1.0);
    const double log_mu0 = std::lgamma(alpha + 1.0);
    auto recurrence = [&](double t, double& qn, double& dqn, double& log_sum) {
        constexpr double kBig = 1e150;
        double q_prev = 0.0, q = 1.0, d_prev = 0.0, d = 0.0;
        double sum = 1.0;
        double log_scale = 0.0;  // true values = stored * exp(log_scale)
        for (int j = 0; j < n; ++j) {
            const double a = 2.0 * j + alpha + 1.0;
            const double b_prev = j > 0 ? std::sqrt(j * (j + alpha)) : 0.0;
            const double b_next = std::sqrt((j + 1.0) * (j + 1.0 + alpha));
            const double q_next = ((t - a) * q - b_prev * q_prev) / b_next;
            const double d_next = ((t - a) * d + q - b_prev * d_prev) / b_next;
            q_prev = q;
            q = q_next;
            d_prev = d;
            d = d_next;
            if (j + 1 < n)
                sum += q * q;
            if (std::abs(q) > kBig || std::abs(d) > kBig) {
                q_prev /= kBig;
                q /= kBig;
                d_prev /= kBig;
                d /= kBig;
                sum /= kBig * kBig;
                log_scale += std::log(kBig);
            }
        }
        qn = q;
        dqn = d;
        log_sum = std::log(sum) + 2.0 * log_scale;
    };

    Rule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double t = solver.eigenvalues()(i);
        double qn = 0.0, dqn = 0.0, log_sum = 0.0;
        for (int iter = 0; iter < 4; ++iter) {
            recurrence(t, qn, dqn, log_sum);
            if (dqn == 0.0)
                break;
            const double step = qn / dqn;
            t -= step;
            if (std::abs(step) <= 1e-16 * t)
                break;
        }
        recurrence(t, qn, dqn, log_sum);
        rule.nodes[static_cast<std::size_t>(i)] = t;
        rule.weights[static_cast<std::size_t>(i)] = n == 1 ? mu0 : std::exp(log_mu0 - log_sum);
    }
    return rule;
}

namespace {

template <typename Key, typename Make>
const Rule& cached(std::map<Key, std::unique_ptr<Rule>>& cache, std::mutex& mutex,
                   const Key& key, Make make)
{
    std::lock_guard lock(mutex);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<Rule>(make())).first;
    return *it->second;
}

} // namespace

const Rule& cached_gauss_legendre(int n)
{
    static std::map<int, std::unique_ptr<Rule>> cache;
    static std::mutex mutex;
    return cached(cache, mutex, n, [n] { return gauss_legendre(n); });
}

const Rule& cached_gauss_laguerre(int n, double alpha)
{
    static std::map<std::pair<int, double>, std::unique_ptr<Rule>> cache;
    static std::mutex mutex;
    return cached(cache, mutex, std::pair{n, alpha}, [n, alpha] { return gauss_laguerre(n, alpha); });
}

} // namespace oamid::quad
