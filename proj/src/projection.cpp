#include <oamid/projection.hpp>

#include <oamid/fft.hpp>
#include <oamid/parallel.hpp>
#include <oamid/quadrature.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

namespace oamid {

using cd = std::complex<double>;
using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Radial segments beyond this point are integrated with a shifted
// Gauss-Laguerre tail rule.
constexpr double kTailStart = 2.0;
// Composite rules (sampled masks, oracle) stop here; rho^25 exp(-rho^2) < 1e-11 at 9.
constexpr double kSampledRadius = 9.0;
constexpr double kOracleRadius = 10.0;

// Unmasked value of int rho^(n+1) exp(-rho^2) drho; the scale for
// convergence tests.
double moment_scale(int n)
{
    return 0.5 * std::exp(std::lgamma(0.5 * n + 1.0));
}

double pair_prefactor(int k, int l)
{
    // 2 / sqrt(|k|! |l|!)
    return 2.0 * std::exp(-0.5 * (log_factorial(std::abs(k)) + log_factorial(std::abs(l))));
}

struct RadialResult
{
    std::vector<cd> moments;  // index n
    double error = 0.0;       // max over n of |delta| / scale
    bool converged = true;
    int nodes_used = 0;
};

// Adds sum_i w_i rho_i^(n+1) exp(-rho_i^2) A_i to acc[n] for the rule mapped to [a, b].
void accumulate_segment(const ObjectMask& mask, double phi, double a, double b, const quad::Rule& rule,
                        int n_min, int n_max, std::vector<cd>& acc)
{
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double rho = mid + half * rule.nodes[i];
        const cd value = mask.value(rho, phi);
        if (value == cd(0.0))
            continue;
        double p = half * rule.weights[i] * std::exp(-rho * rho) * rho;
        for (int n = 0; n < n_min; ++n)
            p *= rho;
        for (int n = n_min; n <= n_max; ++n) {
            acc[static_cast<std::size_t>(n)] += p * value;
            p *= rho;
        }
    }
}

// Tail int_T^inf rho^(n+1) exp(-rho^2) A drho = (1/2) exp(-T^2) int_0^inf (T^2 + s)^(n/2) exp(-s) A ds.
void accumulate_tail(const ObjectMask& mask, double phi, double tail, const quad::Rule& rule, int n_min, int n_max,
                     std::vector<cd>& acc)
{
    const double t2 = tail * tail;
    const double front = 0.5 * std::exp(-t2);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double t = t2 + rule.nodes[i];
        const double rho = std::sqrt(t);
        const cd value = mask.value(rho, phi);
        if (value == cd(0.0))
            continue;
        const double sq = std::sqrt(t);
        double p = front * rule.weights[i];
        for (int n = 0; n < n_min; ++n)
            p *= sq;
        for (int n = n_min; n <= n_max; ++n) {
            acc[static_cast<std::size_t>(n)] += p * value;
            p *= sq;
        }
    }
}

double max_scaled_delta(const std::vector<cd>& x, const std::vector<cd>& y, int n_min, int n_max)
{
    double worst = 0.0;
    for (int n = n_min; n <= n_max; ++n) {
        const auto i = static_cast<std::size_t>(n);
        worst = std::max(worst, std::abs(x[i] - y[i]) / moment_scale(n));
    }
    return worst;
}

RadialResult segmented_moments(const ObjectMask& mask, double phi, int n_min, int n_max,
                               const std::vector<double>& breaks, const ProjectionOptions& opt)
{
    std::vector<double> points{0.0};
    for (double b : breaks) {
        if (b > points.back())
            points.push_back(b);
    }
    if (points.back() < kTailStart)
        points.push_back(kTailStart);

    RadialResult result;
    result.moments.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    std::vector<cd> coarse(result.moments.size());
    std::vector<cd> fine(result.moments.size());

    for (std::size_t s = 0; s + 1 < points.size(); ++s) {
        const double a = points[s];
        const double b = points[s + 1];
        int order = opt.segment_nodes;
        std::fill(coarse.begin(), coarse.end(), cd(0.0));
        accumulate_segment(mask, phi, a, b, quad::cached_gauss_legendre(order), n_min, n_max, coarse);
        double delta = std::numeric_limits<double>::infinity();
        while (order < opt.max_segment_nodes) {
            order *= 2;
            std::fill(fine.begin(), fine.end(), cd(0.0));
            accumulate_segment(mask, phi, a, b, quad::cached_gauss_legendre(order), n_min, n_max, fine);
            delta = max_scaled_delta(coarse, fine, n_min, n_max);
            std::swap(coarse, fine);
            if (delta <= opt.radial_tolerance)
                break;
        }
        result.nodes_used = std::max(result.nodes_used, order);
        result.error = std::max(result.error, delta);
        if (!(delta <= opt.radial_tolerance))
            result.converged = false;
        for (std::size_t n = 0; n < coarse.size(); ++n)
            result.moments[n] += coarse[n];
    }

    const double tail = points.back();
    int order = opt.radial_nodes;
    std::fill(coarse.begin(), coarse.end(), cd(0.0));
    accumulate_tail(mask, phi, tail, quad::cached_gauss_laguerre(order, 0.0), n_min, n_max, coarse);
    double delta = std::numeric_limits<double>::infinity();
    while (order < opt.max_radial_nodes) {
        order *= 2;
        std::fill(fine.begin(), fine.end(), cd(0.0));
        accumulate_tail(mask, phi, tail, quad::cached_gauss_laguerre(order, 0.0), n_min, n_max, fine);
        delta = max_scaled_delta(coarse, fine, n_min, n_max);
        std::swap(coarse, fine);
        if (delta <= opt.radial_tolerance)
            break;
    }
    result.nodes_used = std::max(result.nodes_used, order);
    result.error = std::max(result.error, delta);
    if (!(delta <= opt.radial_tolerance))
        result.converged = false;
    for (std::size_t n = 0; n < coarse.size(); ++n)
        result.moments[n] += coarse[n];
    return result;
}

// Generalized Gauss-Laguerre in t = rho^2 with alpha = n / 2: the weight of
// the radial integrand exactly.
bool laguerre_moment(const ObjectMask& mask, double phi, int n, const ProjectionOptions& opt, cd& out,
                     double& error, int& nodes_used)
{
    const double alpha = 0.5 * n;
    auto eval = [&](int order) {
        const quad::Rule& rule = quad::cached_gauss_laguerre(order, alpha);
        cd acc = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i)
            acc += rule.weights[i] * mask.value(std::sqrt(rule.nodes[i]), phi);
        return 0.5 * acc;
    };
    int order = opt.radial_nodes;
    cd coarse = eval(order);
    double delta = std::numeric_limits<double>::infinity();
    while (order < opt.max_radial_nodes) {
        order *= 2;
        const cd fine = eval(order);
        delta = std::abs(fine - coarse) / moment_scale(n);
        coarse = fine;
        if (delta <= opt.radial_tolerance)
            break;
    }
    out = coarse;
    error = delta;
    nodes_used = order;
    return delta <= opt.radial_tolerance;
}

RadialResult sampled_moments(const ObjectMask& mask, double phi, int n_min, int n_max, const ProjectionOptions&)
{
    std::vector<double> points{0.0};
    const double step = mask.sample_pitch();
    const auto breaks = mask.radial_breaks(phi);
    std::size_t bi = 0;
    for (double r = step; r < kSampledRadius + 0.5 * step; r += step) {
        while (bi < breaks.size() && breaks[bi] < r) {
            if (breaks[bi] > points.back())
                points.push_back(breaks[bi]);
            ++bi;
        }
        points.push_back(std::min(r, kSampledRadius));
    }
    RadialResult result;
    result.moments.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    const quad::Rule& rule = quad::cached_gauss_legendre(4);
    for (std::size_t s = 0; s + 1 < points.size(); ++s) {
        if (points[s + 1] > points[s])
            accumulate_segment(mask, phi, points[s], points[s + 1], rule, n_min, n_max, result.moments);
    }
    result.nodes_used = static_cast<int>(4 * (points.size() - 1));
    return result;
}

// I_n(phi) for n in [n_min, n_max]; entries below n_min are left at 0.
RadialResult radial_moments(const ObjectMask& mask, double phi, int n_min, int n_max, const ProjectionOptions& opt)
{
    if (mask.is_sampled())
        return sampled_moments(mask, phi, n_min, n_max, opt);

    const auto breaks = mask.radial_breaks(phi);
    if (breaks.empty()) {
        RadialResult result;
        result.moments.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
        bool ok = true;
        for (int n = n_min; n <= n_max && ok; ++n) {
            double err = 0.0;
            int used = 0;
            ok = laguerre_moment(mask, phi, n, opt, result.moments[static_cast<std::size_t>(n)], err, used);
            result.error = std::max(result.error, err);
            result.nodes_used = std::max(result.nodes_used, used);
        }
        if (ok)
            return result;
        // A(sqrt(t)) not smooth enough for the weighted rule; fall back.
    }
    return segmented_moments(mask, phi, n_min, n_max, breaks, opt);
}

void check_convergence(const std::vector<RadialResult>& results, const AzimuthalGrid& grid)
{
    double worst = -1.0;
    std::size_t where = 0;
    for (std::size_t j = 0; j < results.size(); ++j) {
        if (!results[j].converged && results[j].error > worst) {
            worst = results[j].error;
            where = j;
        }
    }
    if (worst >= 0.0) {
        std::ostringstream msg;
        msg << "radial quadrature did not converge; worst sample phi = " << grid.phi[where]
            << " with relative change " << worst;
        throw QuadratureError(msg.str(), grid.phi[where], worst);
    }
}

const char* scheme_name(AzimuthalScheme s)
{
    return s == AzimuthalScheme::uniform_fft ? "uniform_fft" : "panel_gauss";
}

std::size_t bin_of(int m, std::size_t n)
{
    const auto nn = static_cast<long long>(n);
    long long b = m % nn;
    if (b < 0)
        b += nn;
    return static_cast<std::size_t>(b);
}

// (1/2 pi) sum_j w_j s_j exp(-i m phi_j) on a panel grid.
cd panel_coefficient(const AzimuthalGrid& grid, const std::vector<cd>& samples, int m)
{
    cd acc = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j)
        acc += grid.weights[j] * samples[j] * std::polar(1.0, -m * grid.phi[j]);
    return acc / kTwoPi;
}

void append_panels(std::vector<double>& phi, std::vector<double>& weights, double a, double b, double max_width,
                   const quad::Rule& rule)
{
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / max_width - 1e-12)));
    const double h = (b - a) / pieces;
    for (int p = 0; p < pieces; ++p) {
        const double lo = a + p * h;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            phi.push_back(lo + 0.5 * h * (rule.nodes[i] + 1.0));
            weights.push_back(0.5 * h * rule.weights[i]);
        }
    }
}

AzimuthalGrid panel_grid(const std::vector<double>& breaks, double max_width, int order)
{
    AzimuthalGrid grid;
    grid.scheme = AzimuthalScheme::panel_gauss;
    const quad::Rule& rule = quad::cached_gauss_legendre(order);
    for (std::size_t i = 0; i < breaks.size(); ++i) {
        const double a = breaks[i];
        const double b = i + 1 < breaks.size() ? breaks[i + 1] : breaks.front() + kTwoPi;
        append_panels(grid.phi, grid.weights, a, b, max_width, rule);
    }
    return grid;
}

AzimuthalGrid uniform_grid(int n)
{
    AzimuthalGrid grid;
    grid.scheme = AzimuthalScheme::uniform_fft;
    grid.phi.resize(static_cast<std::size_t>(n));
    grid.weights.assign(static_cast<std::size_t>(n), kTwoPi / n);
    for (int j = 0; j < n; ++j)
        grid.phi[static_cast<std::size_t>(j)] = kTwoPi * j / n;
    return grid;
}

} // namespace

AzimuthalGrid make_azimuthal_grid(const ObjectMask& mask, int l_max, const ProjectionOptions& options)
{
    if (!mask.angular_breaks().empty() && !mask.is_sampled()) {
        if (!(options.max_panel_width > 0.0) || options.panel_order < 2)
            throw std::invalid_argument("panel width and order must be positive");
        return panel_grid(mask.angular_breaks(), options.max_panel_width, options.panel_order);
    }
    int n = options.n_phi;
    if (!is_power_of_two(static_cast<std::size_t>(std::max(n, 0))))
        throw std::invalid_argument("n_phi must be a power of two");
    if (n < 4 * l_max + 4)
        throw std::invalid_argument("n_phi must be at least 4 l_max + 4");
    if (mask.is_sampled()) {
        // resolve the pixel pitch on the ring at rho = 6
        const double needed = kTwoPi * 6.0 / mask.sample_pitch();
        while (n < needed && n < (1 << 16))
            n *= 2;
    }
    return uniform_grid(n);
}

AzimuthalProfile radial_profile(const ObjectMask& mask, LGIndex k, LGIndex l, std::shared_ptr<const AzimuthalGrid> grid,
                                const ProjectionOptions& options)
{
    if (!grid)
        throw std::invalid_argument("radial_profile needs a grid");
    const int n = k.abs() + l.abs();
    const double pref = pair_prefactor(k.l, l.l);
    std::vector<RadialResult> results(grid->size());
    parallel_for(grid->size(), options.threads,
                 [&](std::size_t j) { results[j] = radial_moments(mask, grid->phi[j], n, n, options); });
    check_convergence(results, *grid);

    AzimuthalProfile profile{k, l, grid, {}, 0.0};
    profile.values.resize(grid->size());
    for (std::size_t j = 0; j < grid->size(); ++j) {
        profile.values[j] = pref * results[j].moments[static_cast<std::size_t>(n)];
        profile.radial_error = std::max(profile.radial_error, results[j].error);
    }
    return profile;
}

AzimuthalProfile radial_profile(const ObjectMask& mask, LGIndex k, LGIndex l, int n_phi)
{
    ProjectionOptions options;
    options.n_phi = n_phi;
    const int order = std::max(k.abs(), l.abs());
    auto grid = std::make_shared<const AzimuthalGrid>(make_azimuthal_grid(mask, order, options));
    return radial_profile(mask, k, l, std::move(grid), options);
}

// --- OperatorMatrix --------------------------------------------------------

OperatorMatrix::OperatorMatrix(int l_max)
    : l_max_(l_max), entries_(Eigen::MatrixXcd::Zero(2 * l_max + 1, 2 * l_max + 1))
{
    if (l_max < 0)
        throw std::invalid_argument("l_max must be non-negative");
}

OperatorMatrix::OperatorMatrix(int l_max, Eigen::MatrixXcd entries, QuadratureMeta meta)
    : l_max_(l_max), entries_(std::move(entries)), meta_(std::move(meta))
{
    if (entries_.rows() != 2 * l_max + 1 || entries_.cols() != 2 * l_max + 1)
        throw std::invalid_argument("operator matrix shape does not match l_max");
    if (!entries_.allFinite())
        throw std::invalid_argument("operator matrix has non-finite entries");
}

cd OperatorMatrix::at(LGIndex k, LGIndex l) const
{
    if (!contains(k.l, l.l))
        throw std::out_of_range("operator matrix index outside truncation");
    return (*this)(k.l, l.l);
}

double OperatorMatrix::max_abs_difference(const OperatorMatrix& other) const
{
    if (other.l_max_ != l_max_)
        throw std::invalid_argument("operator matrices have different l_max");
    return (entries_ - other.entries_).cwiseAbs().maxCoeff();
}

OperatorMatrix OperatorMatrix::sub_block(int l_max) const
{
    if (l_max > l_max_ || l_max < 0)
        throw std::invalid_argument("sub_block order outside truncation");
    const int off = l_max_ - l_max;
    return OperatorMatrix(l_max, entries_.block(off, off, 2 * l_max + 1, 2 * l_max + 1), meta_);
}

// --- fast path -------------------------------------------------------------

OperatorMatrix matrix_from_profile(std::span<const AzimuthalProfile> profiles, int l_max)
{
    if (profiles.empty())
        throw std::invalid_argument("matrix_from_profile: no profiles");
    const auto& grid = profiles.front().grid;
    std::map<std::pair<int, int>, const AzimuthalProfile*> by_index;
    double radial_error = 0.0;
    for (const auto& p : profiles) {
        if (!p.grid || p.grid->phi != grid->phi)
            throw std::invalid_argument("matrix_from_profile: profiles on different grids");
        by_index[{p.k.l, p.l.l}] = &p;
        radial_error = std::max(radial_error, p.radial_error);
    }

    OperatorMatrix out(l_max);
    const std::size_t n_phi = grid->size();
    for (int k = -l_max; k <= l_max; ++k) {
        for (int l = -l_max; l <= l_max; ++l) {
            const auto it = by_index.find({k, l});
            if (it == by_index.end())
                throw std::invalid_argument("matrix_from_profile: missing profile for (" + std::to_string(k) + ", " +
                                            std::to_string(l) + ")");
            const int m = k - l;
            if (grid->scheme == AzimuthalScheme::uniform_fft) {
                if (std::abs(m) > static_cast<int>(n_phi / 2) - 1)
                    throw std::invalid_argument("matrix_from_profile: harmonic aliases on this grid");
                const auto coeffs = fourier_coefficients(it->second->values);
                out(k, l) = coeffs[bin_of(m, n_phi)];
            } else {
                out(k, l) = panel_coefficient(*grid, it->second->values, m);
            }
        }
    }
    QuadratureMeta meta;
    meta.method = "fast";
    meta.azimuthal_scheme = scheme_name(grid->scheme);
    meta.azimuthal_nodes = static_cast<int>(n_phi);
    meta.radial_error_estimate = radial_error;
    return OperatorMatrix(l_max, out.entries(), meta);
}

OperatorMatrix compute_matrix(const ObjectMask& mask, int l_max, const ProjectionOptions& options)
{
    ModeGeometry{mask.geometry().w0, l_max}.validate();
    const AzimuthalGrid grid = make_azimuthal_grid(mask, l_max, options);
    const int n_max = 2 * l_max;
    const std::size_t n_phi = grid.size();

    std::vector<RadialResult> results(n_phi);
    parallel_for(n_phi, options.threads,
                 [&](std::size_t j) { results[j] = radial_moments(mask, grid.phi[j], 0, n_max, options); });
    check_convergence(results, grid);

    // coefficients[n][m + n_max]
    std::vector<std::vector<cd>> coefficients(static_cast<std::size_t>(n_max) + 1);
    std::vector<cd> samples(n_phi);
    double azimuthal_error = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        for (std::size_t j = 0; j < n_phi; ++j)
            samples[j] = results[j].moments[static_cast<std::size_t>(n)];
        auto& c = coefficients[static_cast<std::size_t>(n)];
        c.resize(static_cast<std::size_t>(2 * n_max + 1));
        if (grid.scheme == AzimuthalScheme::uniform_fft) {
            const auto coeffs = fourier_coefficients(samples);
            for (int m = -n_max; m <= n_max; ++m)
                c[static_cast<std::size_t>(m + n_max)] = coeffs[bin_of(m, n_phi)];
            azimuthal_error = std::max(azimuthal_error, std::abs(coeffs[n_phi / 2]) / moment_scale(n));
        } else {
            for (int m = -n_max; m <= n_max; ++m)
                c[static_cast<std::size_t>(m + n_max)] = panel_coefficient(grid, samples, m);
        }
    }

    OperatorMatrix out(l_max);
    for (int k = -l_max; k <= l_max; ++k) {
        for (int l = -l_max; l <= l_max; ++l) {
            const int n = std::abs(k) + std::abs(l);
            out(k, l) = pair_prefactor(k, l) * coefficients[static_cast<std::size_t>(n)]
                                                            [static_cast<std::size_t>(k - l + n_max)];
        }
    }

    QuadratureMeta meta;
    meta.method = "fast";
    meta.azimuthal_scheme = mask.is_sampled() ? "uniform_fft_sampled" : scheme_name(grid.scheme);
    meta.azimuthal_nodes = static_cast<int>(n_phi);
    for (const auto& r : results) {
        meta.radial_nodes_max = std::max(meta.radial_nodes_max, r.nodes_used);
        meta.radial_error_estimate = std::max(meta.radial_error_estimate, r.error);
    }
    meta.azimuthal_error_estimate = azimuthal_error;
    return OperatorMatrix(l_max, out.entries(), meta);
}

OperatorMatrix compute_matrix(const ObjectMask& mask, const ProjectionOptions& options)
{
    return compute_matrix(mask, mask.geometry().l_max, options);
}

// --- oracle ----------------------------------------------------------------

OperatorMatrix matrix_oracle(const ObjectMask& mask, int l_max, const OracleGrid& og)
{
    if (l_max < 0 || l_max > kOracleMaxOrder)
        throw std::invalid_argument("matrix_oracle supports l_max <= " + std::to_string(kOracleMaxOrder));
    if (og.radial_nodes < 16 || og.azimuthal_nodes < 16)
        throw std::invalid_argument("oracle grid too small");

    constexpr int kPanelOrder = 16;
    AzimuthalGrid grid;
    if (!mask.angular_breaks().empty() && !mask.is_sampled()) {
        grid = panel_grid(mask.angular_breaks(), kTwoPi * kPanelOrder / og.azimuthal_nodes, kPanelOrder);
    } else {
        grid = uniform_grid(og.azimuthal_nodes);
    }
    const double base_width = kOracleRadius * kPanelOrder / og.radial_nodes;
    const double panel_width = mask.is_sampled() ? std::min(base_width, mask.sample_pitch()) : base_width;
    const quad::Rule& rule = quad::cached_gauss_legendre(kPanelOrder);

    const int dim = 2 * l_max + 1;
    constexpr std::size_t kChunks = 64;
    const std::size_t n_phi = grid.size();
    std::vector<Eigen::MatrixXcd> partial(kChunks, Eigen::MatrixXcd::Zero(dim, dim));

    parallel_for(kChunks, og.threads, [&](std::size_t chunk) {
        const std::size_t begin = chunk * n_phi / kChunks;
        const std::size_t end = (chunk + 1) * n_phi / kChunks;
        std::vector<double> rho;
        std::vector<double> w;
        Eigen::MatrixXcd modes;
        Eigen::VectorXcd weighted;
        for (std::size_t j = begin; j < end; ++j) {
            const double phi = grid.phi[j];
            std::vector<double> points{0.0};
            const auto breaks = mask.radial_breaks(phi);
            std::size_t bi = 0;
            for (double r = panel_width; r < kOracleRadius + 0.5 * panel_width; r += panel_width) {
                while (bi < breaks.size() && breaks[bi] < r) {
                    if (breaks[bi] > points.back())
                        points.push_back(breaks[bi]);
                    ++bi;
                }
                points.push_back(std::min(r, kOracleRadius));
            }
            rho.clear();
            w.clear();
            for (std::size_t s = 0; s + 1 < points.size(); ++s) {
                const double a = points[s];
                const double b = points[s + 1];
                if (!(b > a))
                    continue;
                for (std::size_t i = 0; i < rule.size(); ++i) {
                    rho.push_back(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i]);
                    w.push_back(0.5 * (b - a) * rule.weights[i]);
                }
            }
            const auto count = static_cast<Eigen::Index>(rho.size());
            modes.resize(count, dim);
            weighted.resize(count);
            for (Eigen::Index i = 0; i < count; ++i) {
                const auto ii = static_cast<std::size_t>(i);
                for (int l = -l_max; l <= l_max; ++l)
                    modes(i, l + l_max) = mode_amplitude(LGIndex(l), rho[ii], phi);
                weighted(i) = grid.weights[j] * w[ii] * 0.5 * rho[ii] * mask.value(rho[ii], phi);
            }
            // sum_i conj(u_k(i)) * weighted(i) * u_l(i)
            partial[chunk].noalias() += modes.adjoint() * weighted.asDiagonal() * modes;
        }
    });

    Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& p : partial)
        total += p;

    QuadratureMeta meta;
    meta.method = "oracle";
    meta.azimuthal_scheme = grid.scheme == AzimuthalScheme::uniform_fft ? "trapezoid" : "panel_gauss";
    meta.azimuthal_nodes = static_cast<int>(n_phi);
    meta.radial_nodes_max = og.radial_nodes;
    return OperatorMatrix(l_max, std::move(total), meta);
}

// --- serialization ---------------------------------------------------------

json to_json(const OperatorMatrix& matrix)
{
    json entries = json::array();
    for (int k = -matrix.l_max(); k <= matrix.l_max(); ++k) {
        for (int l = -matrix.l_max(); l <= matrix.l_max(); ++l) {
            const cd z = matrix(k, l);
            entries.push_back({z.real(), z.imag()});
        }
    }
    const auto& m = matrix.meta();
    return {{"l_max", matrix.l_max()},
            {"entries", std::move(entries)},
            {"quadrature_meta",
             {{"method", m.method},
              {"azimuthal_scheme", m.azimuthal_scheme},
              {"azimuthal_nodes", m.azimuthal_nodes},
              {"radial_nodes_max", m.radial_nodes_max},
              {"radial_error_estimate", m.radial_error_estimate},
              {"azimuthal_error_estimate", m.azimuthal_error_estimate}}}};
}

OperatorMatrix operator_matrix_from_json(const json& j)
{
    const int l_max = j.at("l_max").get<int>();
    const int dim = 2 * l_max + 1;
    const auto& entries = j.at("entries");
    if (!entries.is_array() || entries.size() != static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim))
        throw std::invalid_argument("operator matrix json: wrong number of entries");
    Eigen::MatrixXcd m(dim, dim);
    std::size_t idx = 0;
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c, ++idx)
            m(r, c) = cd(entries[idx].at(0).get<double>(), entries[idx].at(1).get<double>());
    QuadratureMeta meta;
    if (j.contains("quadrature_meta")) {
        const auto& q = j["quadrature_meta"];
        meta.method = q.value("method", "");
        meta.azimuthal_scheme = q.value("azimuthal_scheme", "");
        meta.azimuthal_nodes = q.value("azimuthal_nodes", 0);
        meta.radial_nodes_max = q.value("radial_nodes_max", 0);
        meta.radial_error_estimate = q.value("radial_error_estimate", 0.0);
        meta.azimuthal_error_estimate = q.value("azimuthal_error_estimate", 0.0);
    }
    return OperatorMatrix(l_max, std::move(m), meta);
}

void write_abs2_csv(std::ostream& out, const OperatorMatrix& matrix)
{
    out << "k,l,abs2\n" << std::setprecision(17);
    for (int k = -matrix.l_max(); k <= matrix.l_max(); ++k) {
        for (int l = -matrix.l_max(); l <= matrix.l_max(); ++l) {
            double v = std::norm(matrix(k, l));
            if (v < 1e-24)
                v = 0.0;
            out << k << ',' << l << ',' << v << '\n';
        }
    }
}

OperatorMatrix flushed_for_report(const OperatorMatrix& matrix)
{
    Eigen::MatrixXcd e = matrix.entries();
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        if (std::abs(e(i)) < 1e-12)
            e(i) = 0.0;
    }
    return OperatorMatrix(matrix.l_max(), std::move(e), matrix.meta());
}

} // namespace oamid
