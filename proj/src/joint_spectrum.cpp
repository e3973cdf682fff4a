#include <oamid/joint_spectrum.hpp>

#include <cmath>
#include <iomanip>
#include <stdexcept>

namespace oamid {

using cd = std::complex<double>;

JointSpectrum::JointSpectrum(int l_max, int l_p, bool parity_flip, Eigen::MatrixXcd amplitudes)
    : l_max_(l_max), l_p_(l_p), parity_flip_(parity_flip), amplitudes_(std::move(amplitudes))
{
    if (l_max < 0)
        throw std::invalid_argument("joint spectrum l_max must be non-negative");
    if (amplitudes_.rows() != 2 * l_max + 1 || amplitudes_.cols() != 2 * l_max + 1)
        throw std::invalid_argument("joint spectrum shape does not match l_max");
    rates_ = amplitudes_.cwiseAbs2();
}

JointSpectrum synthesize(const NaturalSpectrum& spectrum, const OperatorMatrix& matrix)
{
    const int L = matrix.l_max();
    if (spectrum.l_max() != L)
        throw std::invalid_argument("spectrum and operator matrix have different l_max");
    const int l_p = spectrum.l_p();
    Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(2 * L + 1, 2 * L + 1);
    for (int l_r = -L; l_r <= L; ++l_r) {
        const int l = l_p - l_r;
        if (std::abs(l) > L)
            continue;
        const cd c = spectrum(l);
        for (int l_o = -L; l_o <= L; ++l_o)
            amp(l_r + L, l_o + L) = c * matrix(l_o, l);
    }
    return JointSpectrum(L, l_p, false, std::move(amp));
}

JointSpectrum apply_parity_flip(const JointSpectrum& js)
{
    return JointSpectrum(js.l_max(), js.l_p(), !js.parity_flip(), js.amplitudes().colwise().reverse());
}

std::vector<double> cross_section(const JointSpectrum& js, int l_r)
{
    const int L = js.l_max();
    if (std::abs(l_r) > L)
        throw std::out_of_range("cross-section index outside truncation");
    std::vector<double> row(static_cast<std::size_t>(2 * L + 1));
    for (int l_o = -L; l_o <= L; ++l_o)
        row[static_cast<std::size_t>(l_o + L)] = js.rate(l_r, l_o);
    return row;
}

std::map<int, double> diagonal_sums(const JointSpectrum& js)
{
    const int L = js.l_max();
    std::map<int, double> sums;
    for (int m = -2 * L - std::abs(js.l_p()); m <= 2 * L + std::abs(js.l_p()); ++m)
        sums[m] = 0.0;
    for (int l_r = -L; l_r <= L; ++l_r)
        for (int l_o = -L; l_o <= L; ++l_o)
            sums[js.total_oam(l_r, l_o)] += js.rate(l_r, l_o);
    return sums;
}

double off_diagonal_rate(const JointSpectrum& js)
{
    double off = 0.0;
    for (const auto& [m, s] : diagonal_sums(js)) {
        if (m != 0)
            off += s;
    }
    return off;
}

IsolatedMatrix isolate_object(const JointSpectrum& js, const NaturalSpectrum& spectrum, double floor)
{
    if (!(floor > 0.0))
        throw std::invalid_argument("isolation floor must be positive");
    const int L = js.l_max();
    if (spectrum.l_max() != L)
        throw std::invalid_argument("spectrum and joint spectrum have different l_max");

    IsolatedMatrix out{OperatorMatrix(L), Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
                                              2 * L + 1, 2 * L + 1, false)};
    Eigen::MatrixXcd est = Eigen::MatrixXcd::Zero(2 * L + 1, 2 * L + 1);
    bool any = false;
    for (int l = -L; l <= L; ++l) {
        const cd c = spectrum(l);
        const int phys_r = js.l_p() - l;
        if (std::abs(c) < floor || std::abs(phys_r) > L)
            continue;
        any = true;
        const int stored_r = js.parity_flip() ? -phys_r : phys_r;
        for (int k = -L; k <= L; ++k) {
            est(k + L, l + L) = js.amplitude(stored_r, k) / c;
            out.valid(k + L, l + L) = true;
        }
    }
    if (!any)
        throw std::invalid_argument("every spectrum coefficient is below the isolation floor");
    QuadratureMeta meta;
    meta.method = "isolated";
    out.estimate = OperatorMatrix(L, std::move(est), meta);
    return out;
}

nlohmann::json to_json(const JointSpectrum& js)
{
    const int L = js.l_max();
    nlohmann::json amps = nlohmann::json::array();
    nlohmann::json rates = nlohmann::json::array();
    for (int l_r = -L; l_r <= L; ++l_r) {
        nlohmann::json arow = nlohmann::json::array();
        nlohmann::json rrow = nlohmann::json::array();
        for (int l_o = -L; l_o <= L; ++l_o) {
            const cd a = js.amplitude(l_r, l_o);
            arow.push_back({a.real(), a.imag()});
            rrow.push_back(js.rate(l_r, l_o));
        }
        amps.push_back(std::move(arow));
        rates.push_back(std::move(rrow));
    }
    return {{"l_max", L},
            {"l_p", js.l_p()},
            {"parity_flip", js.parity_flip()},
            {"amplitudes", std::move(amps)},
            {"rates", std::move(rates)},
            {"total_rate", js.total_rate()}};
}

void write_rates_csv(std::ostream& out, const JointSpectrum& js)
{
    const int L = js.l_max();
    out << "l_r,l_o,rate\n" << std::setprecision(17);
    for (int l_r = -L; l_r <= L; ++l_r)
        for (int l_o = -L; l_o <= L; ++l_o)
            out << l_r << ',' << l_o << ',' << js.rate(l_r, l_o) << '\n';
}

void write_cross_section_csv(std::ostream& out, const JointSpectrum& js, int l_r)
{
    const auto row = cross_section(js, l_r);
    out << "l_o,rate\n" << std::setprecision(17);
    for (int l_o = -js.l_max(); l_o <= js.l_max(); ++l_o)
        out << l_o << ',' << row[static_cast<std::size_t>(l_o + js.l_max())] << '\n';
}

void write_diagonal_sums_csv(std::ostream& out, const JointSpectrum& js)
{
    const double total = js.total_rate();
    out << "m,rate,fraction\n" << std::setprecision(17);
    for (const auto& [m, s] : diagonal_sums(js))
        out << m << ',' << s << ',' << (total > 0.0 ? s / total : 0.0) << '\n';
}

void write_conservation_diagonal_csv(std::ostream& out, const JointSpectrum& js)
{
    const int L = js.l_max();
    out << "l,rate\n" << std::setprecision(17);
    for (int l = -L; l <= L; ++l) {
        // object photon l, reference photon l_p - l (stored with the flip applied)
        const int phys_r = js.l_p() - l;
        double r = 0.0;
        if (std::abs(phys_r) <= L)
            r = js.rate(js.parity_flip() ? -phys_r : phys_r, l);
        out << l << ',' << r << '\n';
    }
}

} // namespace oamid
