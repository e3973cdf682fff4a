#include <oamid/spdc_spectrum.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace oamid {

NaturalSpectrum::NaturalSpectrum(int l_max, std::vector<std::complex<double>> coefficients, std::string source,
                                 int l_p)
    : l_max_(l_max), l_p_(l_p), coefficients_(std::move(coefficients)), source_(std::move(source))
{
    if (l_max < 0)
        throw std::invalid_argument("spectrum l_max must be non-negative");
    if (coefficients_.size() != static_cast<std::size_t>(2 * l_max + 1))
        throw std::invalid_argument("spectrum has the wrong number of coefficients");
    double total = 0.0;
    for (const auto& c : coefficients_) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw std::invalid_argument("spectrum coefficient is not finite");
        total += std::norm(c);
    }
    if (!(total > 0.0))
        throw std::invalid_argument("spectrum is identically zero");
    const double scale = 1.0 / std::sqrt(total);
    for (auto& c : coefficients_)
        c *= scale;
}

std::complex<double> NaturalSpectrum::operator()(int l) const
{
    if (std::abs(l) > l_max_)
        return 0.0;
    return coefficients_[static_cast<std::size_t>(l + l_max_)];
}

double NaturalSpectrum::asymmetry() const
{
    double worst = 0.0;
    for (int l = 1; l <= l_max_; ++l) {
        const double a = std::abs((*this)(l));
        const double b = std::abs((*this)(-l));
        const double big = std::max(a, b);
        if (big > 0.0)
            worst = std::max(worst, std::abs(a - b) / big);
    }
    return worst;
}

NaturalSpectrum NaturalSpectrum::with_pump(int l_p) const
{
    NaturalSpectrum out = *this;
    out.l_p_ = l_p;
    return out;
}

NaturalSpectrum parametric_spectrum(double eta, int l_max)
{
    if (!(eta > 0.0 && eta < 1.0))
        throw std::invalid_argument("eta must lie in (0, 1)");
    std::vector<std::complex<double>> c(static_cast<std::size_t>(2 * l_max + 1));
    for (int l = -l_max; l <= l_max; ++l)
        c[static_cast<std::size_t>(l + l_max)] = std::pow(eta, std::abs(l));
    std::ostringstream src;
    src << "parametric{eta=" << eta << "}";
    return NaturalSpectrum(l_max, std::move(c), src.str());
}

NaturalSpectrum parse_spectrum_csv(std::istream& in, int l_max, const std::string& source)
{
    std::map<int, std::complex<double>> rows;
    std::string line;
    int line_no = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        std::vector<std::string> tokens;
        for (std::string t; fields >> t;)
            tokens.push_back(t);
        if (tokens.empty())
            continue;
        std::vector<double> values;
        try {
            for (const auto& t : tokens) {
                std::size_t used = 0;
                values.push_back(std::stod(t, &used));
                if (used != t.size())
                    throw std::invalid_argument(t);
            }
        } catch (const std::exception&) {
            if (header_allowed) {
                header_allowed = false;
                continue;
            }
            throw std::invalid_argument(source + ":" + std::to_string(line_no) + ": not a numeric row");
        }
        header_allowed = false;
        if (values.size() != 2 && values.size() != 3)
            throw std::invalid_argument(source + ":" + std::to_string(line_no) + ": expected 2 or 3 columns");
        const double lv = values[0];
        if (lv != std::round(lv))
            throw std::invalid_argument(source + ":" + std::to_string(line_no) + ": l must be an integer");
        const int l = static_cast<int>(lv);
        const std::complex<double> c = values.size() == 3 ? std::complex<double>(values[1], values[2])
                                                          : std::complex<double>(values[1], 0.0);
        if (!rows.emplace(l, c).second)
            throw std::invalid_argument(source + ": duplicate entry for l = " + std::to_string(l));
    }
    if (rows.empty())
        throw std::invalid_argument(source + ": spectrum file has no rows");

    std::vector<std::complex<double>> coeffs(static_cast<std::size_t>(2 * l_max + 1));
    for (const auto& [l, c] : rows) {
        if (std::abs(l) <= l_max)
            coeffs[static_cast<std::size_t>(l + l_max)] = c;
    }
    bool any = std::any_of(coeffs.begin(), coeffs.end(), [](auto c) { return c != std::complex<double>(0.0); });
    if (!any)
        throw std::invalid_argument(source + ": spectrum is zero within the truncation");
    NaturalSpectrum spectrum(l_max, std::move(coeffs), "file{" + source + "}");
    const double asym = spectrum.asymmetry();
    if (asym > 0.05) {
        std::ostringstream w;
        w << "|C_l| and |C_-l| differ by up to " << 100.0 * asym << "%";
        spectrum.add_warning(w.str());
    }
    return spectrum;
}

NaturalSpectrum load_spectrum(const std::filesystem::path& path, int l_max)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open spectrum file " + path.string());
    return parse_spectrum_csv(in, l_max, path.string());
}

nlohmann::json to_json(const NaturalSpectrum& spectrum)
{
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& c : spectrum.coefficients())
        coeffs.push_back({c.real(), c.imag()});
    return {{"l_max", spectrum.l_max()},
            {"l_p", spectrum.l_p()},
            {"source", spectrum.source()},
            {"coefficients", std::move(coeffs)},
            {"warnings", spectrum.warnings()}};
}

} // namespace oamid
