#pragma once

#include <oamid/lg_modes.hpp>
#include <oamid/object_mask.hpp>

#include <Eigen/Dense>
#include <json.hpp>

#include <complex>
#include <memory>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace oamid {

struct ProjectionOptions
{
    // Uniform azimuthal grid (power of two) for masks without edges.
    int n_phi = 256;
    // Starting order of the generalized Gauss-Laguerre rule; doubled until
    // successive estimates agree to radial_tolerance (relative to the
    // unmasked integral).
    int radial_nodes = 64;
    int max_radial_nodes = 256;
    // Starting Gauss-Legendre order on finite radial segments between edges.
    int segment_nodes = 16;
    int max_segment_nodes = 512;
    double radial_tolerance = 1e-10;
    // Masks with edges: Gauss-Legendre panels between singular angles.
    double max_panel_width = std::numbers::pi / 16.0;
    int panel_order = 24;
    // 0 = hardware concurrency. Results do not depend on this value.
    unsigned threads = 0;
};

class QuadratureError : public std::runtime_error
{
public:
    QuadratureError(const std::string& what, double worst_phi, double estimate)
        : std::runtime_error(what), worst_phi_(worst_phi), estimate_(estimate)
    {
    }
    double worst_phi() const { return worst_phi_; }
    double estimate() const { return estimate_; }

private:
    double worst_phi_;
    double estimate_;
};

enum class AzimuthalScheme { uniform_fft, panel_gauss };

// Azimuthal nodes and weights (weights sum to 2 pi). Uniform grids are used
// for masks without edges and transformed with an FFT; masks with edges get
// Gauss-Legendre panels whose boundaries are the mask's singular angles,
// since R_kl(phi) has jumps or kinks there.
struct AzimuthalGrid
{
    AzimuthalScheme scheme = AzimuthalScheme::uniform_fft;
    std::vector<double> phi;
    std::vector<double> weights;

    std::size_t size() const { return phi.size(); }
};

// Throws std::invalid_argument if a uniform grid would violate
// n_phi >= 4 l_max + 4 or is not a power of two.
AzimuthalGrid make_azimuthal_grid(const ObjectMask& mask, int l_max, const ProjectionOptions& options = {});

// R_kl(phi) = 2 / sqrt(|k|! |l|!) * int_0^inf rho^(|k|+|l|+1) exp(-rho^2) A(rho, phi) drho
// sampled on the grid.
struct AzimuthalProfile
{
    LGIndex k;
    LGIndex l;
    std::shared_ptr<const AzimuthalGrid> grid;
    std::vector<std::complex<double>> values;
    double radial_error = 0.0;
};

AzimuthalProfile radial_profile(const ObjectMask& mask, LGIndex k, LGIndex l,
                                std::shared_ptr<const AzimuthalGrid> grid, const ProjectionOptions& options = {});

// Convenience overload on a uniform grid of n_phi points (or the panel grid
// if the mask has edges).
AzimuthalProfile radial_profile(const ObjectMask& mask, LGIndex k, LGIndex l, int n_phi);

struct QuadratureMeta
{
    std::string method;                 // "fast" or "oracle"
    std::string azimuthal_scheme;       // "uniform_fft", "panel_gauss", "trapezoid"
    int azimuthal_nodes = 0;
    int radial_nodes_max = 0;
    double radial_error_estimate = 0.0;
    double azimuthal_error_estimate = 0.0;
};

// Truncated matrix A_kl, |k|, |l| <= l_max.
class OperatorMatrix
{
public:
    OperatorMatrix() = default;
    explicit OperatorMatrix(int l_max);
    OperatorMatrix(int l_max, Eigen::MatrixXcd entries, QuadratureMeta meta = {});

    int l_max() const { return l_max_; }
    int dimension() const { return 2 * l_max_ + 1; }
    bool contains(int k, int l) const { return std::abs(k) <= l_max_ && std::abs(l) <= l_max_; }

    std::complex<double> operator()(int k, int l) const { return entries_(k + l_max_, l + l_max_); }
    std::complex<double>& operator()(int k, int l) { return entries_(k + l_max_, l + l_max_); }
    std::complex<double> at(LGIndex k, LGIndex l) const;

    const Eigen::MatrixXcd& entries() const { return entries_; }
    const QuadratureMeta& meta() const { return meta_; }

    double max_abs_difference(const OperatorMatrix& other) const;
    OperatorMatrix sub_block(int l_max) const;

private:
    int l_max_ = 0;
    Eigen::MatrixXcd entries_;
    QuadratureMeta meta_;
};

// A_kl as the m = k - l Fourier coefficient of R_kl. Needs one profile for
// every (k, l) with |k|, |l| <= l_max, all on the same grid.
OperatorMatrix matrix_from_profile(std::span<const AzimuthalProfile> profiles, int l_max);

// Fast path. Radial integrals are cached by |k| + |l| and shared by every
// pair with that sum.
OperatorMatrix compute_matrix(const ObjectMask& mask, int l_max, const ProjectionOptions& options = {});
OperatorMatrix compute_matrix(const ObjectMask& mask, const ProjectionOptions& options = {});

inline constexpr int kOracleMaxOrder = 8;

struct OracleGrid
{
    int radial_nodes = 512;      // composite Gauss-Legendre on [0, 10]
    int azimuthal_nodes = 4096;
    unsigned threads = 0;
};

// Direct tensor-product quadrature of <k|A|l> = int int conj(u_k) A u_l (rho / 2) drho dphi
// using the mode functions themselves. Deliberately slow; l_max <= 8.
OperatorMatrix matrix_oracle(const ObjectMask& mask, int l_max, const OracleGrid& grid = {});

nlohmann::json to_json(const OperatorMatrix& matrix);
OperatorMatrix operator_matrix_from_json(const nlohmann::json& j);

// Rows "k,l,abs2" with |A_kl|^2 below 1e-24 written as 0.
void write_abs2_csv(std::ostream& out, const OperatorMatrix& matrix);

// Entries with modulus below 1e-12 replaced by exact zero, for reports.
OperatorMatrix flushed_for_report(const OperatorMatrix& matrix);

} // namespace oamid
