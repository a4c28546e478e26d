#ifndef MXMSE_CORE_THEORY_HPP
#define MXMSE_CORE_THEORY_HPP

#include <optional>
#include <span>

#include "blockquant.hpp"
#include "curve.hpp"
#include "formats.hpp"

namespace mxmse {

struct QuadratureSpec {
    std::size_t nodes = 4096;  // outer integral node count (>= 64)
    double tail_sigmas = 12.0; // domain cut beyond the block-max mode

    void validate() const;
};

/// Everything the analytical model needs: block size, element and scale
/// level tables (scale absent = exact scales), sigma and quadrature grid.
struct TheoryProblem {
    std::int64_t block_size = 16;
    LevelTable element;
    std::optional<LevelTable> scale; // nullopt = exact scales
    double sigma = 1.0;
    QuadratureSpec quadrature;
    // Use the literal s_min/2 zero-bin boundary in block-max units instead
    // of the scale-space boundary mapped through the element maximum.
    bool paper_zero_bin = false;

    void validate() const;
    bool exact_scales() const { return !scale.has_value(); }
};

struct ContributionBreakdown {
    double not_max = 0.0;
    double is_max = 0.0;
    double zero_scale = 0.0;
    double total = 0.0; // always the exact sum of the three parts
};

/// PDF of the maximum of N absolute values of draws from N(0, sigma^2).
double xmax_pdf(double theta, double sigma, std::int64_t n);
/// Its CDF, [2*Phi(theta/sigma) - 1]^N.
double xmax_cdf(double theta, double sigma, std::int64_t n);

/// Squared-error contribution of one element bin [a, b] around level q,
/// conditioned on a scale with alpha = s/sigma, for a format with maximum
/// m. Closed-form Gaussian partial moments; no quadrature.
double bin_mse_conditional(double q, double a, double b, double alpha, double sigma,
                           std::int64_t n, double m);

/// Total MSE with non-quantized scales: the element-bin sums integrated
/// against the block-max density. Exactly sigma^2-homogeneous.
double mse_exact_scales(const TheoryProblem& p);

/// PDF of the continuous scale variable S = x_max / m.
double scale_pdf(double s, double sigma, std::int64_t n, double m);
/// Probability mass of the k-th nonzero scale level's rounding bin
/// (k indexes positive scale levels in increasing order).
double scale_bin_mass(const TheoryProblem& p, std::size_t k);
/// Probability that the block scale rounds to zero.
double zero_scale_mass(const TheoryProblem& p);

/// Error of the block maximum x reconstructed through scale level s_k.
double err_max(double x, double s_k, const LevelTable& element);

double mse_not_max(const TheoryProblem& p);
double mse_is_max(const TheoryProblem& p);
double mse_zero_scale(const TheoryProblem& p);

/// Quantized-scale total and its three-way split.
ContributionBreakdown mse_quantized_scales(const TheoryProblem& p);

/// Maps a sigma grid through the exact- or quantized-scale model; the
/// contribution columns are always populated.
MseCurve theory_curve(const QuantConfig& cfg, std::span<const double> sigmas,
                      const QuadratureSpec& quad = {}, bool paper_zero_bin = false);

} // namespace mxmse

#endif
