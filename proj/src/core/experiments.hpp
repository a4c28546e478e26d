#ifndef MXMSE_CORE_EXPERIMENTS_HPP
#define MXMSE_CORE_EXPERIMENTS_HPP

#include <span>
#include <vector>

#include "blockquant.hpp"
#include "curve.hpp"
#include "distributions.hpp"

namespace mxmse {

/// Mean of squared differences. Lengths must match.
double mse(std::span<const double> x, std::span<const double> y);

struct SweepOptions {
    std::size_t n_per_point = std::size_t{1} << 22;
    int threads = 0; // 0 = auto
};

/// Quantization MSE measured at each sigma of an increasing grid. The same
/// canonical sample stream backs every sigma and every config run with the
/// same seed (common random numbers), so curves are smooth and directly
/// comparable. Results are bit-identical for any thread count.
MseCurve mse_sigma_sweep(const DistributionSpec& dist, const QuantConfig& cfg,
                         std::span<const double> sigmas, const SweepOptions& opts = {});

/// Single-point variant of the sweep; exposes the contribution split and
/// the per-block standard error.
MsePoint mse_at_sigma(const DistributionSpec& dist, const QuantConfig& cfg, double sigma,
                      const SweepOptions& opts = {});

struct BlockPairResult {
    std::vector<double> mse_small; // per large block, aggregated small-block MSE
    std::vector<double> mse_large;
    double fraction_above_diagonal = 0.0;
};

/// Quantizes x under both configs and compares errors per large block.
/// cfg_large.block_size must be a multiple of cfg_small.block_size.
BlockPairResult per_block_mse_pair(std::span<const double> x, const QuantConfig& cfg_small,
                                   const QuantConfig& cfg_large);

void write_block_pairs_csv(const BlockPairResult& r, const std::string& path);

/// Sigmas where a.mse - b.mse changes sign, located by log-linear
/// interpolation on the shared grid. Empty when there is no strict sign
/// change (identical curves cross nowhere).
std::vector<double> find_crossovers(const MseCurve& a, const MseCurve& b);

/// count log-spaced values over [lo, hi].
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

} // namespace mxmse

#endif
