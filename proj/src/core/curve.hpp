#ifndef MXMSE_CORE_CURVE_HPP
#define MXMSE_CORE_CURVE_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace mxmse {

enum class CurveSource { MonteCarlo, Theory };

struct MsePoint {
    double sigma = 0.0;
    double mse = 0.0;
    // contribution breakdown; always populated by theory, measured by
    // Monte-Carlo classification
    double not_max = 0.0;
    double is_max = 0.0;
    double zero_scale = 0.0;
    // relative standard error of the Monte-Carlo estimate (0 for theory)
    double rel_se = 0.0;
};

/// (sigma, MSE[, contributions]) series from either measurement or theory.
struct MseCurve {
    CurveSource source = CurveSource::MonteCarlo;
    std::string config_name;
    std::uint64_t seed = 0;
    std::uint64_t n_per_point = 0;
    std::vector<MsePoint> points;

    void write_csv(const std::string& path) const;
    void write_json(const std::string& path) const;
};

} // namespace mxmse

#endif
