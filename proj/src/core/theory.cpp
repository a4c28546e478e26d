#include "theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gaussians.hpp"

namespace mxmse {

void QuadratureSpec::validate() const {
    require(nodes >= 64, errc::invalid_argument, "quadrature needs at least 64 nodes");
    require(tail_sigmas > 0.0, errc::invalid_argument, "tail cut must be positive");
}

void TheoryProblem::validate() const {
    require(block_size >= 1, errc::invalid_argument, "block size must be >= 1");
    require(sigma > 0.0, errc::invalid_argument, "sigma must be positive");
    require(!element.levels.empty(), errc::invalid_argument, "element table is empty");
    quadrature.validate();
    if (scale)
        require(scale->max_value > 0.0 && scale->levels.back() > 0.0, errc::invalid_argument,
                "scale table has no positive level");
}

double xmax_pdf(double theta, double sigma, std::int64_t n) {
    if (theta < 0.0) return 0.0;
    const double t = theta / sigma;
    const double cm = central_mass(t);
    const double head = 2.0 * static_cast<double>(n) / sigma;
    if (n == 1) return head * std_normal_pdf(t);
    return head * std::pow(cm, static_cast<double>(n - 1)) * std_normal_pdf(t);
}

double xmax_cdf(double theta, double sigma, std::int64_t n) {
    if (theta <= 0.0) return 0.0;
    return std::pow(central_mass(theta / sigma), static_cast<double>(n));
}

namespace {

constexpr double kTinyMass = 1e-20;

// Element-bin geometry in normalized y units, clipped to the truncated
// support [-m, m].
struct ElementBins {
    std::vector<double> level;
    std::vector<double> lo;
    std::vector<double> hi;
    double m = 0.0;

    explicit ElementBins(const LevelTable& t) : m(t.max_value) {
        const std::size_t n = t.size();
        level.reserve(n);
        lo.reserve(n);
        hi.reserve(n);
        for (std::size_t j = 0; j < n; ++j) {
            double a = (j == 0) ? -m : t.boundaries[j - 1];
            double b = (j + 1 == n) ? m : t.boundaries[j];
            a = std::max(a, -m);
            b = std::min(b, m);
            if (!(b > a)) continue;
            level.push_back(t.levels[j]);
            lo.push_back(a);
            hi.push_back(b);
        }
    }

    // sum over bins of the closed-form integral of (u - q*alpha)^2 phi(u)
    double moment_sum(double alpha) const {
        double acc = 0.0;
        for (std::size_t j = 0; j < level.size(); ++j)
            acc += normal_quadratic_moment(lo[j] * alpha, hi[j] * alpha, level[j] * alpha);
        return acc;
    }
};

// Rounding bins of the positive scale levels. a of the lowest bin starts at
// the zero boundary (or 0); b of the top bin is +infinity.
struct ScaleBins {
    std::vector<double> level;
    std::vector<double> lo;
    std::vector<double> hi; // +inf on top
    double zero_boundary = 0.0;
    bool has_zero_level = false;

    explicit ScaleBins(const LevelTable& t) {
        const std::size_t n = t.size();
        for (std::size_t g = 0; g < n; ++g) {
            if (!(t.levels[g] > 0.0)) {
                if (t.levels[g] == 0.0) has_zero_level = true;
                continue;
            }
            double a = (g == 0) ? 0.0 : std::max(t.boundaries[g - 1], 0.0);
            double b = (g + 1 == n) ? std::numeric_limits<double>::infinity() : t.boundaries[g];
            if (level.empty()) zero_boundary = a;
            level.push_back(t.levels[g]);
            lo.push_back(a);
            hi.push_back(b);
        }
    }
};

double interval_mass(double theta_lo, double theta_hi, double sigma, std::int64_t n) {
    const double hi_cdf = std::isinf(theta_hi) ? 1.0 : xmax_cdf(theta_hi, sigma, n);
    return hi_cdf - xmax_cdf(theta_lo, sigma, n);
}

} // namespace

double bin_mse_conditional(double q, double a, double b, double alpha, double sigma,
                           std::int64_t n, double m) {
    require(alpha > 0.0, errc::invalid_argument, "alpha must be positive");
    require(n >= 1, errc::invalid_argument, "block size must be >= 1");
    const double lo = std::max(a, -m);
    const double hi = std::min(b, m);
    if (!(hi > lo)) return 0.0;
    const double cm = central_mass(m * alpha);
    if (cm <= 0.0) return 0.0;
    const double frac = static_cast<double>(n - 1) / static_cast<double>(n);
    return sigma * sigma / cm * frac *
           normal_quadratic_moment(lo * alpha, hi * alpha, q * alpha);
}

double mse_exact_scales(const TheoryProblem& p) {
    p.validate();
    require(p.exact_scales(), errc::invalid_argument, "mse_exact_scales needs exact scales");
    const std::int64_t n = p.block_size;
    if (n == 1) return 0.0; // the lone element is the block max: exact

    const ElementBins bins(p.element);
    const double m = bins.m;
    const double t_hi = std::sqrt(2.0 * std::log(static_cast<double>(n))) + p.quadrature.tail_sigmas;
    const double nn = static_cast<double>(n);

    // sigma-free inner integral in t = theta/sigma units; the closed-form
    // element moments absorb the conditional truncation so the integrand
    // carries central_mass^(N-2)
    auto integrand = [&](double t) {
        if (t <= 0.0) return 0.0;
        const double cm = central_mass(t);
        const double w = (n == 2) ? 1.0 : std::pow(cm, nn - 2.0);
        return bins.moment_sum(t / m) * w * std_normal_pdf(t);
    };
    const double integral = simpson(integrand, 0.0, t_hi, p.quadrature.nodes);
    const double value = p.sigma * p.sigma * ((nn - 1.0) / nn) * 2.0 * nn * integral;
    require(std::isfinite(value), errc::numeric_error, "exact-scale quadrature failed");
    return value;
}

double scale_pdf(double s, double sigma, std::int64_t n, double m) {
    if (s < 0.0) return 0.0;
    return m * xmax_pdf(m * s, sigma, n);
}

double scale_bin_mass(const TheoryProblem& p, std::size_t k) {
    p.validate();
    require(!p.exact_scales(), errc::invalid_argument, "exact scales have no bins");
    const ScaleBins sb(*p.scale);
    require(k < sb.level.size(), errc::invalid_argument, "scale bin index out of range");
    const double m = p.element.max_value;
    return interval_mass(m * sb.lo[k], std::isinf(sb.hi[k])
                                           ? std::numeric_limits<double>::infinity()
                                           : m * sb.hi[k],
                         p.sigma, p.block_size);
}

double zero_scale_mass(const TheoryProblem& p) {
    p.validate();
    require(!p.exact_scales(), errc::invalid_argument, "exact scales have no zero bin");
    const ScaleBins sb(*p.scale);
    if (!sb.has_zero_level) return 0.0;
    const double theta0 =
        p.paper_zero_bin ? sb.zero_boundary : p.element.max_value * sb.zero_boundary;
    return xmax_cdf(theta0, p.sigma, p.block_size);
}

double err_max(double x, double s_k, const LevelTable& element) {
    require(s_k > 0.0, errc::invalid_argument, "scale level must be positive");
    const double e = element.round(x / s_k) * s_k - x;
    return e * e;
}

double mse_not_max(const TheoryProblem& p) {
    p.validate();
    require(!p.exact_scales(), errc::invalid_argument, "mse_not_max needs quantized scales");
    const std::int64_t n = p.block_size;
    if (n == 1) return 0.0;

    const ElementBins bins(p.element);
    const ScaleBins sb(*p.scale);
    const double m = bins.m;
    const double nn = static_cast<double>(n);
    const double frac = (nn - 1.0) / nn;

    double acc = 0.0;
    for (std::size_t k = 0; k < sb.level.size(); ++k) {
        const double pk = interval_mass(m * sb.lo[k],
                                        std::isinf(sb.hi[k])
                                            ? std::numeric_limits<double>::infinity()
                                            : m * sb.hi[k],
                                        p.sigma, n);
        if (!(pk > kTinyMass)) continue;
        const double alpha = sb.level[k] / p.sigma;
        const double cm = central_mass(m * alpha);
        if (cm <= 0.0) continue;
        acc += pk * bins.moment_sum(alpha) / cm;
    }
    const double value = p.sigma * p.sigma * frac * acc;
    require(std::isfinite(value), errc::numeric_error, "mse_not_max failed");
    return value;
}

double mse_is_max(const TheoryProblem& p) {
    p.validate();
    require(!p.exact_scales(), errc::invalid_argument, "mse_is_max needs quantized scales");
    const std::int64_t n = p.block_size;
    const ScaleBins sb(*p.scale);
    const LevelTable& elem = p.element;
    const double m = elem.max_value;
    const double t_mode = std::sqrt(2.0 * std::log(static_cast<double>(std::max<std::int64_t>(n, 2))));
    const double x_hi = p.sigma * (t_mode + p.quadrature.tail_sigmas);

    // positive element boundaries: kink locations of round(x / s_k)
    std::vector<double> ebounds;
    for (double b : elem.boundaries)
        if (b > 0.0) ebounds.push_back(b);

    const std::size_t base_nodes = std::max<std::size_t>(8, p.quadrature.nodes / 64);

    double acc = 0.0;
    for (std::size_t k = 0; k < sb.level.size(); ++k) {
        const double sk = sb.level[k];
        const double lo = m * sb.lo[k];
        const double hi = std::min(std::isinf(sb.hi[k]) ? x_hi : m * sb.hi[k], x_hi);
        if (!(hi > lo)) continue;
        const double pk = interval_mass(m * sb.lo[k],
                                        std::isinf(sb.hi[k])
                                            ? std::numeric_limits<double>::infinity()
                                            : m * sb.hi[k],
                                        p.sigma, n);
        if (!(pk > kTinyMass)) continue;

        // split at element-boundary kinks inside the bin
        std::vector<double> cuts{lo};
        for (double b : ebounds) {
            const double x = sk * b;
            if (x > lo && x < hi) cuts.push_back(x);
        }
        cuts.push_back(hi);
        std::sort(cuts.begin(), cuts.end());

        auto f = [&](double x) { return err_max(x, sk, elem) * xmax_pdf(x, p.sigma, n); };
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            const double w = (cuts[c + 1] - cuts[c]) / sk;
            const std::size_t nodes = w < 0.01 ? 8 : base_nodes;
            acc += simpson(f, cuts[c], cuts[c + 1], nodes);
        }
    }
    const double value = acc / static_cast<double>(n);
    require(std::isfinite(value), errc::numeric_error, "mse_is_max failed");
    return value;
}

double mse_zero_scale(const TheoryProblem& p) {
    p.validate();
    require(!p.exact_scales(), errc::invalid_argument, "mse_zero_scale needs quantized scales");
    const ScaleBins sb(*p.scale);
    if (!sb.has_zero_level) return 0.0;
    const double theta0 =
        p.paper_zero_bin ? sb.zero_boundary : p.element.max_value * sb.zero_boundary;
    const double prob = xmax_cdf(theta0, p.sigma, p.block_size);
    if (prob <= 0.0) return 0.0;
    const double second = p.sigma * p.sigma * truncated_second_moment(theta0 / p.sigma);
    return prob * second;
}

ContributionBreakdown mse_quantized_scales(const TheoryProblem& p) {
    ContributionBreakdown out;
    out.not_max = mse_not_max(p);
    out.is_max = mse_is_max(p);
    out.zero_scale = mse_zero_scale(p);
    out.total = out.not_max + out.is_max + out.zero_scale;
    return out;
}

MseCurve theory_curve(const QuantConfig& cfg, std::span<const double> sigmas,
                      const QuadratureSpec& quad, bool paper_zero_bin) {
    require(!sigmas.empty(), errc::invalid_argument, "empty sigma grid");
    for (std::size_t i = 1; i < sigmas.size(); ++i)
        require(sigmas[i] > sigmas[i - 1], errc::invalid_argument,
                "sigma grid must be strictly increasing");

    MseCurve curve;
    curve.source = CurveSource::Theory;
    curve.config_name = cfg.name;
    curve.points.reserve(sigmas.size());

    TheoryProblem p;
    p.block_size = cfg.block_size;
    p.element = cfg.element;
    p.scale = cfg.scale;
    p.quadrature = quad;
    p.paper_zero_bin = paper_zero_bin;

    for (double sigma : sigmas) {
        p.sigma = sigma;
        MsePoint pt;
        pt.sigma = sigma;
        if (p.exact_scales()) {
            pt.mse = mse_exact_scales(p);
            pt.not_max = pt.mse;
        } else {
            const ContributionBreakdown b = mse_quantized_scales(p);
            pt.mse = b.total;
            pt.not_max = b.not_max;
            pt.is_max = b.is_max;
            pt.zero_scale = b.zero_scale;
        }
        curve.points.push_back(pt);
    }
    return curve;
}

} // namespace mxmse
