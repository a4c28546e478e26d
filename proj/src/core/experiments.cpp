#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "parallel.hpp"

namespace mxmse {

double mse(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), errc::mismatch, "mse: length mismatch");
    require(!x.empty(), errc::invalid_argument, "mse: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        acc += d * d;
    }
    return acc / static_cast<double>(x.size());
}

namespace {

// Per-chunk accumulator; chunks are block-aligned and combined in index
// order so results do not depend on the thread count.
struct Accum {
    double sum_not = 0.0;
    double sum_is = 0.0;
    double sum_zero = 0.0;
    double block_sum = 0.0;   // sum of per-block squared-error totals
    double block_sumsq = 0.0; // sum of their squares
    std::uint64_t blocks = 0;

    void merge(const Accum& o) {
        sum_not += o.sum_not;
        sum_is += o.sum_is;
        sum_zero += o.sum_zero;
        block_sum += o.block_sum;
        block_sumsq += o.block_sumsq;
        blocks += o.blocks;
    }
};

// Quantize-dequantize error accumulation over [lo, hi), classified per
// element: zero-scale block / block maximum / everything else.
void accumulate_range(std::span<const double> canonical, double sigma, double tensor_scale,
                      const QuantConfig& cfg, std::size_t lo, std::size_t hi, Accum& acc) {
    const LevelTable& elem = cfg.element;
    const std::size_t n = cfg.block_size > 0 ? static_cast<std::size_t>(cfg.block_size) : 1;

    for (std::size_t b0 = lo; b0 < hi; b0 += n) {
        const std::size_t b1 = std::min(hi, b0 + n);
        double x_max = 0.0;
        std::size_t max_idx = b0;
        for (std::size_t i = b0; i < b1; ++i) {
            const double xi = std::fabs(canonical[i] * sigma * tensor_scale);
            if (xi > x_max) {
                x_max = xi;
                max_idx = i;
            }
        }
        // same expressions as quantize_tensor so both paths pick identical
        // levels on boundary-grazing inputs
        const double raw = x_max / cfg.scale_divisor;
        const double s = cfg.exact_scales() ? raw : cfg.scale->round(raw);
        double block_err = 0.0;
        if (s == 0.0) {
            for (std::size_t i = b0; i < b1; ++i) {
                const double xi = canonical[i] * sigma * tensor_scale;
                block_err += xi * xi;
            }
            acc.sum_zero += block_err;
        } else {
            double err_not = 0.0, err_is = 0.0;
            for (std::size_t i = b0; i < b1; ++i) {
                const double xi = canonical[i] * sigma * tensor_scale;
                const double q = elem.round(xi / s);
                const double e = q * s - xi;
                if (i == max_idx)
                    err_is += e * e;
                else
                    err_not += e * e;
            }
            acc.sum_not += err_not;
            acc.sum_is += err_is;
            block_err = err_not + err_is;
        }
        acc.block_sum += block_err;
        acc.block_sumsq += block_err * block_err;
        acc.blocks += 1;
    }
}

MsePoint measure_point(std::span<const double> canonical, double sigma, const QuantConfig& cfg,
                       int threads) {
    // block-aligned chunking; blocks never straddle a chunk
    const std::size_t n = canonical.size();
    const std::size_t bs = static_cast<std::size_t>(cfg.block_size);
    std::size_t chunk = bs >= 65536 ? bs : bs * (65536 / bs);
    const std::size_t n_chunks = (n + chunk - 1) / chunk;

    double tensor_scale = 1.0;
    if (cfg.per_tensor_scaling) {
        // max|x| over the sigma-scaled tensor; rounding is monotone so the
        // chunked maximum matches the sequential one exactly
        std::vector<double> maxes(n_chunks, 0.0);
        parallel_for(n_chunks, threads, [&](std::size_t c) {
            const std::size_t lo = c * chunk, hi = std::min(n, lo + chunk);
            double m = 0.0;
            for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::fabs(canonical[i] * sigma));
            maxes[c] = m;
        });
        double m = 0.0;
        for (double v : maxes) m = std::max(m, v);
        if (m > 0.0) {
            const double scale_max = cfg.exact_scales() ? 1.0 : cfg.scale->max_value;
            tensor_scale = cfg.element.max_value * scale_max / m;
        }
    }

    std::vector<Accum> partial(n_chunks);
    parallel_for(n_chunks, threads, [&](std::size_t c) {
        const std::size_t lo = c * chunk, hi = std::min(n, lo + chunk);
        accumulate_range(canonical, sigma, tensor_scale, cfg, lo, hi, partial[c]);
    });
    Accum total;
    for (const auto& a : partial) total.merge(a);

    MsePoint p;
    p.sigma = sigma;
    const double dn = static_cast<double>(n);
    const double ts2 = tensor_scale * tensor_scale;
    // classification sums are in pre-scaled units; map back through s_T
    p.not_max = total.sum_not / dn / ts2;
    p.is_max = total.sum_is / dn / ts2;
    p.zero_scale = total.sum_zero / dn / ts2;
    p.mse = (total.sum_not + total.sum_is + total.sum_zero) / dn / ts2;
    if (total.blocks > 1 && p.mse > 0.0) {
        const double b = static_cast<double>(total.blocks);
        const double var =
            std::max(0.0, (total.block_sumsq - total.block_sum * total.block_sum / b) / (b - 1.0));
        const double se = std::sqrt(var * b) / dn / ts2;
        p.rel_se = se / p.mse;
    }
    return p;
}

} // namespace

MsePoint mse_at_sigma(const DistributionSpec& dist, const QuantConfig& cfg, double sigma,
                      const SweepOptions& opts) {
    require(opts.n_per_point >= 1, errc::invalid_argument, "n_per_point must be >= 1");
    std::vector<double> canonical = sample_tensor(dist, opts.n_per_point, 1.0, opts.threads);
    return measure_point(canonical, sigma, cfg, opts.threads);
}

MseCurve mse_sigma_sweep(const DistributionSpec& dist, const QuantConfig& cfg,
                         std::span<const double> sigmas, const SweepOptions& opts) {
    require(!sigmas.empty(), errc::invalid_argument, "empty sigma grid");
    for (std::size_t i = 1; i < sigmas.size(); ++i)
        require(sigmas[i] > sigmas[i - 1], errc::invalid_argument,
                "sigma grid must be strictly increasing");
    require(opts.n_per_point >= 1, errc::invalid_argument, "n_per_point must be >= 1");

    // one canonical draw shared by every sigma: common random numbers
    std::vector<double> canonical = sample_tensor(dist, opts.n_per_point, 1.0, opts.threads);

    MseCurve curve;
    curve.source = CurveSource::MonteCarlo;
    curve.config_name = cfg.name;
    curve.seed = dist.seed;
    curve.n_per_point = opts.n_per_point;
    curve.points.reserve(sigmas.size());
    for (double sigma : sigmas)
        curve.points.push_back(measure_point(canonical, sigma, cfg, opts.threads));
    return curve;
}

BlockPairResult per_block_mse_pair(std::span<const double> x, const QuantConfig& cfg_small,
                                   const QuantConfig& cfg_large) {
    const std::int64_t ls = cfg_small.block_size;
    const std::int64_t ll = cfg_large.block_size;
    require(ll % ls == 0 && ll > ls, errc::invalid_argument,
            "large block size must be a proper multiple of the small one");
    require(!x.empty(), errc::invalid_argument, "empty input");

    const std::vector<double> ys = roundtrip_tensor(x, cfg_small);
    const std::vector<double> yl = roundtrip_tensor(x, cfg_large);

    BlockPairResult r;
    const std::size_t n = x.size();
    const std::size_t big = static_cast<std::size_t>(ll);
    const std::size_t n_big = (n + big - 1) / big;
    r.mse_small.resize(n_big);
    r.mse_large.resize(n_big);
    std::size_t above = 0;
    for (std::size_t g = 0; g < n_big; ++g) {
        const std::size_t lo = g * big, hi = std::min(n, lo + big);
        double es = 0.0, el = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double ds = ys[i] - x[i];
            const double dl = yl[i] - x[i];
            es += ds * ds;
            el += dl * dl;
        }
        const double cnt = static_cast<double>(hi - lo);
        r.mse_small[g] = es / cnt;
        r.mse_large[g] = el / cnt;
        if (r.mse_small[g] > r.mse_large[g]) ++above;
    }
    r.fraction_above_diagonal = static_cast<double>(above) / static_cast<double>(n_big);
    return r;
}

void write_block_pairs_csv(const BlockPairResult& r, const std::string& path) {
    std::string out;
    out += "# schema=mxmse.blockpairs.v1\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", r.fraction_above_diagonal);
    out += std::string("# fraction_above_diagonal=") + buf + "\n";
    out += "block_index,mse_small,mse_large\n";
    for (std::size_t i = 0; i < r.mse_small.size(); ++i) {
        char line[96];
        std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g\n", i, r.mse_small[i], r.mse_large[i]);
        out += line;
    }
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        require(f.good(), errc::io_error, "cannot open '" + tmp + "' for writing");
        f << out;
        require(f.good(), errc::io_error, "write failed for '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    require(!ec, errc::io_error, "rename to '" + path + "' failed: " + ec.message());
}

std::vector<double> find_crossovers(const MseCurve& a, const MseCurve& b) {
    require(a.points.size() == b.points.size(), errc::mismatch, "curve grids differ");
    const std::size_t n = a.points.size();
    for (std::size_t i = 0; i < n; ++i)
        require(a.points[i].sigma == b.points[i].sigma, errc::mismatch, "curve grids differ");

    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d0 = a.points[i].mse - b.points[i].mse;
        const double d1 = a.points[i + 1].mse - b.points[i + 1].mse;
        if (d0 == 0.0) {
            // an exact grid-point crossing only counts when the sign truly
            // flips around it
            if (i > 0) {
                const double prev = a.points[i - 1].mse - b.points[i - 1].mse;
                if (prev * d1 < 0.0) out.push_back(a.points[i].sigma);
            }
            continue;
        }
        if (d0 * d1 < 0.0) {
            const double t = d0 / (d0 - d1);
            const double ls = std::log(a.points[i].sigma);
            const double le = std::log(a.points[i + 1].sigma);
            out.push_back(std::exp(ls + t * (le - ls)));
        }
    }
    return out;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    require(lo > 0.0 && hi > lo, errc::invalid_argument, "need 0 < lo < hi");
    require(count >= 1, errc::invalid_argument, "need count >= 1");
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double llo = std::log(lo), lhi = std::log(hi);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                                    static_cast<double>(count - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

} // namespace mxmse
