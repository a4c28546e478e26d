#include "distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "parallel.hpp"

namespace mxmse {

DistFamily dist_family_from_name(const std::string& name) {
    if (name == "normal") return DistFamily::Normal;
    if (name == "laplace") return DistFamily::Laplace;
    if (name == "uniform") return DistFamily::Uniform;
    if (name == "student-t") return DistFamily::StudentT;
    if (name == "triangular") return DistFamily::Triangular;
    if (name == "logistic") return DistFamily::Logistic;
    fail(errc::invalid_argument, "unknown distribution family '" + name + "'");
}

std::string dist_family_name(DistFamily family) {
    switch (family) {
    case DistFamily::Normal: return "normal";
    case DistFamily::Laplace: return "laplace";
    case DistFamily::Uniform: return "uniform";
    case DistFamily::StudentT: return "student-t";
    case DistFamily::Triangular: return "triangular";
    case DistFamily::Logistic: return "logistic";
    }
    return "?";
}

void DistributionSpec::validate() const {
    if (family == DistFamily::StudentT)
        require(shape > 2.0, errc::invalid_argument,
                "student-t needs dof > 2 for finite variance");
}

double DistributionSpec::canonical_std() const {
    switch (family) {
    case DistFamily::Normal: return 1.0;
    case DistFamily::Laplace: return std::numbers::sqrt2;
    case DistFamily::Uniform: return 1.0 / std::sqrt(3.0);
    case DistFamily::StudentT: return std::sqrt(shape / (shape - 2.0));
    case DistFamily::Triangular: return 1.0 / std::sqrt(6.0);
    case DistFamily::Logistic: return std::numbers::pi / std::sqrt(3.0);
    }
    return 1.0;
}

namespace {

constexpr std::size_t kChunk = 65536;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Uniform draws strictly inside (0, 1); the half-step offset keeps the
// endpoint transforms (log, inverse CDFs) finite.
struct UniformStream {
    std::mt19937_64 engine;
    explicit UniformStream(std::uint64_t seed) : engine(seed) {}
    double next() {
        return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
    }
};

void fill_chunk(const DistributionSpec& dist, std::uint64_t chunk_index, std::span<double> out) {
    UniformStream u(splitmix64(dist.seed ^ splitmix64(chunk_index + 0x51ED270Full)));
    const double inv_std = 1.0 / dist.canonical_std();
    const double two_pi = 2.0 * std::numbers::pi;
    std::size_t i = 0;
    switch (dist.family) {
    case DistFamily::Normal:
        // Box-Muller; pairs keep the draw count per chunk fixed.
        while (i < out.size()) {
            const double r = std::sqrt(-2.0 * std::log(u.next()));
            const double t = two_pi * u.next();
            out[i++] = r * std::cos(t);
            if (i < out.size()) out[i++] = r * std::sin(t);
        }
        break;
    case DistFamily::Laplace:
        for (; i < out.size(); ++i) {
            const double t = 2.0 * u.next() - 1.0;
            out[i] = (t < 0.0 ? std::log1p(t) : -std::log1p(-t)) * inv_std;
        }
        break;
    case DistFamily::Uniform:
        for (; i < out.size(); ++i) out[i] = (2.0 * u.next() - 1.0) * inv_std;
        break;
    case DistFamily::StudentT:
        // Bailey's polar-free transform: exact for any dof > 0.
        for (; i < out.size(); ++i) {
            const double u1 = u.next();
            const double u2 = u.next();
            const double r = std::sqrt(dist.shape * (std::pow(u1, -2.0 / dist.shape) - 1.0));
            out[i] = r * std::cos(two_pi * u2) * inv_std;
        }
        break;
    case DistFamily::Triangular:
        for (; i < out.size(); ++i) out[i] = (u.next() + u.next() - 1.0) * inv_std;
        break;
    case DistFamily::Logistic:
        for (; i < out.size(); ++i) {
            const double t = u.next();
            out[i] = std::log(t / (1.0 - t)) * inv_std;
        }
        break;
    }
}

} // namespace

void sample_canonical(const DistributionSpec& dist, std::size_t begin, std::span<double> out) {
    dist.validate();
    std::size_t written = 0;
    while (written < out.size()) {
        const std::size_t pos = begin + written;
        const std::uint64_t chunk = pos / kChunk;
        const std::size_t offset = pos % kChunk;
        const std::size_t take = std::min(kChunk - offset, out.size() - written);
        if (offset == 0 && take == kChunk) {
            fill_chunk(dist, chunk, out.subspan(written, kChunk));
        } else {
            std::vector<double> buf(kChunk);
            fill_chunk(dist, chunk, std::span<double>(buf));
            std::copy_n(buf.data() + offset, take, out.data() + written);
        }
        written += take;
    }
}

std::vector<double> sample_tensor(const DistributionSpec& dist, std::size_t n,
                                  double sigma_target, int threads) {
    dist.validate();
    std::vector<double> out(n);
    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
    parallel_for(n_chunks, threads, [&](std::size_t c) {
        const std::size_t lo = c * kChunk;
        const std::size_t hi = std::min(n, lo + kChunk);
        sample_canonical(dist, lo, std::span<double>(out.data() + lo, hi - lo));
        for (std::size_t i = lo; i < hi; ++i) out[i] *= sigma_target;
    });
    return out;
}

} // namespace mxmse
