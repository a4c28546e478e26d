#ifndef MXMSE_CORE_DISTRIBUTIONS_HPP
#define MXMSE_CORE_DISTRIBUTIONS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace mxmse {

enum class DistFamily { Normal, Laplace, Uniform, StudentT, Triangular, Logistic };

DistFamily dist_family_from_name(const std::string& name);
std::string dist_family_name(DistFamily family);

/// A zero-mean symmetric sampling distribution with finite variance.
/// `shape` is the student-t degrees of freedom (must exceed 2); the other
/// families take no shape parameter.
struct DistributionSpec {
    DistFamily family = DistFamily::Normal;
    double shape = 5.0;
    std::uint64_t seed = 0;

    void validate() const;
    /// Population standard deviation of the canonical (unit-parameter) draw.
    double canonical_std() const;
};

/// Fills out[begin, end) with canonical draws normalized to unit population
/// standard deviation. Generation is chunked on fixed 65536-element
/// substreams derived from (seed, chunk), so any window of the stream can be
/// produced independently and results never depend on scheduling.
void sample_canonical(const DistributionSpec& dist, std::size_t begin, std::span<double> out);

/// n i.i.d. draws scaled so the population standard deviation equals
/// sigma_target. Elementwise, sample(sigma) == sigma * sample(1).
std::vector<double> sample_tensor(const DistributionSpec& dist, std::size_t n,
                                  double sigma_target, int threads = 0);

} // namespace mxmse

#endif
