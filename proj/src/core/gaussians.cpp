#include "gaussians.hpp"

namespace mxmse {

double normal_interval_mass(double a, double b) {
    if (a > b) return -normal_interval_mass(b, a);
    if (a >= 0.0) {
        // right tail: erfc is the stable direction
        return 0.5 * (std::erfc(a * kInvSqrt2) - std::erfc(b * kInvSqrt2));
    }
    if (b <= 0.0) {
        return 0.5 * (std::erfc(-b * kInvSqrt2) - std::erfc(-a * kInvSqrt2));
    }
    // straddles zero; erf is accurate near the origin
    return 0.5 * (std::erf(b * kInvSqrt2) + std::erf(-a * kInvSqrt2));
}

double truncated_second_moment(double c) {
    if (!(c > 0.0)) return 0.0;
    if (c < 0.05) {
        const double c2 = c * c;
        return (c2 / 3.0) * (1.0 - 2.0 * c2 / 15.0 + 2.0 * c2 * c2 / 315.0);
    }
    const double mass = central_mass(c);
    return 1.0 - 2.0 * c * std_normal_pdf(c) / mass;
}

} // namespace mxmse
