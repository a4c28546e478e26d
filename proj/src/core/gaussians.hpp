#ifndef MXMSE_CORE_GAUSSIANS_HPP
#define MXMSE_CORE_GAUSSIANS_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>

// Standard-normal helpers and the small quadrature kit used by the
// analytical error model. Everything here is pure and allocation-free.

namespace mxmse {

inline constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;
inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;

/// phi(x), PDF of the standard normal.
inline double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

/// Phi(x), CDF of the standard normal, accurate in both tails.
inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

/// 2*Phi(x) - 1 for x >= 0, i.e. P(|U| <= x) for standard normal U.
inline double central_mass(double x) { return std::erf(x * kInvSqrt2); }

/// Phi(b) - Phi(a) computed via erfc on the side away from zero so narrow
/// tail intervals keep relative accuracy.
double normal_interval_mass(double a, double b);

/// Integral of u * phi(u) over [a, b].
inline double normal_partial_m1(double a, double b) {
    return std_normal_pdf(a) - std_normal_pdf(b);
}

/// Integral of u^2 * phi(u) over [a, b].
inline double normal_partial_m2(double a, double b) {
    return normal_interval_mass(a, b) + a * std_normal_pdf(a) - b * std_normal_pdf(b);
}

/// Integral of (u - c)^2 * phi(u) over [a, b], closed form.
inline double normal_quadratic_moment(double a, double b, double c) {
    const double m0 = normal_interval_mass(a, b);
    const double m1 = normal_partial_m1(a, b);
    const double m2 = normal_partial_m2(a, b);
    return m2 - 2.0 * c * m1 + c * c * m0;
}

/// E[U^2 | |U| < c] for standard normal U, c > 0. Series below c = 0.05
/// avoids the cancellation in the closed form.
double truncated_second_moment(double c);

/// Composite Simpson rule over [a, b] with n subintervals (n rounded up to even).
template <typename F>
double simpson(F&& f, double a, double b, std::size_t n) {
    if (!(b > a)) return 0.0;
    if (n < 2) n = 2;
    if (n % 2) ++n;
    const double h = (b - a) / static_cast<double>(n);
    double odd = 0.0, even = 0.0;
    for (std::size_t i = 1; i < n; i += 2) odd += f(a + h * static_cast<double>(i));
    for (std::size_t i = 2; i < n; i += 2) even += f(a + h * static_cast<double>(i));
    return (h / 3.0) * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

} // namespace mxmse

#endif
