#pragma once

// Standard-normal primitives used across the library. Tail behaviour matters
// here: selection thresholds and marginal likelihoods are routinely evaluated
// many standard deviations out, so everything has a log-space path.

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace abshrink {

inline constexpr double kSqrt2 = 1.4142135623730950488;
inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kSqrt2Pi = 2.5066282746310005024;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double norm_pdf(double x) {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

inline double log_norm_pdf(double x) {
    return -0.5 * x * x - kLogSqrt2Pi;
}

// Phi(x) via erfc: relative accuracy near machine precision in both tails,
// representable down to x ~ -37.5.
inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x * kInvSqrt2);
}

// log Phi(x). erfc underflows below x ~ -37.5; switch to the asymptotic
// expansion log Phi(x) = -x^2/2 - log(-x sqrt(2 pi)) + log(1 - 1/x^2 + ...)
// a little earlier, where it is already accurate to ~1e-14.
inline double log_norm_cdf(double x) {
    if (x >= -1.0) {
        // Phi close to 1: log(1 - Phi(-x)) keeps precision.
        return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
    }
    if (x >= -36.0) {
        return std::log(0.5 * std::erfc(-x * kInvSqrt2));
    }
    const double ix2 = 1.0 / (x * x);
    const double series =
        1.0 + ix2 * (-1.0 + ix2 * (3.0 + ix2 * (-15.0 + ix2 * (105.0 - 945.0 * ix2))));
    return -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + std::log(series);
}

// Inverse standard-normal CDF: Wichura's AS241 rational approximation,
// polished with two Newton steps against norm_cdf above.
inline double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("norm_quantile: p must lie in (0,1)");
    }
    const double q = p - 0.5;
    double x;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        x = q *
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
    } else {
        double r = (q < 0.0) ? p : 1.0 - p;
        r = std::sqrt(-std::log(r));
        if (r <= 5.0) {
            r -= 1.6;
            x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                      2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                    3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                  4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                      1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                    6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                  2.05319162663775882187e0) * r + 1.0);
        } else {
            r -= 5.0;
            x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                    2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                  5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
                (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                      1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                    1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                  5.99832206555887937690e-1) * r + 1.0);
        }
        if (q < 0.0) x = -x;
    }
    for (int i = 0; i < 2; ++i) {
        const double density = norm_pdf(x);
        if (density <= 0.0) break;
        x -= (norm_cdf(x) - p) / density;
    }
    return x;
}

// z such that P(|Z| > z) = alpha.
inline double two_sided_z(double alpha) {
    return norm_quantile(1.0 - 0.5 * alpha);
}

inline double log_sum_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline double log_sum_exp(std::span<const double> xs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs) m = std::max(m, x);
    if (m == -std::numeric_limits<double>::infinity()) return m;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - m);
    return m + std::log(acc);
}

// log(exp(a) - exp(b)) for a >= b.
inline double log_diff_exp(double a, double b) {
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(-std::exp(b - a));
}

}  // namespace abshrink
