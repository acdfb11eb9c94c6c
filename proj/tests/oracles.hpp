#pragma once

// Test-only oracles, deliberately independent of the library's numeric paths:
// a plain midpoint-rule integrator for posterior moments, a Kolmogorov-
// Smirnov test, and small statistics helpers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "abshrink/normal.hpp"

namespace oracles {

struct GridMoments {
    double mean = 0.0;
    double var = 0.0;
    double evidence = 0.0;
};

// Midpoint-rule posterior moments on a dense uniform grid. No panels, no
// Gauss-Legendre, no adaptivity: a different code path from the library.
inline GridMoments grid_posterior(const std::function<double(double)>& prior_density,
                                  double point_mass_zero, double delta, double se2,
                                  double half_width, long n_points) {
    const double s = std::sqrt(se2);
    const double lo = delta - half_width;
    const double hi = delta + half_width;
    const double h = (hi - lo) / static_cast<double>(n_points);
    long double z = 0.0L, m1 = 0.0L, m2 = 0.0L;
    for (long i = 0; i < n_points; ++i) {
        const double mu = lo + (static_cast<double>(i) + 0.5) * h;
        const double t = (delta - mu) / s;
        const long double f =
            static_cast<long double>(prior_density(mu)) *
            std::exp(-0.5 * t * t) / (s * abshrink::kSqrt2Pi) * h;
        z += f;
        m1 += f * mu;
        m2 += f * mu * mu;
    }
    if (point_mass_zero > 0.0) {
        const double t = delta / s;
        z += static_cast<long double>(point_mass_zero) * std::exp(-0.5 * t * t) /
             (s * abshrink::kSqrt2Pi);
    }
    GridMoments out;
    out.evidence = static_cast<double>(z);
    out.mean = static_cast<double>(m1 / z);
    out.var = static_cast<double>(m2 / z) - out.mean * out.mean;
    return out;
}

// One-sample KS test against a supplied CDF; returns the asymptotic p-value.
inline double ks_test_p(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        p += sign * 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
        sign = -sign;
    }
    return std::clamp(p, 0.0, 1.0);
}

inline double mean_of(const std::vector<double>& xs) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

inline double sd_of(const std::vector<double>& xs) {
    const double m = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

}  // namespace oracles
