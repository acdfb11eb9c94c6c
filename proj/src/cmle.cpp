#include "abshrink/cmle.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

#include "abshrink/normal.hpp"

namespace abshrink {

namespace {

void check_inputs(double sigma_delta, double k) {
    if (!(sigma_delta > 0.0) || !std::isfinite(sigma_delta)) {
        throw std::invalid_argument("cmle: sigma_delta must be positive and finite");
    }
    if (!(k > 0.0) || !std::isfinite(k)) {
        throw std::invalid_argument("cmle: K must be positive and finite");
    }
}

// P(|delta| > K) for delta ~ Normal(mu, sigma^2).
double selection_mass(double mu, double sigma, double k) {
    return norm_cdf((-k - mu) / sigma) + norm_cdf((mu - k) / sigma);
}

}  // namespace

double expected_selection_bias(double mu, double sigma_delta, double k) {
    check_inputs(sigma_delta, k);
    if (!std::isfinite(mu)) throw std::invalid_argument("cmle: mu must be finite");
    const double den = selection_mass(mu, sigma_delta, k);
    if (den < 1e-300) {
        throw NumericError("expected_selection_bias: selection region has negligible mass");
    }
    const double num = norm_pdf((k - mu) / sigma_delta) - norm_pdf((-k - mu) / sigma_delta);
    return sigma_delta * num / den;
}

double conditional_cdf(double delta, double mu, double sigma_delta, double k) {
    check_inputs(sigma_delta, k);
    const double den = selection_mass(mu, sigma_delta, k);
    if (den < 1e-300) {
        throw NumericError("conditional_cdf: selection region has negligible mass");
    }
    double num;
    if (delta <= -k) {
        num = norm_cdf((delta - mu) / sigma_delta);
    } else {
        // delta >= k: all of the lower lobe plus the part of the upper lobe below delta
        num = norm_cdf((-k - mu) / sigma_delta) +
              std::max(0.0, norm_cdf((delta - mu) / sigma_delta) - norm_cdf((k - mu) / sigma_delta));
    }
    return std::min(1.0, num / den);
}

CmleResult cmle_solve(double delta, double sigma_delta, double k) {
    check_inputs(sigma_delta, k);
    if (!std::isfinite(delta) || std::abs(delta) < k) {
        throw std::invalid_argument("cmle_solve: requires a selected readout, |delta| >= K");
    }
    const double tol = 1e-10 * sigma_delta;
    CmleResult res;
    double mu = delta;
    for (int it = 1; it <= 10000; ++it) {
        const double next = delta - expected_selection_bias(mu, sigma_delta, k);
        res.iterations = it;
        if (std::abs(next - mu) < tol) {
            res.mu_hat = next;
            res.converged = true;
            return res;
        }
        mu = next;
    }
    // Fixed point did not settle (the map can oscillate when the selected
    // distribution is strongly bimodal); fall back to bisection on
    // g(mu) = mu + bias(mu) - delta, which is increasing in mu.
    double lo = -std::abs(delta) - 10.0 * sigma_delta;
    double hi = std::abs(delta) + 10.0 * sigma_delta;
    auto g = [&](double m) { return m + expected_selection_bias(m, sigma_delta, k) - delta; };
    double glo = g(lo), ghi = g(hi);
    for (int expand = 0; expand < 60 && glo > 0.0; ++expand) {
        lo -= 10.0 * sigma_delta;
        glo = g(lo);
    }
    for (int expand = 0; expand < 60 && ghi < 0.0; ++expand) {
        hi += 10.0 * sigma_delta;
        ghi = g(hi);
    }
    if (glo > 0.0 || ghi < 0.0) {
        res.mu_hat = mu;
        res.converged = false;
        return res;
    }
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
        ++res.iterations;
    }
    res.mu_hat = 0.5 * (lo + hi);
    res.converged = true;
    return res;
}

std::pair<double, double> cmle_ci(double delta, double sigma_delta, double k, double alpha) {
    check_inputs(sigma_delta, k);
    if (!std::isfinite(delta) || std::abs(delta) < k) {
        throw std::invalid_argument("cmle_ci: requires a selected readout, |delta| >= K");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("cmle_ci: alpha must lie in (0,1)");
    }
    const double tol = 1e-8 * sigma_delta;
    // ConditionalCDF is decreasing in mu; endpoint(target) solves CDF = target.
    auto solve = [&](double target) {
        double lo = delta - 4.0 * sigma_delta;
        double hi = delta + 4.0 * sigma_delta;
        // expand until the target is bracketed
        for (int i = 0; i < 200 && conditional_cdf(delta, lo, sigma_delta, k) < target; ++i) {
            lo -= 4.0 * sigma_delta;
        }
        for (int i = 0; i < 200 && conditional_cdf(delta, hi, sigma_delta, k) > target; ++i) {
            hi += 4.0 * sigma_delta;
        }
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            if (conditional_cdf(delta, mid, sigma_delta, k) > target) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };
    const double low = solve(1.0 - 0.5 * alpha);
    const double high = solve(0.5 * alpha);
    return {low, high};
}

CmleResult cmle_estimate(double delta, double sigma_delta, double k, double alpha) {
    CmleResult res = cmle_solve(delta, sigma_delta, k);
    std::tie(res.ci_low, res.ci_high) = cmle_ci(delta, sigma_delta, k, alpha);
    const double z = two_sided_z(alpha);
    const double half = 0.5 * (res.ci_high - res.ci_low);
    res.equivalent_variance = (half / z) * (half / z);
    return res;
}

}  // namespace abshrink
