#pragma once

// Conditional maximum likelihood under two-sided truncation selection
// |delta| >= K, with confidence intervals from inverting the conditional test.

#include "abshrink/readout.hpp"

namespace abshrink {

struct CmleResult {
    double mu_hat = 0.0;
    int iterations = 0;
    bool converged = false;
    double ci_low = 0.0;
    double ci_high = 0.0;
    // CI width mapped back to a variance: ((high-low)/(2 z_{alpha/2}))^2.
    double equivalent_variance = 0.0;
};

// E(delta - mu | |delta| > K) for delta ~ Normal(mu, sigma_delta^2):
// sigma * [phi((K-mu)/s) - phi((-K-mu)/s)] / [Phi((-K-mu)/s) + 1 - Phi((K-mu)/s)].
double expected_selection_bias(double mu, double sigma_delta, double k);

// CDF of Normal(mu, sigma^2) truncated to {|x| >= K}, evaluated at delta.
double conditional_cdf(double delta, double mu, double sigma_delta, double k);

// Fixed-point iteration mu <- delta - expected_selection_bias(mu), started at
// the unconditional MLE delta; bisection fallback if it fails to settle.
// Fills only the point-estimate fields.
CmleResult cmle_solve(double delta, double sigma_delta, double k);

// Endpoints of {mu : alpha/2 <= ConditionalCDF(delta; mu) <= 1 - alpha/2},
// found by bisection (the conditional CDF is decreasing in mu).
std::pair<double, double> cmle_ci(double delta, double sigma_delta, double k, double alpha);

// Point estimate + interval + equivalent variance in one result.
CmleResult cmle_estimate(double delta, double sigma_delta, double k, double alpha);

}  // namespace abshrink
