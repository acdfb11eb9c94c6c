#pragma once

// Closed-form empirical-Bayes posteriors for delta | mu ~ Normal(mu, se2) with
// a prior on mu, plus the adjusted p-value / interval machinery shared by all
// estimators. Everything that multiplies an exponential by a Gaussian CDF is
// evaluated in log space; the naive formulas overflow for moderate delta.

#include <array>
#include <optional>

#include "abshrink/prior.hpp"
#include "abshrink/readout.hpp"

namespace abshrink {

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;
};

struct PosteriorSummary {
    double mean = 0.0;
    double variance = 0.0;           // after capping at se2
    double variance_uncapped = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double adjusted_p = 1.0;
    double evidence = 0.0;           // marginal log-likelihood l(delta); NaN if undefined
    // Posterior head probabilities (q0, qG, qL) for mixture priors.
    std::optional<std::array<double, 3>> component_posteriors;
};

// Gaussian-conjugate posterior: mean = tau2/(tau2+se2) * delta,
// var = tau2*se2/(tau2+se2).
MeanVar posterior_gaussian(double delta, double se2, double tau2);

// Laplace-prior posterior: weighted average of (delta +/- b), b = se2*sqrt(2)/nu,
// with the matching closed-form variance.
MeanVar posterior_laplace(double delta, double se2, double nu2);

// Marginal log-likelihood of delta under the prior (closed form for
// Zero/Gaussian/Laplace/Huber/Mixture, quadrature for Student-t). Underflow
// clamps to kLogLikFloor rather than returning -inf.
inline constexpr double kLogLikFloor = -1e300;
double marginal_loglik(const PriorModel& prior, double delta, double se2);

// 2 min{P(mu>=0|delta), P(mu<=0|delta)} under Normal(mean, variance).
// Limit cases: variance = 0 gives 1 when mean = 0, else 0.
double adjusted_p_value(double mean, double variance);

// mean +/- z_{alpha/2} sqrt(variance).
std::pair<double, double> credible_interval(double mean, double variance, double alpha);

// Applies the se2 variance cap and fills CI / adjusted p at level alpha.
PosteriorSummary summarize_posterior(double mean, double variance_uncapped, double se2,
                                     double evidence, double alpha);

// Full Ghidorah posterior: component posteriors, law-of-total-variance
// variance, cap at se2, evidence.
PosteriorSummary posterior_mixture(double delta, double se2, const MixturePrior& prior,
                                   double alpha = 0.05);

// Huber-prior posterior moments (quadrature-backed; see quadrature.hpp).
MeanVar posterior_huber(double delta, double se2, double tau2, double k);

}  // namespace abshrink
