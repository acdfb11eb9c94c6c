#pragma once

// Effect-distribution priors. All are centered at 0; scale parameters are
// variances so hyperparameters compose directly with the noise variance.

#include <string>
#include <variant>

namespace abshrink {

struct ZeroPrior {};  // point mass at 0

struct GaussianPrior {
    double tau2 = 1.0;  // prior variance
};

struct LaplacePrior {
    double nu2 = 1.0;  // prior variance; density (1/(nu sqrt 2)) exp(-sqrt(2)|mu|/nu)
};

// Gaussian core switching to a Laplace tail at |mu| = k, continuous at the
// transition. Unnormalized: exp(-mu^2/(2 tau2)) inside, exp((k^2-2k|mu|)/(2 tau2)) outside.
struct HuberPrior {
    double tau2 = 1.0;
    double k = 1.0;
};

struct StudentTPrior {
    double df = 3.0;      // > 2 so the variance exists
    double scale2 = 1.0;  // prior VARIANCE (t scale^2 * df/(df-2) handled internally)
};

// Ghidorah: point mass at 0 + Gaussian(tau2) + Laplace(nu2).
struct MixturePrior {
    double w_zero = 1.0 / 3.0;
    double w_gauss = 1.0 / 3.0;
    double w_laplace = 1.0 / 3.0;
    double tau2 = 1.0;
    double nu2 = 1.0;
};

using PriorModel =
    std::variant<ZeroPrior, GaussianPrior, LaplacePrior, HuberPrior, StudentTPrior, MixturePrior>;

void validate(const PriorModel& prior);  // throws std::invalid_argument

// Variance of the prior (exact, including Huber). Used for quadrature ranges.
double prior_variance(const PriorModel& prior);

std::string prior_kind(const PriorModel& prior);

// Flat key-value text, round-trip stable to 17 significant digits.
std::string prior_to_kv(const PriorModel& prior);
PriorModel prior_from_kv(const std::string& text);

}  // namespace abshrink
