#pragma once

// Hyperparameter estimation from historical readouts: marginal maximum
// likelihood (MLE-II), SURE for the Gaussian scale, and SURE-initialized EM
// for the Ghidorah mixture.

#include <optional>
#include <utility>
#include <vector>

#include "abshrink/prior.hpp"
#include "abshrink/readout.hpp"

namespace abshrink {

enum class PriorFamily { Gaussian, Laplace, Huber, Mixture };

PriorFamily prior_family_from_string(const std::string& name);

struct FitResult {
    PriorModel prior;
    double loglik = 0.0;  // total marginal log-likelihood at the optimum
    std::optional<double> sure_risk;
    int n_used = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<std::pair<int, double>> trace;  // (iteration, objective), EM only
    std::vector<std::string> notes;             // e.g. weight-floor events
};

// Maximizes sum_i marginal_loglik(prior, delta_i, se2_i) over the family's
// free parameters; scales are searched on log scale over
// [1e-12, 1e6] * median(se2).
FitResult fit_mle2(const std::vector<ExperimentReadout>& readouts, PriorFamily family,
                   std::optional<PriorModel> init = std::nullopt);

struct SureFit {
    double tau2 = 0.0;
    double sure_risk = 0.0;  // SURE objective at the minimizer (sum over readouts)
};

// Heteroskedastic SURE for the linear shrinkage rule mu_i = tau2/(tau2+se2_i) d_i:
//   SURE(tau2) = sum_i [ (se2_i/(tau2+se2_i))^2 d_i^2 + se2_i (tau2-se2_i)/(tau2+se2_i) ].
SureFit fit_sure_gaussian(const std::vector<ExperimentReadout>& readouts);

// SURE-initialized EM for the three-headed mixture. Weights are floored at
// 1e-6 (and renormalized) so no head ever collapses and kills the E-step;
// every floor event lands in FitResult::notes.
FitResult fit_ghidorah(const std::vector<ExperimentReadout>& readouts,
                       std::optional<MixturePrior> init = std::nullopt);

}  // namespace abshrink
