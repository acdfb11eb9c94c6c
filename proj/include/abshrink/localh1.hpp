#pragma once

// Cold-start adjustment from a p-value alone: Sellke-style bound
// B(z) = -e z log z on the Bayes factor against the point null, turned into a
// posterior-probability bound and used as if it were the posterior.

#include "abshrink/posterior.hpp"
#include "abshrink/readout.hpp"

namespace abshrink {

struct PriorOdds {
    double p_h1 = 0.5;  // prior probability of H1, in (0,1)

    double odds() const { return p_h1 / (1.0 - p_h1); }

    static PriorOdds from_probability(double p_h1);
    // "a:b" means H1:H0, e.g. "1:7".
    static PriorOdds parse(const std::string& text);
};

// Posterior P(H1 | delta) bound: odds * B(z) / (1 + odds * B(z)), with B
// clamped to 1 for z >= 1/e (the raw bound would vanish for null data).
double h1_posterior_bound(double z, const PriorOdds& odds);

// mean bound q*delta, variance bound q*se2 + q^3(1-q)*delta^2, capped at se2.
PosteriorSummary localh1_estimate(const ExperimentReadout& readout, const PriorOdds& odds,
                                  double alpha = 0.05);

}  // namespace abshrink
