#include "abshrink/localh1.hpp"

#include <cmath>
#include <stdexcept>

namespace abshrink {

PriorOdds PriorOdds::from_probability(double p_h1) {
    if (!(p_h1 > 0.0 && p_h1 < 1.0)) {
        throw std::invalid_argument("PriorOdds: P(H1) must lie in (0,1)");
    }
    return PriorOdds{p_h1};
}

PriorOdds PriorOdds::parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw std::invalid_argument("PriorOdds: expected 'a:b', got '" + text + "'");
    }
    std::size_t pos_a = 0, pos_b = 0;
    const std::string sa = text.substr(0, colon), sb = text.substr(colon + 1);
    const double a = std::stod(sa, &pos_a);
    const double b = std::stod(sb, &pos_b);
    if (pos_a != sa.size() || pos_b != sb.size() || !(a > 0.0) || !(b > 0.0)) {
        throw std::invalid_argument("PriorOdds: expected positive 'a:b', got '" + text + "'");
    }
    return PriorOdds{a / (a + b)};
}

double h1_posterior_bound(double z, const PriorOdds& odds) {
    if (!(z > 0.0 && z <= 1.0)) {
        throw std::invalid_argument("h1_posterior_bound: z must lie in (0,1]");
    }
    // Sellke calibration: the null-favoring Bayes factor obeys
    // B01 >= -e z log z on z < 1/e, so the posterior odds of H1 are at most
    // prior_odds / (-e z log z). Past z = 1/e the raw expression drops below 1
    // and would start inflating P(H1) on non-informative data; clamp B01 at 1
    // there so q never exceeds the prior probability.
    const double b01 = z < std::exp(-1.0) ? -M_E * z * std::log(z) : 1.0;
    const double posterior_odds = odds.odds() / b01;
    return posterior_odds / (1.0 + posterior_odds);
}

PosteriorSummary localh1_estimate(const ExperimentReadout& readout, const PriorOdds& odds,
                                  double alpha) {
    readout.validate();
    const double se2 = readout.se2();
    // erfc underflows to 0 past ~38 sigma; the bound saturates there anyway
    const double z = std::max(two_sided_p(readout.delta, std::sqrt(se2)), 1e-300);
    const double q = h1_posterior_bound(z, odds);
    const double mean = q * readout.delta;
    const double var = q * se2 + q * q * q * (1.0 - q) * readout.delta * readout.delta;
    return summarize_posterior(mean, var, se2, std::numeric_limits<double>::quiet_NaN(), alpha);
}

}  // namespace abshrink
