#include "abshrink/simlab.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "abshrink/rng.hpp"

namespace abshrink {

namespace {

// The reference tables imply non-zero-component variances 10x the nominal
// SNR labels; verified against the tables' selection rates.
constexpr double kTableCalibration = 10.0;

double sample_prior(const PriorModel& prior, SubstreamRng& rng) {
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ZeroPrior>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, GaussianPrior>) {
                return std::sqrt(p.tau2) * rng.normal();
            } else if constexpr (std::is_same_v<T, LaplacePrior>) {
                const double u = rng.uniform() - 0.5;
                const double scale = std::sqrt(p.nu2) / kSqrt2;
                return -scale * (u < 0.0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(u));
            } else if constexpr (std::is_same_v<T, StudentTPrior>) {
                const int df = static_cast<int>(p.df);
                if (df < 3 || static_cast<double>(df) != p.df) {
                    throw std::invalid_argument("generate: sampling Student-t needs integer df >= 3");
                }
                return std::sqrt(p.scale2 * (p.df - 2.0) / p.df) * rng.student_t(df);
            } else if constexpr (std::is_same_v<T, MixturePrior>) {
                const std::array<double, 3> cum = {p.w_zero, p.w_zero + p.w_gauss, 1.0};
                switch (rng.categorical(std::span<const double>(cum))) {
                    case 0: return 0.0;
                    case 1: return std::sqrt(p.tau2) * rng.normal();
                    default: {
                        const double u = rng.uniform() - 0.5;
                        const double scale = std::sqrt(p.nu2) / kSqrt2;
                        return -scale * (u < 0.0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(u));
                    }
                }
            } else {
                throw std::invalid_argument("generate: sampling from a Huber prior is not supported");
            }
        },
        prior);
}

double sample_effect(const EffectPrior& prior, SubstreamRng& rng) {
    // Spike draw is consumed unconditionally so the slab stream is stable.
    const double u = rng.uniform();
    const double slab = sample_prior(prior.slab, rng);
    return u < prior.zero_weight ? 0.0 : slab;
}

}  // namespace

void Scenario::validate() const {
    if (size_pool.empty()) throw std::invalid_argument("scenario: empty size pool");
    double total = 0.0;
    for (const auto& [n, p] : size_pool) {
        if (!(n >= 1.0)) throw std::invalid_argument("scenario: pool sizes must be >= 1");
        if (!(p >= 0.0)) throw std::invalid_argument("scenario: pool probabilities must be >= 0");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("scenario: pool probabilities must sum to 1");
    }
    if (!(snr > 0.0)) throw std::invalid_argument("scenario: snr must be positive");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("scenario: sigma2 must be positive");
    if (!(reference_n > 0.0)) throw std::invalid_argument("scenario: reference_n must be positive");
    if (n_train < 0 || n_test < 0) throw std::invalid_argument("scenario: negative sample counts");
    if (aux_metrics < 0) throw std::invalid_argument("scenario: negative aux metric count");
    if (!(prior_spec.zero_weight >= 0.0 && prior_spec.zero_weight <= 1.0)) {
        throw std::invalid_argument("scenario: zero weight must lie in [0,1]");
    }
    abshrink::validate(prior_spec.slab);
}

double snr_to_scale(double snr, double reference_n, double sigma2) {
    if (!(snr > 0.0) || !(reference_n > 0.0) || !(sigma2 > 0.0)) {
        throw std::invalid_argument("snr_to_scale: all inputs must be positive");
    }
    return snr * sigma2 / reference_n;
}

Scenario builtin_case(int case_id) {
    Scenario s;
    s.sigma2 = 1.0e4;
    s.case_id = case_id;
    switch (case_id) {
        case 1:
            s.snr = 0.1;
            s.prior_spec = {0.0, GaussianPrior{snr_to_scale(kTableCalibration * 0.1,
                                                            s.reference_n, s.sigma2)}};
            break;
        case 2:
            s.snr = 0.4;
            s.prior_spec = {0.5, StudentTPrior{3.0, snr_to_scale(kTableCalibration * 0.4,
                                                                 s.reference_n, s.sigma2)}};
            break;
        case 3:
            s.snr = 10.0;
            s.prior_spec = {0.9, StudentTPrior{3.0, snr_to_scale(kTableCalibration * 10.0,
                                                                 s.reference_n, s.sigma2)}};
            break;
        default:
            throw std::invalid_argument("builtin_case: case id must be 1, 2 or 3");
    }
    return s;
}

Generated generate(const Scenario& scenario) {
    scenario.validate();
    std::vector<double> cum;
    cum.reserve(scenario.size_pool.size());
    double acc = 0.0;
    for (const auto& [n, p] : scenario.size_pool) {
        acc += p;
        cum.push_back(acc);
    }
    if (!cum.empty()) cum.back() = 1.0;

    Generated out;
    const int total = scenario.n_train + scenario.n_test;
    out.train.reserve(static_cast<std::size_t>(scenario.n_train));
    out.test.reserve(static_cast<std::size_t>(scenario.n_test));

    for (int i = 0; i < total; ++i) {
        SubstreamRng rng(scenario.seed, static_cast<std::uint64_t>(i));
        SimulatedExperiment sim;

        const std::size_t pool_ix = rng.categorical(std::span<const double>(cum));
        const double n_eff = scenario.size_pool[pool_ix].first;
        const auto group = static_cast<std::int64_t>(std::llround(2.0 * n_eff));

        sim.mu_true = sample_effect(scenario.prior_spec, rng);

        char id[32];
        std::snprintf(id, sizeof id, "e%06d", i);

        ExperimentReadout full;
        full.experiment_id = id;
        full.metric_id = "m0";
        full.n_treat = group;
        full.n_control = group;
        full.sigma2_pooled = scenario.sigma2;
        const double se2_full = full.se2();
        const double s_full = std::sqrt(se2_full);

        const double eps = s_full * rng.normal();
        full.delta = sim.mu_true + eps;

        if (scenario.split) {
            // delta_a = mu + eps + eta, delta_b = mu + eps - eta: independent
            // halves with twice the full variance whose average is delta_full
            // exactly.
            const double eta = s_full * rng.normal();
            SplitPair pair;
            pair.experiment_id = id;
            pair.delta_a = sim.mu_true + eps + eta;
            pair.delta_b = sim.mu_true + eps - eta;
            const auto half_group = static_cast<std::int64_t>(std::llround(n_eff));
            pair.se2_a = scenario.sigma2 / effective_sample_size(half_group, half_group);
            pair.se2_b = pair.se2_a;
            pair.full_se2 = se2_full;
            sim.split_pair = std::move(pair);
        }

        for (int a = 0; a < scenario.aux_metrics; ++a) {
            ExperimentReadout auxr = full;
            char mid[16];
            std::snprintf(mid, sizeof mid, "m%d", a + 1);
            auxr.metric_id = mid;
            const double aux_eps = s_full * rng.normal();
            auxr.delta = sim.mu_true + aux_eps;
            if (scenario.split && sim.split_pair) {
                const double aux_eta = s_full * rng.normal();
                sim.split_pair->aux[mid] = {sim.mu_true + aux_eps + aux_eta,
                                            sim.split_pair->se2_a};
            }
            sim.aux_full.push_back(std::move(auxr));
        }

        sim.readout_full = std::move(full);
        (i < scenario.n_train ? out.train : out.test).push_back(std::move(sim));
    }
    return out;
}

std::vector<ExperimentReadout> full_readouts(const std::vector<SimulatedExperiment>& sims) {
    std::vector<ExperimentReadout> out;
    out.reserve(sims.size());
    for (const auto& s : sims) out.push_back(s.readout_full);
    return out;
}

std::vector<SplitPair> split_pairs(const std::vector<SimulatedExperiment>& sims) {
    std::vector<SplitPair> out;
    out.reserve(sims.size());
    for (const auto& s : sims) {
        if (!s.split_pair) throw std::invalid_argument("split_pairs: scenario was not split");
        out.push_back(*s.split_pair);
    }
    return out;
}

std::vector<ExperimentReadout> split_a_readouts(const std::vector<SimulatedExperiment>& sims) {
    std::vector<ExperimentReadout> out;
    out.reserve(sims.size());
    for (const auto& s : sims) {
        if (!s.split_pair) throw std::invalid_argument("split_a_readouts: scenario was not split");
        ExperimentReadout r = s.readout_full;
        r.delta = s.split_pair->delta_a;
        r.n_treat = static_cast<std::int64_t>(std::llround(0.5 * static_cast<double>(r.n_treat)));
        r.n_control = r.n_treat;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace abshrink
