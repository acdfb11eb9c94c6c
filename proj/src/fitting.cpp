#include "abshrink/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "abshrink/brent.hpp"
#include "abshrink/normal.hpp"
#include "abshrink/posterior.hpp"

namespace abshrink {

namespace {

struct Obs {
    std::vector<double> delta;
    std::vector<double> se2;
    double med_se2 = 0.0;
};

Obs collect(const std::vector<ExperimentReadout>& readouts, std::size_t min_n) {
    if (readouts.size() < min_n) {
        throw std::invalid_argument("fit: need at least " + std::to_string(min_n) + " readouts");
    }
    Obs obs;
    obs.delta.reserve(readouts.size());
    obs.se2.reserve(readouts.size());
    for (const auto& r : readouts) {
        r.validate();
        obs.delta.push_back(r.delta);
        obs.se2.push_back(r.se2());
    }
    std::vector<double> sorted = obs.se2;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    obs.med_se2 = sorted[sorted.size() / 2];
    return obs;
}

double gaussian_loglik(const Obs& obs, double tau2) {
    double acc = 0.0;
    for (std::size_t i = 0; i < obs.delta.size(); ++i) {
        const double v = tau2 + obs.se2[i];
        acc += -0.5 * obs.delta[i] * obs.delta[i] / v - 0.5 * std::log(v) - kLogSqrt2Pi;
    }
    return acc;
}

double laplace_loglik(const Obs& obs, double nu2) {
    double acc = 0.0;
    const PriorModel prior = LaplacePrior{nu2};
    for (std::size_t i = 0; i < obs.delta.size(); ++i) {
        acc += marginal_loglik(prior, obs.delta[i], obs.se2[i]);
    }
    return acc;
}

double huber_loglik(const Obs& obs, double tau2, double k) {
    double acc = 0.0;
    const PriorModel prior = HuberPrior{tau2, k};
    for (std::size_t i = 0; i < obs.delta.size(); ++i) {
        acc += marginal_loglik(prior, obs.delta[i], obs.se2[i]);
    }
    return acc;
}

constexpr double kScaleLo = 1e-12;
constexpr double kScaleHi = 1e6;
constexpr double kEmWeightFloor = 1e-6;

struct EmOptions {
    bool weight_floor = false;
    int max_iter = 500;
    double rel_tol = 1e-8;
};

FitResult em_mixture(const Obs& obs, MixturePrior prior, const EmOptions& opt) {
    const std::size_t n = obs.delta.size();
    const double lo = std::log(kScaleLo * obs.med_se2);
    const double hi = std::log(kScaleHi * obs.med_se2);

    FitResult res;
    res.n_used = static_cast<int>(n);

    std::vector<double> q0(n), qg(n), ql(n);
    double loglik = -std::numeric_limits<double>::infinity();

    for (int iter = 1; iter <= opt.max_iter; ++iter) {
        // E-step: responsibilities from the component marginals.
        const double lw0 = prior.w_zero > 0.0 ? std::log(prior.w_zero)
                                              : -std::numeric_limits<double>::infinity();
        const double lwg = prior.w_gauss > 0.0 ? std::log(prior.w_gauss)
                                               : -std::numeric_limits<double>::infinity();
        const double lwl = prior.w_laplace > 0.0 ? std::log(prior.w_laplace)
                                                 : -std::numeric_limits<double>::infinity();
        double new_loglik = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = obs.delta[i], s2 = obs.se2[i];
            const double l0 = lw0 + (-0.5 * d * d / s2 - 0.5 * std::log(s2) - kLogSqrt2Pi);
            const double vg = prior.tau2 + s2;
            const double lg = lwg + (-0.5 * d * d / vg - 0.5 * std::log(vg) - kLogSqrt2Pi);
            const double ll =
                lwl + marginal_loglik(LaplacePrior{prior.nu2}, d, s2);
            const std::array<double, 3> terms = {l0, lg, ll};
            const double lse = log_sum_exp(std::span<const double>(terms));
            q0[i] = std::isfinite(l0) ? std::exp(l0 - lse) : 0.0;
            qg[i] = std::isfinite(lg) ? std::exp(lg - lse) : 0.0;
            ql[i] = std::isfinite(ll) ? std::exp(ll - lse) : 0.0;
            new_loglik += lse;
        }
        res.trace.emplace_back(iter, new_loglik);
        res.iterations = iter;
        if (iter > 1 && new_loglik - loglik < opt.rel_tol * std::max(1.0, std::abs(new_loglik))) {
            loglik = new_loglik;
            res.converged = true;
            break;
        }
        loglik = new_loglik;

        // M-step: weights are responsibility means.
        double w0 = std::accumulate(q0.begin(), q0.end(), 0.0) / n;
        double wg = std::accumulate(qg.begin(), qg.end(), 0.0) / n;
        double wl = std::accumulate(ql.begin(), ql.end(), 0.0) / n;
        if (opt.weight_floor) {
            bool floored = false;
            for (double* w : {&w0, &wg, &wl}) {
                if (*w < kEmWeightFloor) {
                    *w = kEmWeightFloor;
                    floored = true;
                }
            }
            if (floored) {
                std::ostringstream note;
                note << "iteration " << iter << ": weight floored at " << kEmWeightFloor;
                res.notes.push_back(note.str());
            }
        }
        const double wsum = w0 + wg + wl;
        prior.w_zero = w0 / wsum;
        prior.w_gauss = wg / wsum;
        prior.w_laplace = wl / wsum;

        // M-step scales: responsibility-weighted component marginal likelihoods,
        // maximized on log scale. Keep the incumbent if the search lands lower
        // (preserves EM ascent regardless of Brent's tolerance).
        const double qg_tot = std::accumulate(qg.begin(), qg.end(), 0.0);
        if (qg_tot > 1e-12) {
            auto obj = [&](double x) {
                const double t2 = std::exp(x);
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double v = t2 + obs.se2[i];
                    acc += qg[i] * (-0.5 * obs.delta[i] * obs.delta[i] / v - 0.5 * std::log(v));
                }
                return acc;
            };
            const BrentResult b = brent_maximize(obj, lo, hi, 1e-11);
            if (b.fx >= obj(std::log(prior.tau2))) prior.tau2 = std::exp(b.x);
        }
        const double ql_tot = std::accumulate(ql.begin(), ql.end(), 0.0);
        if (ql_tot > 1e-12) {
            auto obj = [&](double x) {
                const double n2 = std::exp(x);
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += ql[i] * marginal_loglik(LaplacePrior{n2}, obs.delta[i], obs.se2[i]);
                }
                return acc;
            };
            const BrentResult b = brent_maximize(obj, lo, hi, 1e-11);
            if (b.fx >= obj(std::log(prior.nu2))) prior.nu2 = std::exp(b.x);
        }
    }
    res.prior = prior;
    res.loglik = loglik;
    return res;
}

MixturePrior default_mixture_init(const std::vector<ExperimentReadout>& readouts,
                                  const Obs& obs) {
    const SureFit sure = fit_sure_gaussian(readouts);
    // A SURE scale near zero (null-looking data) would start EM at a point
    // where all three heads coincide and the weights can never separate;
    // start at the noise scale instead and let the M-step shrink from there.
    const double scale = std::max(sure.tau2, obs.med_se2);
    return MixturePrior{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, scale, scale};
}

}  // namespace

PriorFamily prior_family_from_string(const std::string& name) {
    if (name == "gaussian" || name == "normal") return PriorFamily::Gaussian;
    if (name == "laplace") return PriorFamily::Laplace;
    if (name == "huber") return PriorFamily::Huber;
    if (name == "mixture" || name == "ghidorah") return PriorFamily::Mixture;
    throw std::invalid_argument("unknown prior family '" + name + "'");
}

FitResult fit_mle2(const std::vector<ExperimentReadout>& readouts, PriorFamily family,
                   std::optional<PriorModel> init) {
    const Obs obs = collect(readouts, 2);
    const double lo = std::log(kScaleLo * obs.med_se2);
    const double hi = std::log(kScaleHi * obs.med_se2);

    FitResult res;
    res.n_used = static_cast<int>(obs.delta.size());

    switch (family) {
        case PriorFamily::Gaussian: {
            const BrentResult b =
                brent_maximize([&](double x) { return gaussian_loglik(obs, std::exp(x)); }, lo, hi);
            res.prior = GaussianPrior{std::exp(b.x)};
            res.loglik = b.fx;
            res.iterations = b.iterations;
            res.converged = true;
            return res;
        }
        case PriorFamily::Laplace: {
            const BrentResult b =
                brent_maximize([&](double x) { return laplace_loglik(obs, std::exp(x)); }, lo, hi);
            res.prior = LaplacePrior{std::exp(b.x)};
            res.loglik = b.fx;
            res.iterations = b.iterations;
            res.converged = true;
            return res;
        }
        case PriorFamily::Huber: {
            double tau2, k;
            if (init && std::holds_alternative<HuberPrior>(*init)) {
                tau2 = std::get<HuberPrior>(*init).tau2;
                k = std::get<HuberPrior>(*init).k;
            } else {
                tau2 = std::max(fit_sure_gaussian(readouts).tau2, kScaleLo * obs.med_se2);
                k = std::sqrt(tau2);
            }
            const double klo = std::log(1e-6 * std::sqrt(obs.med_se2));
            const double khi = std::log(1e6 * std::sqrt(obs.med_se2));
            double cur = huber_loglik(obs, tau2, k);
            int sweeps = 0;
            bool converged = false;
            while (sweeps < 60 && !converged) {
                ++sweeps;
                const double before = cur;
                const BrentResult bt = brent_maximize(
                    [&](double x) { return huber_loglik(obs, std::exp(x), k); }, lo, hi, 1e-9);
                if (bt.fx > cur) {
                    tau2 = std::exp(bt.x);
                    cur = bt.fx;
                }
                const BrentResult bk = brent_maximize(
                    [&](double x) { return huber_loglik(obs, tau2, std::exp(x)); }, klo, khi, 1e-9);
                if (bk.fx > cur) {
                    k = std::exp(bk.x);
                    cur = bk.fx;
                }
                converged = (cur - before) < 1e-9 * std::max(1.0, std::abs(cur));
            }
            res.prior = HuberPrior{tau2, k};
            res.loglik = cur;
            res.iterations = sweeps;
            res.converged = converged;
            return res;
        }
        case PriorFamily::Mixture: {
            MixturePrior start;
            if (init && std::holds_alternative<MixturePrior>(*init)) {
                start = std::get<MixturePrior>(*init);
                validate(PriorModel(start));
            } else {
                start = default_mixture_init(readouts, obs);
            }
            return em_mixture(obs, start, EmOptions{/*weight_floor=*/false});
        }
    }
    throw std::invalid_argument("fit_mle2: unknown family");
}

SureFit fit_sure_gaussian(const std::vector<ExperimentReadout>& readouts) {
    const Obs obs = collect(readouts, 2);
    auto sure = [&](double tau2) {
        double acc = 0.0;
        for (std::size_t i = 0; i < obs.delta.size(); ++i) {
            const double s2 = obs.se2[i];
            const double shrink = s2 / (tau2 + s2);
            acc += shrink * shrink * obs.delta[i] * obs.delta[i] +
                   s2 * (tau2 - s2) / (tau2 + s2);
        }
        return acc;
    };
    const double lo = std::log(kScaleLo * obs.med_se2);
    const double hi = std::log(kScaleHi * obs.med_se2);
    const BrentResult b = brent_minimize([&](double x) { return sure(std::exp(x)); }, lo, hi);
    return SureFit{std::exp(b.x), b.fx};
}

FitResult fit_ghidorah(const std::vector<ExperimentReadout>& readouts,
                       std::optional<MixturePrior> init) {
    const Obs obs = collect(readouts, 3);
    MixturePrior start;
    std::optional<double> sure_risk;
    if (init) {
        start = *init;
        validate(PriorModel(start));
    } else {
        const SureFit sure = fit_sure_gaussian(readouts);
        sure_risk = sure.sure_risk;
        const double scale = std::max(sure.tau2, obs.med_se2);
        start = MixturePrior{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, scale, scale};
    }
    FitResult res = em_mixture(obs, start, EmOptions{/*weight_floor=*/true});
    res.sure_risk = sure_risk;
    return res;
}

}  // namespace abshrink
