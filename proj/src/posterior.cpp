#include "abshrink/posterior.hpp"

#include <cmath>
#include <stdexcept>

#include "abshrink/quadrature.hpp"

namespace abshrink {

namespace {

void check_obs(double delta, double se2) {
    if (!std::isfinite(delta)) throw std::invalid_argument("posterior: delta must be finite");
    if (!(se2 > 0.0) || !std::isfinite(se2)) {
        throw std::invalid_argument("posterior: se2 must be positive and finite");
    }
}

// Laplace-prior machinery. With a = sqrt(2)/nu, s2 = se2, b = a*s2, the
// marginal is m(d) = (1/(nu sqrt 2)) e^{s2/nu2} [F(d) + F(-d)] where
// F(d) = e^{a d} Phi((-d-b)/s). We work with the scaled logs
//   lsf(d)  = log(e^{s2/nu2} F(d)),
//   lspdf(d) = log(e^{s2/nu2} f(d)) = log(nu/(s sqrt 2)) - d^2/(2 s2) - log sqrt(2 pi)
// (the second identity is exact; the phi factor cancels the scaling).
struct LaplaceParts {
    double b;
    double w;        // F(d) / (F(d) + F(-d))
    double r1;       // f(d) / (F(d) + F(-d))
    double log_lse;  // log(e^{s2/nu2} (F(d)+F(-d)))
};

double laplace_lsf(double delta, double s, double nu) {
    const double s2 = s * s;
    const double a = kSqrt2 / nu;
    const double b = a * s2;
    const double z = (-delta - b) / s;
    if (z > -36.0) {
        return s2 / (nu * nu) + a * delta + log_norm_cdf(z);
    }
    // Deep tail: fold the scaling into the asymptotic expansion of log Phi so
    // the huge s2/nu2 terms cancel algebraically instead of numerically.
    const double iz2 = 1.0 / (z * z);
    const double series =
        1.0 + iz2 * (-1.0 + iz2 * (3.0 + iz2 * (-15.0 + iz2 * (105.0 - 945.0 * iz2))));
    return -0.5 * delta * delta / s2 - std::log(-z) - kLogSqrt2Pi + std::log(series);
}

LaplaceParts laplace_parts(double delta, double se2, double nu2) {
    const double s = std::sqrt(se2);
    const double nu = std::sqrt(nu2);
    const double lf_pos = laplace_lsf(delta, s, nu);
    const double lf_neg = laplace_lsf(-delta, s, nu);
    const double lse = log_sum_exp(lf_pos, lf_neg);
    const double lspdf = std::log(nu / (s * kSqrt2)) - 0.5 * delta * delta / se2 - kLogSqrt2Pi;
    LaplaceParts parts;
    parts.b = kSqrt2 * se2 / nu;
    parts.w = std::exp(lf_pos - lse);
    parts.r1 = std::exp(lspdf - lse);
    parts.log_lse = lse;
    if (!std::isfinite(parts.log_lse)) {
        throw NumericError("posterior_laplace: marginal underflow despite log-space evaluation");
    }
    return parts;
}

double laplace_log_marginal(double delta, double se2, double nu2) {
    const LaplaceParts p = laplace_parts(delta, se2, nu2);
    return -std::log(std::sqrt(nu2) * kSqrt2) + p.log_lse;
}

// Marginal of delta under the Huber prior, assembled from the Gaussian core on
// [-k, k] and the two exponential tails; all pieces share the closed
// exponential-times-Phi form, so no quadrature is needed.
double huber_log_marginal(double delta, double se2, double tau2, double k) {
    const double s = std::sqrt(se2);
    const double tau = std::sqrt(tau2);
    const double r = k / tau;

    // log normalizer of the prior itself
    const double log_zc = std::log(kSqrt2Pi * tau * std::erf(r * kInvSqrt2));
    const double log_zt = std::log(2.0 * tau2 / k) - 0.5 * r * r;
    const double log_z = log_sum_exp(log_zc, log_zt);

    // core: Gaussian product, mass between -k and k of N(m*, v)
    const double v = tau2 * se2 / (tau2 + se2);
    const double m_star = delta * tau2 / (tau2 + se2);
    const double sv = std::sqrt(v);
    const double hi = (k - m_star) / sv;
    const double lo = (-k - m_star) / sv;
    const double log_core = -0.5 * delta * delta / (tau2 + se2) + 0.5 * std::log(v / se2) +
                            log_diff_exp(log_norm_cdf(hi), log_norm_cdf(lo));

    // tails: rate a = k/tau2
    const double a = k / tau2;
    const double lead = 0.5 * r * r + 0.5 * a * a * se2;
    const double log_tail_pos = lead - a * delta + log_norm_cdf((delta - a * se2 - k) / s);
    const double log_tail_neg = lead + a * delta + log_norm_cdf((-delta - a * se2 - k) / s);

    const std::array<double, 3> pieces = {log_core, log_tail_pos, log_tail_neg};
    return log_sum_exp(pieces) - log_z;
}

}  // namespace

MeanVar posterior_gaussian(double delta, double se2, double tau2) {
    check_obs(delta, se2);
    if (!(tau2 > 0.0) || !std::isfinite(tau2)) {
        throw std::invalid_argument("posterior_gaussian: tau2 must be positive and finite");
    }
    const double shrink = tau2 / (tau2 + se2);
    return {shrink * delta, tau2 * se2 / (tau2 + se2)};
}

MeanVar posterior_laplace(double delta, double se2, double nu2) {
    check_obs(delta, se2);
    if (!(nu2 > 0.0) || !std::isfinite(nu2)) {
        throw std::invalid_argument("posterior_laplace: nu2 must be positive and finite");
    }
    const LaplaceParts p = laplace_parts(delta, se2, nu2);
    const double mean = delta + p.b * (2.0 * p.w - 1.0);
    // var = s2 - (4 s4 / nu2) [ f/(F+F-) - 2 F F- / (F+F-)^2 ]
    const double var = se2 - (4.0 * se2 * se2 / nu2) * (p.r1 - 2.0 * p.w * (1.0 - p.w));
    return {mean, std::max(var, 0.0)};
}

double marginal_loglik(const PriorModel& prior, double delta, double se2) {
    check_obs(delta, se2);
    validate(prior);
    const double ll = std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ZeroPrior>) {
                return log_norm_pdf(delta / std::sqrt(se2)) - 0.5 * std::log(se2);
            } else if constexpr (std::is_same_v<T, GaussianPrior>) {
                const double v = p.tau2 + se2;
                return -0.5 * delta * delta / v - 0.5 * std::log(v) - kLogSqrt2Pi;
            } else if constexpr (std::is_same_v<T, LaplacePrior>) {
                return laplace_log_marginal(delta, se2, p.nu2);
            } else if constexpr (std::is_same_v<T, HuberPrior>) {
                return huber_log_marginal(delta, se2, p.tau2, p.k);
            } else if constexpr (std::is_same_v<T, MixturePrior>) {
                std::array<double, 3> terms = {-std::numeric_limits<double>::infinity(),
                                               -std::numeric_limits<double>::infinity(),
                                               -std::numeric_limits<double>::infinity()};
                if (p.w_zero > 0.0) {
                    terms[0] = std::log(p.w_zero) - 0.5 * delta * delta / se2 -
                               0.5 * std::log(se2) - kLogSqrt2Pi;
                }
                if (p.w_gauss > 0.0) {
                    const double v = p.tau2 + se2;
                    terms[1] = std::log(p.w_gauss) - 0.5 * delta * delta / v - 0.5 * std::log(v) -
                               kLogSqrt2Pi;
                }
                if (p.w_laplace > 0.0) {
                    terms[2] = std::log(p.w_laplace) + laplace_log_marginal(delta, se2, p.nu2);
                }
                return log_sum_exp(std::span<const double>(terms));
            } else {  // StudentT: no closed form; integrate
                try {
                    return posterior_quadrature(quadrature_prior(PriorModel(p)), delta, se2)
                        .log_evidence;
                } catch (const NumericError&) {
                    return kLogLikFloor;  // underflow: flagged floor, never -inf
                }
            }
        },
        prior);
    if (!std::isfinite(ll)) return kLogLikFloor;
    return std::max(ll, kLogLikFloor);
}

double adjusted_p_value(double mean, double variance) {
    if (!std::isfinite(mean) || !(variance >= 0.0)) {
        throw std::invalid_argument("adjusted_p_value: need finite mean and variance >= 0");
    }
    if (variance == 0.0) return mean == 0.0 ? 1.0 : 0.0;
    // 2 Phi(-|mean|/sd) via erfc keeps tail accuracy
    return std::erfc(std::abs(mean) / std::sqrt(variance) * kInvSqrt2);
}

std::pair<double, double> credible_interval(double mean, double variance, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("credible_interval: alpha must lie in (0,1)");
    }
    if (variance == 0.0) return {mean, mean};
    const double half = two_sided_z(alpha) * std::sqrt(variance);
    return {mean - half, mean + half};
}

PosteriorSummary summarize_posterior(double mean, double variance_uncapped, double se2,
                                     double evidence, double alpha) {
    PosteriorSummary s;
    s.mean = mean;
    s.variance_uncapped = variance_uncapped;
    s.variance = std::min(variance_uncapped, se2);  // cap so intervals never widen
    s.evidence = evidence;
    std::tie(s.ci_low, s.ci_high) = credible_interval(mean, s.variance, alpha);
    s.adjusted_p = adjusted_p_value(mean, s.variance);
    return s;
}

PosteriorSummary posterior_mixture(double delta, double se2, const MixturePrior& prior,
                                   double alpha) {
    check_obs(delta, se2);
    validate(PriorModel(prior));

    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    std::array<double, 3> log_num = {neg_inf, neg_inf, neg_inf};
    if (prior.w_zero > 0.0) {
        log_num[0] = std::log(prior.w_zero) - 0.5 * delta * delta / se2 - 0.5 * std::log(se2) -
                     kLogSqrt2Pi;
    }
    if (prior.w_gauss > 0.0) {
        const double v = prior.tau2 + se2;
        log_num[1] =
            std::log(prior.w_gauss) - 0.5 * delta * delta / v - 0.5 * std::log(v) - kLogSqrt2Pi;
    }
    if (prior.w_laplace > 0.0) {
        log_num[2] = std::log(prior.w_laplace) + laplace_log_marginal(delta, se2, prior.nu2);
    }
    const double evidence = log_sum_exp(std::span<const double>(log_num));
    if (!std::isfinite(evidence)) {
        throw NumericError("posterior_mixture: all component marginals underflowed");
    }

    std::array<double, 3> q{0.0, 0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
        q[i] = std::isfinite(log_num[i]) ? std::exp(log_num[i] - evidence) : 0.0;
    }

    const MeanVar g = prior.w_gauss > 0.0 ? posterior_gaussian(delta, se2, prior.tau2) : MeanVar{};
    const MeanVar l =
        prior.w_laplace > 0.0 ? posterior_laplace(delta, se2, prior.nu2) : MeanVar{};

    const double mean = q[1] * g.mean + q[2] * l.mean;
    // Law of total variance over the three heads; the zero head contributes
    // mean 0 and variance 0.
    double var = q[1] * (g.var + g.mean * g.mean) + q[2] * (l.var + l.mean * l.mean) - mean * mean;
    var = std::max(var, 0.0);

    PosteriorSummary s = summarize_posterior(mean, var, se2, evidence, alpha);
    s.component_posteriors = q;
    return s;
}

MeanVar posterior_huber(double delta, double se2, double tau2, double k) {
    check_obs(delta, se2);
    validate(PriorModel(HuberPrior{tau2, k}));
    const auto q = posterior_quadrature(quadrature_prior(PriorModel(HuberPrior{tau2, k})), delta, se2);
    return {q.mean, q.var};
}

}  // namespace abshrink
