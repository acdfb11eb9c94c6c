#include "abshrink/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "abshrink/normal.hpp"

namespace abshrink {

namespace {

constexpr int kGlOrder = 20;

struct GlRule {
    std::array<double, kGlOrder> node;
    std::array<double, kGlOrder> weight;
};

// Gauss-Legendre nodes on [-1,1] by Newton iteration on P_n; avoids a table
// of transcribed constants.
GlRule make_gl_rule() {
    GlRule rule;
    const int n = kGlOrder;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.node[i] = -x;
        rule.weight[i] = w;
        rule.node[n - 1 - i] = x;
        rule.weight[n - 1 - i] = w;
    }
    return rule;
}

const GlRule& gl_rule() {
    static const GlRule rule = make_gl_rule();
    return rule;
}

struct Sums {
    double z = 0.0;   // integral of the (scaled) joint density
    double m1 = 0.0;  // of (mu - delta) * density
    double m2 = 0.0;  // of (mu - delta)^2 * density
};

}  // namespace

QuadratureMoments posterior_quadrature(const QuadraturePrior& prior, double delta, double se2) {
    if (!std::isfinite(delta)) throw std::invalid_argument("posterior_quadrature: delta must be finite");
    if (!(se2 > 0.0) || !std::isfinite(se2)) {
        throw std::invalid_argument("posterior_quadrature: se2 must be positive and finite");
    }
    if (!(prior.point_mass_zero >= 0.0 && prior.point_mass_zero <= 1.0)) {
        throw std::invalid_argument("posterior_quadrature: point mass must lie in [0,1]");
    }
    const double s = std::sqrt(se2);
    const double spread = std::sqrt(se2 + std::max(prior.spread2, 0.0));
    const double lo = delta - 12.0 * spread;
    const double hi = delta + 12.0 * spread;

    // Peel the likelihood peak out of the integrand so evidence stays
    // representable at extreme deltas.
    double pi_probe = 0.0;
    for (double mu : {delta, 0.0, 0.5 * delta, delta - s, delta + s}) {
        if (mu >= lo && mu <= hi) pi_probe = std::max(pi_probe, prior.density(mu));
    }
    const double c = pi_probe > 0.0 ? -std::log(s) - kLogSqrt2Pi + std::log(pi_probe) : 0.0;

    auto integrand = [&](double mu) {
        const double d = prior.density(mu);
        if (d <= 0.0) return 0.0;
        const double z = (delta - mu) / s;
        return std::exp(std::log(d) - 0.5 * z * z - std::log(s) - kLogSqrt2Pi - c);
    };

    // Panel edges always include interior kinks (Laplace/Huber densities are
    // only C0 there) so each panel sees a smooth integrand.
    std::vector<double> edges_base = {lo, hi};
    for (double b : prior.breakpoints) {
        if (b > lo && b < hi) edges_base.push_back(b);
    }
    std::sort(edges_base.begin(), edges_base.end());

    const GlRule& rule = gl_rule();
    Sums prev{};
    bool have_prev = false;
    int panels_used = 0;
    Sums cur{};
    double resid = std::numeric_limits<double>::infinity();

    for (int total_panels = 16; total_panels <= 8192; total_panels *= 2) {
        cur = Sums{};
        for (std::size_t seg = 0; seg + 1 < edges_base.size(); ++seg) {
            const double a = edges_base[seg];
            const double b = edges_base[seg + 1];
            const int np = std::max(1, static_cast<int>(std::lround(total_panels * (b - a) / (hi - lo))));
            const double h = (b - a) / np;
            for (int p = 0; p < np; ++p) {
                const double left = a + p * h;
                for (int k = 0; k < kGlOrder; ++k) {
                    const double mu = left + 0.5 * h * (rule.node[k] + 1.0);
                    const double f = integrand(mu) * 0.5 * h * rule.weight[k];
                    const double d = mu - delta;
                    cur.z += f;
                    cur.m1 += f * d;
                    cur.m2 += f * d * d;
                }
            }
        }
        if (have_prev) {
            const double scale_z = std::max(std::abs(cur.z), 1e-300);
            const double r0 = std::abs(cur.z - prev.z) / scale_z;
            const double r1 = std::abs(cur.m1 - prev.m1) / (std::abs(cur.m1) + scale_z * spread);
            const double r2 =
                std::abs(cur.m2 - prev.m2) / (std::abs(cur.m2) + scale_z * spread * spread);
            resid = std::max({r0, r1, r2});
            if (resid < 1e-10) {
                panels_used = total_panels;
                break;
            }
        }
        prev = cur;
        have_prev = true;
        panels_used = total_panels;
    }
    if (resid >= 1e-10 && !(cur.z == 0.0 && prior.point_mass_zero > 0.0)) {
        if (resid >= 1e-8) {  // genuinely unconverged, not just noise at the floor
            std::ostringstream msg;
            msg << "posterior_quadrature: panels exhausted, residual " << resid;
            throw NumericError(msg.str());
        }
    }

    // Atom at zero enters the moments analytically.
    const double z0 = delta / s;
    const double atom = prior.point_mass_zero > 0.0
                            ? prior.point_mass_zero *
                                  std::exp(-0.5 * z0 * z0 - std::log(s) - kLogSqrt2Pi - c)
                            : 0.0;
    const double z_tot = cur.z + atom;
    if (!(z_tot > 0.0) || !std::isfinite(z_tot)) {
        throw NumericError("posterior_quadrature: evidence underflowed to zero");
    }
    const double m1_tot = cur.m1 + atom * (0.0 - delta);
    const double m2_tot = cur.m2 + atom * delta * delta;

    QuadratureMoments out;
    const double c1 = m1_tot / z_tot;
    out.mean = delta + c1;
    out.var = std::max(m2_tot / z_tot - c1 * c1, 0.0);
    out.log_evidence = std::log(z_tot) + c;
    out.evidence = std::exp(out.log_evidence);
    out.panels = panels_used;
    return out;
}

QuadraturePrior quadrature_prior(const PriorModel& prior) {
    validate(prior);
    QuadraturePrior q;
    q.spread2 = prior_variance(prior);
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ZeroPrior>) {
                q.density = [](double) { return 0.0; };
                q.point_mass_zero = 1.0;
            } else if constexpr (std::is_same_v<T, GaussianPrior>) {
                const double tau = std::sqrt(p.tau2);
                q.density = [tau](double mu) { return norm_pdf(mu / tau) / tau; };
            } else if constexpr (std::is_same_v<T, LaplacePrior>) {
                const double nu = std::sqrt(p.nu2);
                q.density = [nu](double mu) {
                    return std::exp(-kSqrt2 * std::abs(mu) / nu) / (nu * kSqrt2);
                };
                q.breakpoints = {0.0};
            } else if constexpr (std::is_same_v<T, HuberPrior>) {
                const double tau2 = p.tau2;
                const double k = p.k;
                const double r = k / std::sqrt(tau2);
                const double z_h = kSqrt2Pi * std::sqrt(tau2) * std::erf(r * kInvSqrt2) +
                                   2.0 * tau2 / k * std::exp(-0.5 * r * r);
                q.density = [tau2, k, z_h](double mu) {
                    const double amu = std::abs(mu);
                    const double raw = amu <= k ? std::exp(-0.5 * mu * mu / tau2)
                                                : std::exp((k * k - 2.0 * k * amu) / (2.0 * tau2));
                    return raw / z_h;
                };
                q.breakpoints = {-k, 0.0, k};
            } else if constexpr (std::is_same_v<T, StudentTPrior>) {
                const double df = p.df;
                const double t_scale = std::sqrt(p.scale2 * (df - 2.0) / df);
                const double log_norm = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                                        0.5 * std::log(df * M_PI) - std::log(t_scale);
                q.density = [df, t_scale, log_norm](double mu) {
                    const double t = mu / t_scale;
                    return std::exp(log_norm - 0.5 * (df + 1.0) * std::log1p(t * t / df));
                };
            } else {  // Mixture
                const double tau = std::sqrt(p.tau2);
                const double nu = std::sqrt(p.nu2);
                const double wg = p.w_gauss;
                const double wl = p.w_laplace;
                q.density = [tau, nu, wg, wl](double mu) {
                    return wg * norm_pdf(mu / tau) / tau +
                           wl * std::exp(-kSqrt2 * std::abs(mu) / nu) / (nu * kSqrt2);
                };
                q.point_mass_zero = p.w_zero;
                q.breakpoints = {0.0};
            }
        },
        prior);
    return q;
}

}  // namespace abshrink
