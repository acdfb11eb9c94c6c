#include <doctest.h>

#include <cmath>

#include "abshrink/cmle.hpp"
#include "abshrink/normal.hpp"
#include "abshrink/rng.hpp"
#include "oracles.hpp"

using namespace abshrink;

TEST_SUITE("cmle") {

TEST_CASE("expected selection bias basics") {
    CHECK(expected_selection_bias(0.0, 1.0, 1.65) == doctest::Approx(0.0));
    CHECK(std::abs(expected_selection_bias(16.5, 1.0, 1.65)) < 1e-6);
    CHECK_THROWS_AS(expected_selection_bias(0.5, 0.0, 1.65), std::invalid_argument);
    CHECK_THROWS_AS(expected_selection_bias(0.5, 1.0, -1.0), std::invalid_argument);
    // negligible selection mass: mu at 0 with an absurd threshold
    CHECK_THROWS_AS(expected_selection_bias(0.0, 1.0, 45.0), NumericError);
}

TEST_CASE("expected selection bias against truncated-normal monte carlo") {
    const double mu = 0.5, sigma = 1.0, k = 1.65;
    SubstreamRng rng(2024, 0);
    double acc = 0.0, acc2 = 0.0;
    long n_sel = 0;
    for (long i = 0; i < 10'000'000; ++i) {
        const double d = mu + sigma * rng.normal();
        if (std::abs(d) > k) {
            const double g = d - mu;
            acc += g;
            acc2 += g * g;
            ++n_sel;
        }
    }
    const double mc_mean = acc / n_sel;
    const double mc_sd = std::sqrt(acc2 / n_sel - mc_mean * mc_mean);
    const double se = mc_sd / std::sqrt(static_cast<double>(n_sel));
    CHECK(std::abs(expected_selection_bias(mu, sigma, k) - mc_mean) < 3.0 * se);
}

TEST_CASE("cmle point estimate") {
    // the fixed point satisfies the defining equation
    for (double d : {1.65, 2.0, 3.0, -2.4}) {
        const auto r = cmle_solve(d, 1.0, 1.65);
        CHECK(r.converged);
        const double residual = d - r.mu_hat - expected_selection_bias(r.mu_hat, 1.0, 1.65);
        CHECK(std::abs(residual) < 1e-8);
    }
    // strict shrinkage at the boundary
    CHECK(cmle_solve(1.65, 1.0, 1.65).mu_hat < 1.65);
    CHECK_THROWS_AS(cmle_solve(1.0, 1.0, 1.65), std::invalid_argument);
}

TEST_CASE("cmle matches a dense grid search of the conditional likelihood") {
    const double d = 2.0, sigma = 1.0, k = 1.65;
    auto cond_loglik = [&](double mu) {
        const double mass = norm_cdf((-k - mu) / sigma) + norm_cdf((mu - k) / sigma);
        return log_norm_pdf((d - mu) / sigma) - std::log(mass);
    };
    double best_mu = 0.0, best = -1e300;
    for (double mu = -6.0; mu <= 6.0; mu += 1e-4) {
        const double l = cond_loglik(mu);
        if (l > best) {
            best = l;
            best_mu = mu;
        }
    }
    CHECK(std::abs(cmle_solve(d, sigma, k).mu_hat - best_mu) < 2e-4);
}

TEST_CASE("equivariance, oddness, shrinkage") {
    for (double d : {1.8, 2.5, 4.0}) {
        const double mu = cmle_solve(d, 1.0, 1.65).mu_hat;
        CHECK(cmle_solve(3.0 * d, 3.0, 3.0 * 1.65).mu_hat == doctest::Approx(3.0 * mu).epsilon(1e-8));
        CHECK(cmle_solve(-d, 1.0, 1.65).mu_hat == doctest::Approx(-mu).epsilon(1e-8));
        CHECK(mu >= 0.0);
        CHECK(mu <= d);
    }
}

TEST_CASE("conditional cdf is monotone decreasing in mu") {
    const double d = 2.2, sigma = 1.0, k = 1.65;
    double prev = 1.1;
    for (double mu = -4.0; mu <= 4.0; mu += 0.25) {
        const double f = conditional_cdf(d, mu, sigma, k);
        CHECK(f <= prev + 1e-12);
        prev = f;
    }
}

TEST_CASE("inverted interval: asymmetry at the boundary and width limits") {
    const double sigma = 1.0, k = 1.65;
    const auto r = cmle_estimate(k, sigma, k, 0.05);
    // near the threshold the conditional interval grows a long lower tail
    CHECK(r.mu_hat - r.ci_low > 2.0 * (r.ci_high - r.mu_hat));
    CHECK(std::isfinite(r.ci_low));
    CHECK(std::isfinite(r.ci_high));
    CHECK(r.equivalent_variance > 0.0);
    // alpha -> 1 collapses the interval
    const auto tight = cmle_ci(2.0, sigma, k, 0.999);
    CHECK(tight.second - tight.first < 0.01);
}

TEST_CASE("interval endpoints are nondecreasing in delta") {
    double prev_lo = -1e300, prev_hi = -1e300;
    for (double d = 1.65; d <= 5.0; d += 0.25) {
        const auto [lo, hi] = cmle_ci(d, 1.0, 1.65, 0.05);
        CHECK(lo >= prev_lo - 1e-7);
        CHECK(hi >= prev_hi - 1e-7);
        prev_lo = lo;
        prev_hi = hi;
    }
}

TEST_CASE("conditional coverage is exact") {
    // smaller companion of the acceptance check: 2000 selected draws
    const double mu = 0.5, sigma = 1.0, k = 1.65;
    SubstreamRng rng(77, 3);
    int covered = 0, n = 0;
    while (n < 2000) {
        const double d = mu + sigma * rng.normal();
        if (std::abs(d) < k) continue;
        const auto [lo, hi] = cmle_ci(d, sigma, k, 0.05);
        covered += (lo <= mu && mu <= hi) ? 1 : 0;
        ++n;
    }
    CHECK(static_cast<double>(covered) / n == doctest::Approx(0.95).epsilon(0.025));
}

}  // TEST_SUITE
