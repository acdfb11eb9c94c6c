#include <doctest.h>

#include <array>
#include <cmath>

#include "abshrink/normal.hpp"

using namespace abshrink;

TEST_SUITE("normal") {

TEST_CASE("cdf basics and symmetry") {
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5));
    CHECK(norm_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-9));
    for (double x : {0.1, 0.7, 1.5, 3.0, 6.0}) {
        CHECK(norm_cdf(-x) + norm_cdf(x) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("log cdf agrees with direct log in the overlap region") {
    for (double x = -34.0; x <= 2.0; x += 0.25) {
        const double direct = std::log(norm_cdf(x));
        CHECK(log_norm_cdf(x) == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("log cdf far tail stays finite and monotone") {
    CHECK(log_norm_cdf(-100.0) < log_norm_cdf(-50.0));
    CHECK(log_norm_cdf(-50.0) < log_norm_cdf(-37.0));
    CHECK(std::isfinite(log_norm_cdf(-300.0)));
    // the asymptotic expansion agrees with the erfc branch in their overlap
    for (double x = -35.0; x <= -20.0; x += 1.0) {
        const double ix2 = 1.0 / (x * x);
        const double series =
            1.0 + ix2 * (-1.0 + ix2 * (3.0 + ix2 * (-15.0 + ix2 * (105.0 - 945.0 * ix2))));
        const double asym = -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + std::log(series);
        CHECK(log_norm_cdf(x) == doctest::Approx(asym).epsilon(1e-10));
    }
}

TEST_CASE("quantile round trip") {
    for (double p : {1e-12, 1e-6, 0.01, 0.025, 0.3, 0.5, 0.7, 0.975, 0.99, 1.0 - 1e-9}) {
        CHECK(norm_cdf(norm_quantile(p)) == doctest::Approx(p).epsilon(1e-11));
    }
    CHECK(two_sided_z(0.05) == doctest::Approx(1.959964).epsilon(1e-6));
    CHECK(two_sided_z(0.01) == doctest::Approx(2.575829).epsilon(1e-6));
    CHECK_THROWS_AS(norm_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(norm_quantile(1.0), std::invalid_argument);
}

TEST_CASE("log-sum-exp handles spread magnitudes") {
    CHECK(log_sum_exp(0.0, 0.0) == doctest::Approx(std::log(2.0)));
    CHECK(log_sum_exp(-1000.0, 0.0) == doctest::Approx(0.0));
    const std::array<double, 3> xs = {-700.0, -701.0, -702.0};
    const double expect = -700.0 + std::log(1.0 + std::exp(-1.0) + std::exp(-2.0));
    CHECK(log_sum_exp(std::span<const double>(xs)) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(log_diff_exp(0.0, -1.0) == doctest::Approx(std::log(1.0 - std::exp(-1.0))));
}

}  // TEST_SUITE
