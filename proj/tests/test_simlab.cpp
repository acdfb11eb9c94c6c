#include <doctest.h>

#include <cmath>

#include "abshrink/simlab.hpp"
#include "oracles.hpp"

using namespace abshrink;

TEST_SUITE("simlab") {

TEST_CASE("snr-to-scale arithmetic") {
    CHECK(snr_to_scale(0.1, 1e6, 1.0) == doctest::Approx(1e-7));
    CHECK(snr_to_scale(0.4, 1e6, 1.0) == doctest::Approx(4e-7));
    CHECK(snr_to_scale(10.0, 1e6, 1.0) == doctest::Approx(1e-5));
    CHECK_THROWS_AS(snr_to_scale(0.0, 1e6, 1.0), std::invalid_argument);
}

TEST_CASE("builtin cases carry the nominal labels") {
    const Scenario c1 = builtin_case(1);
    CHECK(c1.snr == doctest::Approx(0.1));
    CHECK(c1.prior_spec.zero_weight == 0.0);
    CHECK(std::holds_alternative<GaussianPrior>(c1.prior_spec.slab));

    const Scenario c2 = builtin_case(2);
    CHECK(c2.snr == doctest::Approx(0.4));
    CHECK(c2.prior_spec.zero_weight == doctest::Approx(0.5));
    CHECK(std::get<StudentTPrior>(c2.prior_spec.slab).df == doctest::Approx(3.0));

    const Scenario c3 = builtin_case(3);
    CHECK(c3.snr == doctest::Approx(10.0));
    CHECK(c3.prior_spec.zero_weight == doctest::Approx(0.9));
    CHECK(std::get<StudentTPrior>(c3.prior_spec.slab).df == doctest::Approx(3.0));

    CHECK_THROWS_AS(builtin_case(4), std::invalid_argument);
}

TEST_CASE("generation is deterministic given the seed") {
    Scenario s = builtin_case(1);
    s.n_train = 50;
    s.n_test = 50;
    s.seed = 88;
    s.aux_metrics = 1;
    const auto a = generate(s);
    const auto b = generate(s);
    REQUIRE(a.train.size() == b.train.size());
    for (std::size_t i = 0; i < a.train.size(); ++i) {
        CHECK(a.train[i].mu_true == b.train[i].mu_true);
        CHECK(a.train[i].readout_full.delta == b.train[i].readout_full.delta);
        CHECK(a.train[i].split_pair->delta_a == b.train[i].split_pair->delta_a);
        CHECK(a.train[i].aux_full[0].delta == b.train[i].aux_full[0].delta);
    }
}

TEST_CASE("zero prior gives standard-normal z scores") {
    Scenario s = builtin_case(1);
    s.prior_spec = EffectPrior{1.0, GaussianPrior{1.0}};
    s.n_train = 10000;
    s.n_test = 0;
    s.seed = 5150;
    const auto gen = generate(s);
    std::vector<double> zs;
    zs.reserve(gen.train.size());
    for (const auto& sim : gen.train) {
        CHECK(sim.mu_true == 0.0);
        zs.push_back(sim.readout_full.delta / sim.readout_full.se());
    }
    CHECK(oracles::ks_test_p(zs, [](double x) { return norm_cdf(x); }) > 0.01);
}

TEST_CASE("case 1 selection rates match the benchmark table") {
    Scenario s = builtin_case(1);
    s.n_train = 100000;
    s.n_test = 0;
    s.seed = 314;
    s.split = false;
    const auto gen = generate(s);
    long c05 = 0, c01 = 0;
    for (const auto& sim : gen.train) {
        const double p = two_sided_p(sim.readout_full.delta, sim.readout_full.se());
        if (p < 0.05) ++c05;
        if (p < 0.01) ++c01;
    }
    const double n = static_cast<double>(gen.train.size());
    CHECK(std::abs(c05 / n - 0.152) < 0.015);
    CHECK(std::abs(c01 / n - 0.065) < 0.010);
}

TEST_CASE("split halves reconstruct the full readout exactly") {
    Scenario s = builtin_case(2);
    s.n_train = 2000;
    s.n_test = 0;
    s.seed = 11;
    const auto gen = generate(s);
    for (const auto& sim : gen.train) {
        const auto& p = *sim.split_pair;
        CHECK(0.5 * (p.delta_a + p.delta_b) ==
              doctest::Approx(sim.readout_full.delta).epsilon(1e-12));
        CHECK(p.se2_a == doctest::Approx(2.0 * p.full_se2).epsilon(1e-9));
        CHECK(p.full_se2 == doctest::Approx(sim.readout_full.se2()).epsilon(1e-12));
    }
}

TEST_CASE("noise variance calibration") {
    Scenario s = builtin_case(1);
    s.n_train = 100000;
    s.n_test = 0;
    s.seed = 21;
    s.split = false;
    const auto gen = generate(s);
    double acc = 0.0;
    for (const auto& sim : gen.train) {
        const double z = (sim.readout_full.delta - sim.mu_true) / sim.readout_full.se();
        acc += z * z;
    }
    const double ratio = acc / static_cast<double>(gen.train.size());
    CHECK(std::abs(ratio - 1.0) < 3.0 * std::sqrt(2.0 / 100000.0));
}

TEST_CASE("aux metrics share the effect with independent noise") {
    Scenario s = builtin_case(1);
    s.n_train = 10000;
    s.n_test = 0;
    s.seed = 33;
    s.aux_metrics = 1;
    const auto gen = generate(s);
    std::vector<double> main_noise, aux_noise;
    for (const auto& sim : gen.train) {
        REQUIRE(sim.aux_full.size() == 1);
        main_noise.push_back(sim.readout_full.delta - sim.mu_true);
        aux_noise.push_back(sim.aux_full[0].delta - sim.mu_true);
        // aux split deltas present for multi-metric training
        CHECK(sim.split_pair->aux.count("m1") == 1);
    }
    const double mm = oracles::mean_of(main_noise), ma = oracles::mean_of(aux_noise);
    double cov = 0.0, va = 0.0, vm = 0.0;
    for (std::size_t i = 0; i < main_noise.size(); ++i) {
        cov += (main_noise[i] - mm) * (aux_noise[i] - ma);
        vm += (main_noise[i] - mm) * (main_noise[i] - mm);
        va += (aux_noise[i] - ma) * (aux_noise[i] - ma);
    }
    CHECK(std::abs(cov / std::sqrt(vm * va)) < 0.02);
}

TEST_CASE("student-t effect variance honors the calibrated scale") {
    Scenario s = builtin_case(3);
    s.n_train = 200000;
    s.n_test = 0;
    s.seed = 47;
    s.split = false;
    const auto gen = generate(s);
    double acc = 0.0;
    long nonzero = 0;
    for (const auto& sim : gen.train) {
        if (sim.mu_true != 0.0) {
            acc += sim.mu_true * sim.mu_true;
            ++nonzero;
        }
    }
    // zero weight 0.9
    CHECK(static_cast<double>(nonzero) / 200000.0 == doctest::Approx(0.1).epsilon(0.05));
    // slab variance 1.0 (t with df 3 is heavy tailed, so the tolerance is loose)
    CHECK(acc / static_cast<double>(nonzero) == doctest::Approx(1.0).epsilon(0.25));
}

TEST_CASE("scenario validation") {
    Scenario s = builtin_case(1);
    s.size_pool = {{1e6, 0.5}, {2e6, 0.4}};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = builtin_case(1);
    s.prior_spec.zero_weight = 1.2;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = builtin_case(1);
    s.n_train = -1;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

}  // TEST_SUITE
