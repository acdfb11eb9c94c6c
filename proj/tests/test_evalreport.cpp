#include <doctest.h>

#include <cmath>

#include "abshrink/evalreport.hpp"
#include "abshrink/posterior.hpp"
#include "abshrink/rng.hpp"
#include "abshrink/simlab.hpp"

using namespace abshrink;

namespace {

EvalInputRow row_of(const std::string& id, double delta, double se2, double mean, double var,
                    double alpha = 0.05) {
    EvalInputRow r;
    r.experiment_id = id;
    r.delta_sel = delta;
    r.se_sel = std::sqrt(se2);
    r.se2_full = se2;
    r.mean = mean;
    r.variance = var;
    std::tie(r.ci_low, r.ci_high) = credible_interval(mean, var, alpha);
    return r;
}

}  // namespace

TEST_SUITE("evalreport") {

TEST_CASE("perfect estimates score zero error and full coverage") {
    std::vector<EvalInputRow> rows;
    std::map<std::string, double> truths;
    for (int i = 0; i < 10; ++i) {
        const std::string id = "e" + std::to_string(i);
        const double mu = 0.1 * i;
        rows.push_back(row_of(id, mu, 1.0, mu, 0.5));
        truths[id] = mu;
    }
    const auto report = score_against_truth("exact", rows, truths,
                                            buckets_from_thresholds({0.05, 1.0}));
    for (const auto& r : report.rows) {
        if (r.count == 0) continue;
        CHECK(r.rmse == doctest::Approx(0.0));
        CHECK(r.coverage == doctest::Approx(1.0));
        CHECK(r.var_s == doctest::Approx(0.5));
    }
}

TEST_CASE("orphan ids are reported") {
    std::vector<EvalInputRow> rows = {row_of("missing", 1.0, 1.0, 1.0, 1.0)};
    CHECK_THROWS_WITH_AS(
        score_against_truth("m", rows, {}, buckets_from_thresholds({1.0})),
        doctest::Contains("missing"), std::invalid_argument);
}

TEST_CASE("nominal coverage of the unadjusted estimator") {
    std::vector<EvalInputRow> rows;
    std::map<std::string, double> truths;
    for (int i = 0; i < 10000; ++i) {
        SubstreamRng rng(808, static_cast<std::uint64_t>(i));
        const std::string id = "e" + std::to_string(i);
        const double mu = rng.normal();
        const double d = mu + rng.normal();
        rows.push_back(row_of(id, d, 1.0, d, 1.0));
        truths[id] = mu;
    }
    const auto report =
        score_against_truth("unadjusted", rows, truths, buckets_from_thresholds({1.0}));
    CHECK(report.rows[0].coverage == doctest::Approx(0.95).epsilon(0.011));
    CHECK(report.rows[0].var_s == doctest::Approx(1.0));
}

TEST_CASE("bucket counts nest") {
    std::vector<EvalInputRow> rows;
    std::map<std::string, double> truths;
    for (int i = 0; i < 3000; ++i) {
        SubstreamRng rng(909, static_cast<std::uint64_t>(i));
        const std::string id = "e" + std::to_string(i);
        const double d = 1.5 * rng.normal();
        rows.push_back(row_of(id, d, 1.0, d, 1.0));
        truths[id] = 0.0;
    }
    const auto report =
        score_against_truth("m", rows, truths, buckets_from_thresholds({0.01, 0.05, 1.0}));
    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].count <= report.rows[1].count);
    CHECK(report.rows[1].count <= report.rows[2].count);
    CHECK(report.rows[2].count == 3000);
    CHECK(report.rows[0].bucket == "p<0.01");
    CHECK(report.rows[2].bucket == "All");
}

TEST_CASE("case-1 unadjusted tail bucket reproduces the benchmark numbers") {
    Scenario s = builtin_case(1);
    s.n_train = 0;
    s.n_test = 20000;
    s.seed = 2718;
    s.split = false;
    const auto gen = generate(s);
    std::vector<EvalInputRow> rows;
    std::map<std::string, double> truths;
    for (const auto& sim : gen.test) {
        const auto& r = sim.readout_full;
        rows.push_back(row_of(r.experiment_id, r.delta, r.se2(), r.delta, r.se2()));
        truths[r.experiment_id] = sim.mu_true;
    }
    const auto report = score_against_truth("unadjusted", rows, truths,
                                            buckets_from_thresholds({0.01, 0.05, 1.0}), true);
    // benchmark: p<0.01 RMSE 2.17 (0.1 units), coverage 70.6%; All 1.46 / 95.0%
    CHECK(report.rows[0].rmse == doctest::Approx(2.17).epsilon(0.12));
    CHECK(report.rows[0].coverage == doctest::Approx(0.706).epsilon(0.07));
    CHECK(report.rows[2].rmse == doctest::Approx(1.46).epsilon(0.04));
    CHECK(report.rows[2].coverage == doctest::Approx(0.95).epsilon(0.01));
}

TEST_CASE("split-b identity holds exactly as implemented") {
    // RMSE^2 + mean(se2_b) must equal the raw mean squared error to delta_b
    std::vector<EvalInputRow> rows;
    std::vector<SplitPair> pairs;
    SubstreamRng rng(654, 0);
    double raw_sq = 0.0, se2b_acc = 0.0;
    const int n = 500;
    for (int i = 0; i < n; ++i) {
        const std::string id = "e" + std::to_string(i);
        SplitPair p;
        p.experiment_id = id;
        p.delta_a = rng.normal();
        p.delta_b = rng.normal();
        p.se2_a = p.se2_b = 0.09;
        p.full_se2 = 0.045;
        pairs.push_back(p);
        const double mean = 0.5 * p.delta_a;
        rows.push_back(row_of(id, p.delta_a, p.se2_a, mean, 0.03));
        raw_sq += (mean - p.delta_b) * (mean - p.delta_b);
        se2b_acc += p.se2_b;
    }
    const auto report =
        score_against_split_b("half", rows, pairs, buckets_from_thresholds({1.0}));
    const double lhs = report.rows[0].rmse * report.rows[0].rmse + se2b_acc / n;
    CHECK(lhs == doctest::Approx(raw_sq / n).epsilon(1e-12));
}

TEST_CASE("exact split-b predictions with vanishing noise score zero") {
    std::vector<EvalInputRow> rows;
    std::vector<SplitPair> pairs;
    for (int i = 0; i < 5; ++i) {
        const std::string id = "e" + std::to_string(i);
        SplitPair p;
        p.experiment_id = id;
        p.delta_a = 0.2 * i + 0.1;
        p.delta_b = 0.5 * p.delta_a;
        p.se2_a = 1.0;
        p.se2_b = 1e-12;
        p.full_se2 = 0.5;
        pairs.push_back(p);
        rows.push_back(row_of(id, p.delta_a, p.se2_a, p.delta_b, 0.25));
    }
    const auto report = score_against_split_b("m", rows, pairs, buckets_from_thresholds({1.0}));
    CHECK(report.rows[0].rmse == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("negative split-b mse is floored and flagged") {
    std::vector<EvalInputRow> rows = {row_of("e0", 1.0, 1.0, 0.5, 0.2)};
    SplitPair p;
    p.experiment_id = "e0";
    p.delta_a = 1.0;
    p.delta_b = 0.5;  // estimate is exact, but se2_b is large
    p.se2_a = p.se2_b = 2.0;
    p.full_se2 = 1.0;
    const auto report =
        score_against_split_b("m", rows, {p}, buckets_from_thresholds({1.0}));
    CHECK(report.rows[0].rmse == 0.0);
    CHECK(report.rows[0].rmse_floored);
}

TEST_CASE("split-b scoring matches truth scoring on simulated data") {
    // companion of the acceptance identity check at reduced size
    Scenario s = builtin_case(1);
    s.n_train = 0;
    s.n_test = 4000;
    s.seed = 1123;
    const auto gen = generate(s);
    const double tau2 = std::get<GaussianPrior>(s.prior_spec.slab).tau2;

    std::vector<EvalInputRow> rows;
    std::map<std::string, double> truths;
    std::vector<SplitPair> pairs;
    for (const auto& sim : gen.test) {
        const auto& p = *sim.split_pair;
        const auto post = posterior_gaussian(p.delta_a, p.se2_a, tau2);
        rows.push_back(row_of(p.experiment_id, p.delta_a, p.se2_a, post.mean, post.var));
        truths[p.experiment_id] = sim.mu_true;
        pairs.push_back(p);
    }
    const auto buckets = buckets_from_thresholds({0.05, 1.0});
    const auto vs_truth = score_against_truth("eb", rows, truths, buckets);
    const auto vs_b = score_against_split_b("eb", rows, pairs, buckets);
    for (std::size_t i = 0; i < vs_truth.rows.size(); ++i) {
        CHECK(vs_b.rows[i].rmse == doctest::Approx(vs_truth.rows[i].rmse).epsilon(0.15));
        CHECK(std::abs(vs_b.rows[i].coverage - vs_truth.rows[i].coverage) < 0.02);
    }
}

}  // TEST_SUITE
