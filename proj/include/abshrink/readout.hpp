#pragma once

// Experiment data model and frequentist summaries shared by every estimator.
// A readout is one metric of one A/B test collapsed to (delta, sizes, pooled
// variance); delta | mu ~ Normal(mu, sigma2/N) with N the effective size.

#include <cstdint>
#include <string>
#include <vector>

#include "abshrink/normal.hpp"

namespace abshrink {

// Numeric failure distinct from bad arguments (maps to CLI exit code 2).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// N = (1/N_T + 1/N_C)^-1. Symmetric, homogeneous of degree 1, <= min(N_T, N_C).
double effective_sample_size(std::int64_t n_treat, std::int64_t n_control);

struct ExperimentReadout {
    std::string experiment_id;
    std::string metric_id;
    double delta = 0.0;
    std::int64_t n_treat = 0;
    std::int64_t n_control = 0;
    double sigma2_pooled = 0.0;

    double effective_n() const { return effective_sample_size(n_treat, n_control); }
    // Var(delta | mu) = sigma2 / N.
    double se2() const { return sigma2_pooled / effective_n(); }
    double se() const { return std::sqrt(se2()); }

    void validate() const;  // throws std::invalid_argument
};

// Two-sided z-test p-value, 2(1 - Phi(|delta|/se)), in (0,1].
double two_sided_p(double delta, double se);

struct SelectionRule {
    enum class Kind { PValueBelow, AbsDeltaAbove, All };

    Kind kind = Kind::All;
    double value = 1.0;  // p-value threshold or |delta| cutoff K

    static SelectionRule p_value_below(double threshold);
    static SelectionRule abs_delta_above(double k);
    static SelectionRule all() { return SelectionRule{Kind::All, 1.0}; }

    // Selection always tests the observed delta of the readout (split A or the
    // single full readout), two-sided.
    bool selects(double delta, double se) const;
    std::string label() const;
};

// Stable-ordered subset satisfying the rule.
std::vector<ExperimentReadout> apply_selection(const std::vector<ExperimentReadout>& readouts,
                                               const SelectionRule& rule);

}  // namespace abshrink
