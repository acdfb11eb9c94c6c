#pragma once

// Scoring engine: RMSE, CI coverage, and variance shrinkage by selection
// bucket, against ground truth (simulation) or the split-B proxy
// (E[(mu_hat - delta_b)^2] - se2_b and the widened split-B interval).

#include <map>
#include <string>
#include <vector>

#include "abshrink/readout.hpp"
#include "abshrink/splitreg.hpp"

namespace abshrink {

// One scored experiment: the delta selection applies to, plus the adjusted
// estimate. se2_full is the full-traffic noise for Var_S.
struct EvalInputRow {
    std::string experiment_id;
    double delta_sel = 0.0;
    double se_sel = 0.0;
    double se2_full = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct EvalRow {
    std::string method;
    std::string bucket;
    long count = 0;
    double rmse = 0.0;
    double coverage = 0.0;
    double var_s = 0.0;
    bool rmse_floored = false;  // split-B RMSE^2 went negative and was floored
};

struct EvalReport {
    std::vector<EvalRow> rows;
};

// Buckets from p-value thresholds; a threshold >= 1 is the "All" bucket.
std::vector<SelectionRule> buckets_from_thresholds(const std::vector<double>& thresholds);

EvalReport score_against_truth(const std::string& method, const std::vector<EvalInputRow>& rows,
                               const std::map<std::string, double>& truths,
                               const std::vector<SelectionRule>& buckets,
                               bool paper_units = false);

EvalReport score_against_split_b(const std::string& method, const std::vector<EvalInputRow>& rows,
                                 const std::vector<SplitPair>& pairs,
                                 const std::vector<SelectionRule>& buckets, double alpha = 0.05,
                                 bool paper_units = false);

// Aligned plain-text table of a report (one block per method).
std::string format_report(const EvalReport& report);

}  // namespace abshrink
