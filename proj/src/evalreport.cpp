#include "abshrink/evalreport.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "abshrink/normal.hpp"

namespace abshrink {

namespace {

constexpr double kPaperUnit = 0.1;  // the benchmark tables report RMSE in units of 0.1

void report_orphans(const std::vector<std::string>& orphans, const char* side) {
    if (orphans.empty()) return;
    std::ostringstream msg;
    msg << "evalreport: " << orphans.size() << " experiment id(s) missing from " << side << ":";
    for (std::size_t i = 0; i < orphans.size() && i < 8; ++i) msg << " " << orphans[i];
    if (orphans.size() > 8) msg << " ...";
    throw std::invalid_argument(msg.str());
}

}  // namespace

std::vector<SelectionRule> buckets_from_thresholds(const std::vector<double>& thresholds) {
    std::vector<SelectionRule> buckets;
    buckets.reserve(thresholds.size());
    for (double t : thresholds) {
        buckets.push_back(t >= 1.0 ? SelectionRule::all() : SelectionRule::p_value_below(t));
    }
    return buckets;
}

EvalReport score_against_truth(const std::string& method, const std::vector<EvalInputRow>& rows,
                               const std::map<std::string, double>& truths,
                               const std::vector<SelectionRule>& buckets, bool paper_units) {
    std::vector<std::string> orphans;
    for (const auto& r : rows) {
        if (truths.find(r.experiment_id) == truths.end()) orphans.push_back(r.experiment_id);
    }
    report_orphans(orphans, "the truth set");

    EvalReport report;
    for (const auto& bucket : buckets) {
        EvalRow row;
        row.method = method;
        row.bucket = bucket.label();
        double sq = 0.0, covered = 0.0, ratio = 0.0;
        for (const auto& r : rows) {
            if (!bucket.selects(r.delta_sel, r.se_sel)) continue;
            const double mu = truths.at(r.experiment_id);
            ++row.count;
            sq += (r.mean - mu) * (r.mean - mu);
            covered += (r.ci_low <= mu && mu <= r.ci_high) ? 1.0 : 0.0;
            ratio += r.variance / r.se2_full;
        }
        if (row.count > 0) {
            row.rmse = std::sqrt(sq / row.count);
            row.coverage = covered / row.count;
            row.var_s = ratio / row.count;
            if (paper_units) row.rmse /= kPaperUnit;
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

EvalReport score_against_split_b(const std::string& method, const std::vector<EvalInputRow>& rows,
                                 const std::vector<SplitPair>& pairs,
                                 const std::vector<SelectionRule>& buckets, double alpha,
                                 bool paper_units) {
    std::map<std::string, const SplitPair*> by_id;
    for (const auto& p : pairs) by_id[p.experiment_id] = &p;
    std::vector<std::string> orphans;
    for (const auto& r : rows) {
        if (by_id.find(r.experiment_id) == by_id.end()) orphans.push_back(r.experiment_id);
    }
    report_orphans(orphans, "the split-pair set");

    const double z = two_sided_z(alpha);
    EvalReport report;
    for (const auto& bucket : buckets) {
        EvalRow row;
        row.method = method;
        row.bucket = bucket.label();
        double sq = 0.0, noise = 0.0, covered = 0.0, ratio = 0.0;
        for (const auto& r : rows) {
            if (!bucket.selects(r.delta_sel, r.se_sel)) continue;
            const SplitPair& p = *by_id.at(r.experiment_id);
            ++row.count;
            sq += (r.mean - p.delta_b) * (r.mean - p.delta_b);
            noise += p.se2_b;
            // interval for delta_b: Var(delta_b | delta_a) = Var(mu|delta_a) + se2_b
            const double half = z * std::sqrt(r.variance + p.se2_b);
            covered += (std::abs(r.mean - p.delta_b) <= half) ? 1.0 : 0.0;
            ratio += r.variance / r.se2_full;
        }
        if (row.count > 0) {
            double mse = sq / row.count - noise / row.count;
            if (mse < 0.0) {
                mse = 0.0;
                row.rmse_floored = true;
            }
            row.rmse = std::sqrt(mse);
            row.coverage = covered / row.count;
            row.var_s = ratio / row.count;
            if (paper_units) row.rmse /= kPaperUnit;
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string format_report(const EvalReport& report) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-14s %-10s %8s %10s %10s %8s\n", "method", "bucket",
                  "count", "rmse", "coverage", "var_s");
    out << line;
    for (const auto& r : report.rows) {
        std::snprintf(line, sizeof line, "%-14s %-10s %8ld %10.4f %9.1f%% %8.2f%s\n",
                      r.method.c_str(), r.bucket.c_str(), r.count, r.rmse, 100.0 * r.coverage,
                      r.var_s, r.rmse_floored ? "  (rmse floored at 0)" : "");
        out << line;
    }
    return out.str();
}

}  // namespace abshrink
