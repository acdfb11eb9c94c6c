#pragma once

// The four workflows behind the CLI (simulate / fit / adjust / evaluate),
// exposed as a library call so tests can drive them without a process spawn.
// Exit codes: 0 success, 1 validation error, 2 numeric failure.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace abshrink {

enum class Method {
    Unadjusted,
    Cmle,
    EbNormal,
    EbLaplace,
    EbHuber,
    Ghidorah,
    RwesLinear,
    Tarwes,
    TarwesPlus,
    LocalH1,
};

Method method_from_string(const std::string& name);
std::string method_to_string(Method method);

struct RunConfig {
    enum class Command { Simulate, Fit, Adjust, Evaluate };
    Command command = Command::Simulate;

    std::uint64_t seed = 0;
    double alpha = 0.05;
    std::vector<double> thresholds = {0.01, 0.05, 1.0};
    bool paper_units = false;

    // simulate
    int case_id = 1;
    int n_train = 1000;
    int n_test = 1000;
    int aux_metrics = 0;
    bool no_split = false;
    std::string out_dir = ".";

    // fit
    std::string family;       // gaussian|laplace|huber|mixture|sure|rwes-linear|tarwes|tarwes-plus
    std::string readouts_path;
    std::string pairs_path;
    std::string out_path;
    std::string report_path;
    double ridge_lambda = std::numeric_limits<double>::quiet_NaN();
    bool nnls = false;
    bool second_moment = false;
    std::vector<std::string> aux_feature_metrics;

    // adjust
    Method method = Method::Unadjusted;
    std::string prior_path;
    std::string model_path;
    double cmle_threshold = std::numeric_limits<double>::quiet_NaN();
    std::string prior_odds = "1:1";

    // evaluate
    std::string estimates_path;
    std::string truth_path;
    std::string plot_path;
    bool against_split_b = false;
    std::string metric_filter;  // empty = all metrics
};

// Runs the workflow, writing artifacts and human-readable notes to `log`
// (may be null). Exceptions are mapped to exit codes by run(); run_or_throw
// propagates them for tests that want the error.
int run(const RunConfig& config, std::ostream* log = nullptr);
void run_or_throw(const RunConfig& config, std::ostream* log = nullptr);

}  // namespace abshrink
