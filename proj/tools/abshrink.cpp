// abshrink: post-selection adjustment for A/B-test readouts.
//
//   abshrink simulate --case 1 --train 1000 --test 1000 --seed 7 --out-dir sim/
//   abshrink fit      --family mixture --readouts sim/train_readouts.csv --out prior.kv
//   abshrink adjust   --method ghidorah --readouts sim/test_readouts.csv \
//                     --prior prior.kv --out adjusted.csv
//   abshrink evaluate --estimates adjusted.csv --truth sim/test_truth.csv \
//                     --readouts sim/test_readouts.csv --paper-units --out report.csv

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "abshrink/io.hpp"
#include "abshrink/runner.hpp"

namespace {

// flags > config file > defaults
void apply_config_file(const std::string& path, abshrink::RunConfig& config,
                       const CLI::App& cmd) {
    const auto kv = abshrink::read_config_file(path);
    auto absent = [&](const char* flag) { return cmd.count(flag) == 0; };
    for (const auto& [key, value] : kv) {
        if (key == "seed" && absent("--seed")) config.seed = std::stoull(value);
        else if (key == "alpha" && absent("--alpha")) config.alpha = std::stod(value);
        else if (key == "paper_units" && absent("--paper-units")) config.paper_units = value == "1";
        else if (key == "prior_odds" && absent("--prior-odds")) config.prior_odds = value;
        else if (key == "thresholds" && absent("--thresholds")) {
            config.thresholds.clear();
            std::istringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) config.thresholds.push_back(std::stod(item));
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"post-selection bias adjustment for A/B-test readouts"};
    app.require_subcommand(1);

    abshrink::RunConfig config;
    std::string method_name = "unadjusted";
    std::string config_path;

    // seed fallback: --seed > config file > ABSHRINK_SEED > 0
    if (const char* env_seed = std::getenv("ABSHRINK_SEED")) {
        config.seed = std::strtoull(env_seed, nullptr, 10);
    }

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", config.seed, "random seed (env ABSHRINK_SEED as fallback)");
        cmd->add_option("--alpha", config.alpha, "interval level (default 0.05)");
        cmd->add_option("--config", config_path, "flat key=value config file");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "generate a benchmark scenario");
    simulate->add_option("--case", config.case_id, "benchmark case id (1, 2 or 3)")->required();
    simulate->add_option("--train", config.n_train, "training experiments (default 1000)");
    simulate->add_option("--test", config.n_test, "test experiments (default 1000)");
    simulate->add_option("--aux-metrics", config.aux_metrics, "extra metrics sharing the effect");
    simulate->add_flag("--no-split", config.no_split, "skip the half/half split pairs");
    simulate->add_option("--out-dir", config.out_dir, "output directory (default .)");
    add_common(simulate);

    CLI::App* fit = app.add_subcommand("fit", "fit a prior or split-regression model");
    fit->add_option("--family", config.family,
                    "gaussian|laplace|huber|mixture|sure|rwes-linear|tarwes|tarwes-plus")
        ->required();
    fit->add_option("--readouts", config.readouts_path, "readout CSV (priors, tarwes features)");
    fit->add_option("--pairs", config.pairs_path, "split-pair CSV (split models)");
    fit->add_option("--out", config.out_path, "output prior/model file")->required();
    fit->add_option("--report", config.report_path, "fit report file");
    fit->add_option("--lambda", config.ridge_lambda, "ridge penalty (default 1e-4 tr(X'X)/p)");
    fit->add_flag("--nnls", config.nnls, "non-negative least squares instead of ridge");
    fit->add_flag("--second-moment", config.second_moment,
                  "also fit the variance regression (tarwes)");
    fit->add_option("--aux", config.aux_feature_metrics,
                    "aux metric id used as extra features (repeatable)");
    add_common(fit);

    CLI::App* adjust = app.add_subcommand("adjust", "adjust readouts with a chosen method");
    adjust
        ->add_option("--method", method_name,
                     "unadjusted|cmle|eb-normal|eb-laplace|eb-huber|ghidorah|rwes-linear|tarwes|"
                     "tarwes-plus|localh1")
        ->required();
    adjust->add_option("--readouts", config.readouts_path, "readout CSV")->required();
    adjust->add_option("--prior", config.prior_path, "prior file (eb methods)");
    adjust->add_option("--model", config.model_path, "model file (split-regression methods)");
    adjust->add_option("--threshold", config.cmle_threshold,
                       "selection p-value threshold (cmle; maps to K = z * se)");
    adjust->add_option("--prior-odds", config.prior_odds, "H1:H0 odds for localh1 (default 1:1)");
    adjust->add_option("--out", config.out_path, "adjusted CSV")->required();
    add_common(adjust);

    CLI::App* evaluate = app.add_subcommand("evaluate", "score adjusted estimates");
    evaluate->add_option("--estimates", config.estimates_path, "adjusted CSV")->required();
    evaluate->add_option("--truth", config.truth_path, "ground-truth CSV (simulation)");
    evaluate->add_option("--readouts", config.readouts_path, "readout CSV (noise levels)");
    evaluate->add_option("--pairs", config.pairs_path, "split-pair CSV (split-B scoring)");
    evaluate->add_flag("--against-split-b", config.against_split_b,
                       "score against split B instead of ground truth");
    evaluate->add_option("--thresholds", config.thresholds,
                         "p-value buckets (default 0.01 0.05 1.0)");
    evaluate->add_flag("--paper-units", config.paper_units, "report RMSE in units of 0.1");
    evaluate->add_option("--metric", config.metric_filter, "score only this metric id");
    evaluate->add_option("--plot", config.plot_path, "write (delta_a,delta_b,predicted) CSV");
    evaluate->add_option("--out", config.out_path, "report CSV")->required();
    add_common(evaluate);

    CLI11_PARSE(app, argc, argv);

    CLI::App* active = app.get_subcommands().front();
    try {
        if (!config_path.empty()) apply_config_file(config_path, config, *active);
        if (active == simulate) config.command = abshrink::RunConfig::Command::Simulate;
        else if (active == fit) config.command = abshrink::RunConfig::Command::Fit;
        else if (active == adjust) config.command = abshrink::RunConfig::Command::Adjust;
        else config.command = abshrink::RunConfig::Command::Evaluate;
        if (active == adjust) config.method = abshrink::method_from_string(method_name);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    return abshrink::run(config, &std::cout);
}
