#pragma once

// File formats: readout / split-pair / truth / adjusted / report CSVs and the
// flat key-value files for priors and trained models. Parse errors carry the
// file name and line number. Numeric CSV output uses 9 significant digits;
// key-value files round-trip doubles at 17.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abshrink/evalreport.hpp"
#include "abshrink/prior.hpp"
#include "abshrink/readout.hpp"
#include "abshrink/splitreg.hpp"

namespace abshrink {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// experiment_id,metric_id,delta,n_treat,n_control,sigma2_pooled
std::vector<ExperimentReadout> read_readout_csv(const std::string& path);
void write_readout_csv(const std::string& path, const std::vector<ExperimentReadout>& readouts);

// experiment_id,delta_a,se2_a,delta_b,se2_b,full_se2[,aux_<m>_delta_a,aux_<m>_se2_a...]
std::vector<SplitPair> read_pairs_csv(const std::string& path);
void write_pairs_csv(const std::string& path, const std::vector<SplitPair>& pairs);

// experiment_id,mu_true
std::map<std::string, double> read_truth_csv(const std::string& path);
void write_truth_csv(const std::string& path,
                     const std::vector<std::pair<std::string, double>>& truths);

struct AdjustedRow {
    std::string experiment_id;
    std::string metric_id;
    std::string method;
    double delta_raw = 0.0;
    double mean_adj = 0.0;
    double var_adj = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double p_raw = 1.0;
    double p_adj = 1.0;
};

std::vector<AdjustedRow> read_adjusted_csv(const std::string& path);
void write_adjusted_csv(const std::string& path, const std::vector<AdjustedRow>& rows);

// method,bucket,count,rmse,coverage,var_s
void write_report_csv(const std::string& path, const EvalReport& report);

// delta_a,delta_b,predicted (chart feed)
struct PlotRow {
    double delta_a = 0.0;
    double delta_b = 0.0;
    double predicted = 0.0;
};
void write_plot_csv(const std::string& path, const std::vector<PlotRow>& rows);

void write_prior_file(const std::string& path, const PriorModel& prior);
PriorModel read_prior_file(const std::string& path);

struct LoadedModel {
    TarwesModel model;
    std::optional<SecondMomentModel> second_moment;
};

void write_model_file(const std::string& path, const TarwesModel& model,
                      const SecondMomentModel* second_moment = nullptr);
LoadedModel read_model_file(const std::string& path);

// Flat key=value config file; '#' starts a comment line.
std::map<std::string, std::string> read_config_file(const std::string& path);

}  // namespace abshrink
