#include "abshrink/runner.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "abshrink/cmle.hpp"
#include "abshrink/evalreport.hpp"
#include "abshrink/fitting.hpp"
#include "abshrink/io.hpp"
#include "abshrink/localh1.hpp"
#include "abshrink/posterior.hpp"
#include "abshrink/quadrature.hpp"
#include "abshrink/simlab.hpp"
#include "abshrink/splitreg.hpp"

namespace abshrink {

namespace {

namespace fs = std::filesystem;

void note(std::ostream* log, const std::string& message) {
    if (log != nullptr) *log << message << "\n";
}

std::vector<std::pair<std::string, double>> truth_rows(
    const std::vector<SimulatedExperiment>& sims) {
    std::vector<std::pair<std::string, double>> out;
    out.reserve(sims.size());
    for (const auto& s : sims) out.emplace_back(s.readout_full.experiment_id, s.mu_true);
    return out;
}

std::vector<ExperimentReadout> readouts_with_aux(const std::vector<SimulatedExperiment>& sims) {
    std::vector<ExperimentReadout> out;
    for (const auto& s : sims) {
        out.push_back(s.readout_full);
        for (const auto& a : s.aux_full) out.push_back(a);
    }
    return out;
}

void run_simulate(const RunConfig& config, std::ostream* log) {
    Scenario scenario = builtin_case(config.case_id);
    scenario.n_train = config.n_train;
    scenario.n_test = config.n_test;
    scenario.seed = config.seed;
    scenario.split = !config.no_split;
    scenario.aux_metrics = config.aux_metrics;

    const Generated gen = generate(scenario);

    const fs::path dir(config.out_dir);
    fs::create_directories(dir);
    write_readout_csv((dir / "train_readouts.csv").string(), readouts_with_aux(gen.train));
    write_readout_csv((dir / "test_readouts.csv").string(), readouts_with_aux(gen.test));
    write_truth_csv((dir / "train_truth.csv").string(), truth_rows(gen.train));
    write_truth_csv((dir / "test_truth.csv").string(), truth_rows(gen.test));
    if (scenario.split) {
        write_pairs_csv((dir / "train_pairs.csv").string(), split_pairs(gen.train));
        write_pairs_csv((dir / "test_pairs.csv").string(), split_pairs(gen.test));
    }
    note(log, "simulate: case " + std::to_string(config.case_id) + ", " +
                  std::to_string(config.n_train) + " train / " + std::to_string(config.n_test) +
                  " test -> " + dir.string());
}

std::string fit_report_text(const FitResult& fit) {
    std::ostringstream out;
    out << "loglik=" << fit.loglik << "\n";
    out << "n_used=" << fit.n_used << "\n";
    out << "iterations=" << fit.iterations << "\n";
    out << "converged=" << (fit.converged ? 1 : 0) << "\n";
    if (fit.sure_risk) out << "sure_risk=" << *fit.sure_risk << "\n";
    for (const auto& n : fit.notes) out << "note=" << n << "\n";
    return out.str();
}

// Priors used by TARwES feature generators, fitted on the full (unsplit)
// training readouts.
std::map<std::string, PriorModel> fit_feature_priors(
    const std::vector<ExperimentReadout>& readouts, bool with_ghidorah) {
    std::map<std::string, PriorModel> priors;
    priors.emplace("gaussian", fit_mle2(readouts, PriorFamily::Gaussian).prior);
    priors.emplace("laplace", fit_mle2(readouts, PriorFamily::Laplace).prior);
    if (with_ghidorah) priors.emplace("ghidorah", fit_ghidorah(readouts).prior);
    return priors;
}

void run_fit(const RunConfig& config, std::ostream* log) {
    if (config.out_path.empty()) throw std::invalid_argument("fit: --out is required");
    const std::string& family = config.family;

    if (family == "rwes-linear" || family == "tarwes" || family == "tarwes-plus") {
        if (config.pairs_path.empty()) {
            throw std::invalid_argument("fit: split models need --pairs");
        }
        const auto pairs = read_pairs_csv(config.pairs_path);
        TarwesModel model;
        std::optional<SecondMomentModel> sm;
        if (family == "rwes-linear") {
            model = train_rwes_linear(pairs);
        } else {
            if (config.readouts_path.empty()) {
                throw std::invalid_argument("fit: tarwes needs --readouts to fit feature priors");
            }
            auto readouts = read_readout_csv(config.readouts_path);
            const bool plus = family == "tarwes-plus";
            auto priors = fit_feature_priors(readouts, plus);
            auto spec = tarwes_default_spec(plus, config.aux_feature_metrics);
            const Regularizer reg =
                config.nnls ? Regularizer::nnls() : Regularizer::ridge(config.ridge_lambda);
            model = train_tarwes(pairs, spec, priors, reg);
            if (config.second_moment) {
                sm = train_second_moment(pairs, model.feature_spec, model.fitted_priors,
                                         Regularizer::ridge_default());
            }
        }
        write_model_file(config.out_path, model, sm ? &*sm : nullptr);
        note(log, "fit: " + family + " model -> " + config.out_path);
        return;
    }

    if (config.readouts_path.empty()) throw std::invalid_argument("fit: --readouts is required");
    const auto readouts = read_readout_csv(config.readouts_path);

    FitResult fit;
    if (family == "sure") {
        const SureFit sure = fit_sure_gaussian(readouts);
        fit.prior = GaussianPrior{sure.tau2};
        fit.sure_risk = sure.sure_risk;
        fit.n_used = static_cast<int>(readouts.size());
        fit.converged = true;
    } else if (family == "mixture" || family == "ghidorah") {
        fit = fit_ghidorah(readouts);
    } else {
        fit = fit_mle2(readouts, prior_family_from_string(family));
    }
    write_prior_file(config.out_path, fit.prior);
    if (!config.report_path.empty()) write_text_file(config.report_path, fit_report_text(fit));
    note(log, "fit: " + family + " prior -> " + config.out_path +
                  (fit.converged ? "" : "  [NOT CONVERGED]"));
}

PosteriorSummary adjust_one(const RunConfig& config, const ExperimentReadout& readout,
                            const PriorModel* prior, const LoadedModel* model,
                            const AuxMap* aux) {
    const double se2 = readout.se2();
    const double delta = readout.delta;
    switch (config.method) {
        case Method::Unadjusted:
            return summarize_posterior(delta, se2, se2,
                                       marginal_loglik(ZeroPrior{}, delta, se2), config.alpha);
        case Method::Cmle: {
            if (std::isnan(config.cmle_threshold)) {
                throw std::invalid_argument("adjust: --threshold is required for cmle");
            }
            const double k = two_sided_z(config.cmle_threshold) * readout.se();
            if (std::abs(delta) < k) {
                // not selected at this threshold; report the unadjusted readout
                return summarize_posterior(delta, se2, se2,
                                           std::numeric_limits<double>::quiet_NaN(), config.alpha);
            }
            const CmleResult r = cmle_estimate(delta, readout.se(), k, config.alpha);
            PosteriorSummary s;
            s.mean = r.mu_hat;
            s.variance = s.variance_uncapped = r.equivalent_variance;
            s.ci_low = r.ci_low;
            s.ci_high = r.ci_high;
            s.adjusted_p = adjusted_p_value(r.mu_hat, r.equivalent_variance);
            s.evidence = std::numeric_limits<double>::quiet_NaN();
            return s;
        }
        case Method::EbNormal: {
            const auto& g = std::get<GaussianPrior>(*prior);
            const MeanVar mv = posterior_gaussian(delta, se2, g.tau2);
            return summarize_posterior(mv.mean, mv.var, se2, marginal_loglik(*prior, delta, se2),
                                       config.alpha);
        }
        case Method::EbLaplace: {
            const auto& l = std::get<LaplacePrior>(*prior);
            const MeanVar mv = posterior_laplace(delta, se2, l.nu2);
            return summarize_posterior(mv.mean, mv.var, se2, marginal_loglik(*prior, delta, se2),
                                       config.alpha);
        }
        case Method::EbHuber: {
            const auto& h = std::get<HuberPrior>(*prior);
            const MeanVar mv = posterior_huber(delta, se2, h.tau2, h.k);
            return summarize_posterior(mv.mean, mv.var, se2, marginal_loglik(*prior, delta, se2),
                                       config.alpha);
        }
        case Method::Ghidorah:
            return posterior_mixture(delta, se2, std::get<MixturePrior>(*prior), config.alpha);
        case Method::RwesLinear:
        case Method::Tarwes:
        case Method::TarwesPlus:
            return predict_tarwes(model->model, readout, config.alpha, aux,
                                  model->second_moment ? &*model->second_moment : nullptr);
        case Method::LocalH1:
            return localh1_estimate(readout, PriorOdds::parse(config.prior_odds), config.alpha);
    }
    throw std::invalid_argument("adjust: unknown method");
}

void run_adjust(const RunConfig& config, std::ostream* log) {
    if (config.readouts_path.empty()) throw std::invalid_argument("adjust: --readouts is required");
    if (config.out_path.empty()) throw std::invalid_argument("adjust: --out is required");
    const auto readouts = read_readout_csv(config.readouts_path);

    std::optional<PriorModel> prior;
    std::optional<LoadedModel> model;
    const bool needs_prior = config.method == Method::EbNormal ||
                             config.method == Method::EbLaplace ||
                             config.method == Method::EbHuber ||
                             config.method == Method::Ghidorah;
    const bool needs_model = config.method == Method::RwesLinear ||
                             config.method == Method::Tarwes ||
                             config.method == Method::TarwesPlus;
    if (needs_prior) {
        if (config.prior_path.empty()) {
            throw std::invalid_argument("adjust: this method needs --prior");
        }
        prior = read_prior_file(config.prior_path);
        const std::string kind = prior_kind(*prior);
        const std::map<Method, std::string> expect = {{Method::EbNormal, "gaussian"},
                                                      {Method::EbLaplace, "laplace"},
                                                      {Method::EbHuber, "huber"},
                                                      {Method::Ghidorah, "mixture"}};
        if (kind != expect.at(config.method)) {
            throw std::invalid_argument("adjust: method " + method_to_string(config.method) +
                                        " needs a " + expect.at(config.method) +
                                        " prior, file holds '" + kind + "'");
        }
    }
    if (needs_model) {
        if (config.model_path.empty()) {
            throw std::invalid_argument("adjust: this method needs --model");
        }
        model = read_model_file(config.model_path);
    }

    // Sibling rows of the same experiment serve as auxiliary metrics.
    std::map<std::string, AuxMap> aux_by_experiment;
    for (const auto& r : readouts) {
        aux_by_experiment[r.experiment_id][r.metric_id] = {r.delta, r.se2()};
    }

    std::vector<AdjustedRow> rows;
    rows.reserve(readouts.size());
    for (const auto& r : readouts) {
        AuxMap aux = aux_by_experiment[r.experiment_id];
        aux.erase(r.metric_id);
        const PosteriorSummary s = adjust_one(config, r, prior ? &*prior : nullptr,
                                              model ? &*model : nullptr, &aux);
        AdjustedRow row;
        row.experiment_id = r.experiment_id;
        row.metric_id = r.metric_id;
        row.method = method_to_string(config.method);
        row.delta_raw = r.delta;
        row.mean_adj = s.mean;
        row.var_adj = s.variance;
        row.ci_low = s.ci_low;
        row.ci_high = s.ci_high;
        row.p_raw = two_sided_p(r.delta, r.se());
        row.p_adj = s.adjusted_p;
        rows.push_back(std::move(row));
    }
    write_adjusted_csv(config.out_path, rows);
    note(log, "adjust: " + method_to_string(config.method) + " on " +
                  std::to_string(rows.size()) + " readouts -> " + config.out_path);
}

void run_evaluate(const RunConfig& config, std::ostream* log) {
    if (config.estimates_path.empty()) {
        throw std::invalid_argument("evaluate: --estimates is required");
    }
    if (config.out_path.empty()) throw std::invalid_argument("evaluate: --out is required");
    auto estimates = read_adjusted_csv(config.estimates_path);
    if (!config.metric_filter.empty()) {
        std::erase_if(estimates,
                      [&](const AdjustedRow& r) { return r.metric_id != config.metric_filter; });
    }
    const auto buckets = buckets_from_thresholds(config.thresholds);

    // keep method blocks in first-appearance order
    std::vector<std::string> method_order;
    std::map<std::string, std::vector<AdjustedRow>> by_method;
    for (const auto& r : estimates) {
        if (by_method.find(r.method) == by_method.end()) method_order.push_back(r.method);
        by_method[r.method].push_back(r);
    }

    EvalReport report;
    std::vector<PlotRow> plot;

    if (config.against_split_b) {
        if (config.pairs_path.empty()) {
            throw std::invalid_argument("evaluate: split-B scoring needs --pairs");
        }
        const auto pairs = read_pairs_csv(config.pairs_path);
        std::map<std::string, const SplitPair*> by_id;
        for (const auto& p : pairs) by_id[p.experiment_id] = &p;
        for (const auto& name : method_order) {
            std::vector<EvalInputRow> rows;
            for (const auto& e : by_method[name]) {
                const auto it = by_id.find(e.experiment_id);
                if (it == by_id.end()) {
                    throw std::invalid_argument("evaluate: estimate '" + e.experiment_id +
                                                "' has no split pair");
                }
                EvalInputRow row;
                row.experiment_id = e.experiment_id;
                row.delta_sel = it->second->delta_a;
                row.se_sel = std::sqrt(it->second->se2_a);
                row.se2_full = it->second->full_se2;
                row.mean = e.mean_adj;
                row.variance = e.var_adj;
                row.ci_low = e.ci_low;
                row.ci_high = e.ci_high;
                rows.push_back(std::move(row));
                plot.push_back({it->second->delta_a, it->second->delta_b, e.mean_adj});
            }
            const EvalReport part = score_against_split_b(name, rows, pairs, buckets,
                                                          config.alpha, config.paper_units);
            report.rows.insert(report.rows.end(), part.rows.begin(), part.rows.end());
        }
    } else {
        if (config.truth_path.empty()) {
            throw std::invalid_argument("evaluate: truth scoring needs --truth");
        }
        if (config.readouts_path.empty()) {
            throw std::invalid_argument("evaluate: truth scoring needs --readouts for noise levels");
        }
        const auto truths = read_truth_csv(config.truth_path);
        const auto readouts = read_readout_csv(config.readouts_path);
        std::map<std::pair<std::string, std::string>, double> se2_by_key;
        for (const auto& r : readouts) se2_by_key[{r.experiment_id, r.metric_id}] = r.se2();
        for (const auto& name : method_order) {
            std::vector<EvalInputRow> rows;
            for (const auto& e : by_method[name]) {
                const auto it = se2_by_key.find({e.experiment_id, e.metric_id});
                if (it == se2_by_key.end()) {
                    throw std::invalid_argument("evaluate: estimate '" + e.experiment_id + "/" +
                                                e.metric_id + "' missing from --readouts");
                }
                EvalInputRow row;
                row.experiment_id = e.experiment_id;
                row.delta_sel = e.delta_raw;
                row.se_sel = std::sqrt(it->second);
                row.se2_full = it->second;
                row.mean = e.mean_adj;
                row.variance = e.var_adj;
                row.ci_low = e.ci_low;
                row.ci_high = e.ci_high;
                rows.push_back(std::move(row));
            }
            const EvalReport part =
                score_against_truth(name, rows, truths, buckets, config.paper_units);
            report.rows.insert(report.rows.end(), part.rows.begin(), part.rows.end());
        }
    }

    write_report_csv(config.out_path, report);
    if (!config.plot_path.empty() && !plot.empty()) write_plot_csv(config.plot_path, plot);
    note(log, format_report(report));
}

}  // namespace

Method method_from_string(const std::string& name) {
    if (name == "unadjusted") return Method::Unadjusted;
    if (name == "cmle") return Method::Cmle;
    if (name == "eb-normal") return Method::EbNormal;
    if (name == "eb-laplace") return Method::EbLaplace;
    if (name == "eb-huber") return Method::EbHuber;
    if (name == "ghidorah") return Method::Ghidorah;
    if (name == "rwes-linear") return Method::RwesLinear;
    if (name == "tarwes") return Method::Tarwes;
    if (name == "tarwes-plus") return Method::TarwesPlus;
    if (name == "localh1") return Method::LocalH1;
    throw std::invalid_argument("unknown method '" + name + "'");
}

std::string method_to_string(Method method) {
    switch (method) {
        case Method::Unadjusted: return "unadjusted";
        case Method::Cmle: return "cmle";
        case Method::EbNormal: return "eb-normal";
        case Method::EbLaplace: return "eb-laplace";
        case Method::EbHuber: return "eb-huber";
        case Method::Ghidorah: return "ghidorah";
        case Method::RwesLinear: return "rwes-linear";
        case Method::Tarwes: return "tarwes";
        case Method::TarwesPlus: return "tarwes-plus";
        case Method::LocalH1: return "localh1";
    }
    return "?";
}

void run_or_throw(const RunConfig& config, std::ostream* log) {
    switch (config.command) {
        case RunConfig::Command::Simulate: run_simulate(config, log); return;
        case RunConfig::Command::Fit: run_fit(config, log); return;
        case RunConfig::Command::Adjust: run_adjust(config, log); return;
        case RunConfig::Command::Evaluate: run_evaluate(config, log); return;
    }
    throw std::invalid_argument("unknown command");
}

int run(const RunConfig& config, std::ostream* log) {
    try {
        run_or_throw(config, log);
        return 0;
    } catch (const NumericError& e) {
        if (log != nullptr) *log << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        if (log != nullptr) *log << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        if (log != nullptr) *log << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace abshrink
