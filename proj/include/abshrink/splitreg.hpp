#pragma once

// Experiment-splitting regression: RwES linear, TARwES with empirical-Bayes
// feature generators, ridge / non-negative least squares, and the
// second-moment regression used for variance prediction. Models carry no
// intercept; symmetrized training keeps every fitted predictor odd.

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abshrink/posterior.hpp"
#include "abshrink/prior.hpp"
#include "abshrink/readout.hpp"

namespace abshrink {

// (delta, se2) of an auxiliary metric, keyed by metric id.
using AuxMap = std::map<std::string, std::pair<double, double>>;

struct SplitPair {
    std::string experiment_id;
    double delta_a = 0.0;
    double delta_b = 0.0;
    double se2_a = 0.0;
    double se2_b = 0.0;
    double full_se2 = 0.0;  // sigma^2/N at full traffic
    AuxMap aux;             // auxiliary-metric (delta_a, se2_a)

    void validate() const;
};

struct FeatureTag {
    enum class Kind { RawDelta, EbGaussian, EbLaplace, EbGhidorah, AuxRaw, AuxEb };
    Kind kind = Kind::RawDelta;
    std::string prior_key;  // which entry of fitted_priors feeds the generator
    std::string metric;     // aux metric id, for AuxRaw / AuxEb

    std::string label() const;
};

struct Regularizer {
    enum class Kind { Ridge, Nnls };
    Kind kind = Kind::Ridge;
    // Ridge penalty; NaN means the default 1e-4 * trace(X'X)/cols at fit time.
    double lambda = std::numeric_limits<double>::quiet_NaN();

    static Regularizer ridge(double lambda) { return {Kind::Ridge, lambda}; }
    static Regularizer ridge_default() { return {Kind::Ridge, std::numeric_limits<double>::quiet_NaN()}; }
    static Regularizer nnls() { return {Kind::Nnls, 0.0}; }
};

struct TarwesModel {
    std::vector<FeatureTag> feature_spec;
    Eigen::VectorXd coefficients;
    Regularizer regularizer;
    std::map<std::string, PriorModel> fitted_priors;
};

// Second-moment regression for E(mu^2 | delta): even features
// (|delta|, delta^2, squared EB means, se2) against delta_b^2 - se2_b.
struct SecondMomentModel {
    std::vector<FeatureTag> eb_features;  // EB tags whose squared means enter
    Eigen::VectorXd coefficients;
    std::map<std::string, PriorModel> fitted_priors;
};

// Original pairs plus sign-flipped copies (aux deltas flipped too).
std::vector<SplitPair> symmetrize(const std::vector<SplitPair>& pairs);

// Evaluates the feature spec at the GIVEN se2: se2_a while training, the full
// se2 when predicting. That substitution is the whole scale-up mechanism.
Eigen::VectorXd make_features(double delta, double se2, const std::vector<FeatureTag>& spec,
                              const std::map<std::string, PriorModel>& fitted_priors,
                              const AuxMap* aux = nullptr);

// Solves (X'X + lambda I) beta = X'y. lambda = 0 on a rank-deficient system
// raises NumericError advising lambda > 0.
Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda);

// Lawson-Hanson active set; KKT residual below 1e-8 at return.
Eigen::VectorXd nnls_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// No-intercept least squares of delta_b on delta_a (spec = {raw_delta}).
TarwesModel train_rwes_linear(const std::vector<SplitPair>& pairs);

// Features at se2_a, response delta_b, symmetrized, then ridge or NNLS.
TarwesModel train_tarwes(const std::vector<SplitPair>& pairs, std::vector<FeatureTag> spec,
                         std::map<std::string, PriorModel> fitted_priors, Regularizer reg);

// Default TARwES feature specs (raw + EB normal + EB laplace; '+' adds the
// Ghidorah feature; aux metrics add raw and EB-gaussian aux features).
std::vector<FeatureTag> tarwes_default_spec(bool with_ghidorah,
                                            const std::vector<std::string>& aux_metrics = {});

SecondMomentModel train_second_moment(const std::vector<SplitPair>& pairs,
                                      const std::vector<FeatureTag>& spec,
                                      std::map<std::string, PriorModel> fitted_priors,
                                      Regularizer reg);

double predict_mean(const TarwesModel& model, double delta, double se2,
                    const AuxMap* aux = nullptr);

// E(mu^2|delta) - mean^2, clamped to [1e-12 se2, se2].
double predict_second_moment_variance(const SecondMomentModel& model, double delta, double se2,
                                      double mean);

// Full-sample prediction: features at the readout's se2, variance se2 by
// default or the second-moment regression when supplied.
PosteriorSummary predict_tarwes(const TarwesModel& model, const ExperimentReadout& readout,
                                double alpha = 0.05, const AuxMap* aux = nullptr,
                                const SecondMomentModel* variance_model = nullptr);

}  // namespace abshrink
