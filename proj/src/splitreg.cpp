#include "abshrink/splitreg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace abshrink {

namespace {

const PriorModel& find_prior(const std::map<std::string, PriorModel>& priors,
                             const std::string& key) {
    const auto it = priors.find(key);
    if (it == priors.end()) {
        throw std::invalid_argument("make_features: no fitted prior named '" + key + "'");
    }
    return it->second;
}

double eb_mean(const PriorModel& prior, double delta, double se2) {
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GaussianPrior>) {
                return posterior_gaussian(delta, se2, p.tau2).mean;
            } else if constexpr (std::is_same_v<T, LaplacePrior>) {
                return posterior_laplace(delta, se2, p.nu2).mean;
            } else if constexpr (std::is_same_v<T, MixturePrior>) {
                return posterior_mixture(delta, se2, p).mean;
            } else {
                throw std::invalid_argument(
                    "make_features: feature generators support gaussian/laplace/mixture priors");
            }
        },
        prior);
}

std::pair<double, double> aux_lookup(const AuxMap* aux, const std::string& metric) {
    if (aux == nullptr) {
        throw std::invalid_argument("make_features: aux feature requested but no aux data given");
    }
    const auto it = aux->find(metric);
    if (it == aux->end()) {
        throw std::invalid_argument("make_features: no aux metric '" + metric + "'");
    }
    return it->second;
}

Eigen::VectorXd solve_regularizer(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  Regularizer reg) {
    if (reg.kind == Regularizer::Kind::Nnls) return nnls_fit(x, y);
    double lambda = reg.lambda;
    if (std::isnan(lambda)) {
        lambda = 1e-4 * (x.transpose() * x).trace() / static_cast<double>(x.cols());
    }
    return ridge_fit(x, y, lambda);
}

}  // namespace

void SplitPair::validate() const {
    if (!(se2_a > 0.0) || !(se2_b > 0.0) || !(full_se2 > 0.0)) {
        throw std::invalid_argument("split pair '" + experiment_id + "': variances must be positive");
    }
    if (!std::isfinite(delta_a) || !std::isfinite(delta_b)) {
        throw std::invalid_argument("split pair '" + experiment_id + "': deltas must be finite");
    }
}

std::string FeatureTag::label() const {
    switch (kind) {
        case Kind::RawDelta: return "raw_delta";
        case Kind::EbGaussian: return "eb_gaussian(" + prior_key + ")";
        case Kind::EbLaplace: return "eb_laplace(" + prior_key + ")";
        case Kind::EbGhidorah: return "eb_ghidorah(" + prior_key + ")";
        case Kind::AuxRaw: return "aux_raw(" + metric + ")";
        case Kind::AuxEb: return "aux_eb(" + metric + "," + prior_key + ")";
    }
    return "?";
}

std::vector<SplitPair> symmetrize(const std::vector<SplitPair>& pairs) {
    std::vector<SplitPair> out;
    out.reserve(2 * pairs.size());
    out = pairs;
    for (const auto& p : pairs) {
        SplitPair m = p;
        m.delta_a = -m.delta_a;
        m.delta_b = -m.delta_b;
        for (auto& [metric, da] : m.aux) da.first = -da.first;
        out.push_back(std::move(m));
    }
    return out;
}

Eigen::VectorXd make_features(double delta, double se2, const std::vector<FeatureTag>& spec,
                              const std::map<std::string, PriorModel>& fitted_priors,
                              const AuxMap* aux) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(spec.size()));
    for (Eigen::Index j = 0; j < out.size(); ++j) {
        const FeatureTag& tag = spec[static_cast<std::size_t>(j)];
        switch (tag.kind) {
            case FeatureTag::Kind::RawDelta:
                out[j] = delta;
                break;
            case FeatureTag::Kind::EbGaussian:
            case FeatureTag::Kind::EbLaplace:
            case FeatureTag::Kind::EbGhidorah:
                out[j] = eb_mean(find_prior(fitted_priors, tag.prior_key), delta, se2);
                break;
            case FeatureTag::Kind::AuxRaw: {
                out[j] = aux_lookup(aux, tag.metric).first;
                break;
            }
            case FeatureTag::Kind::AuxEb: {
                const auto [ad, ase2] = aux_lookup(aux, tag.metric);
                out[j] = eb_mean(find_prior(fitted_priors, tag.prior_key), ad, ase2);
                break;
            }
        }
    }
    return out;
}

Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
    if (x.rows() != y.size()) throw std::invalid_argument("ridge_fit: X rows must match y length");
    if (x.cols() == 0 || x.rows() == 0) throw std::invalid_argument("ridge_fit: empty system");
    if (!(lambda >= 0.0)) throw std::invalid_argument("ridge_fit: lambda must be >= 0");
    if (lambda == 0.0) {
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
        if (qr.rank() < x.cols()) {
            throw NumericError("ridge_fit: singular system at lambda = 0; use lambda > 0");
        }
        return qr.solve(y);
    }
    Eigen::MatrixXd gram = x.transpose() * x;
    gram.diagonal().array() += lambda;
    return gram.ldlt().solve(x.transpose() * y);
}

Eigen::VectorXd nnls_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() != y.size()) throw std::invalid_argument("nnls_fit: X rows must match y length");
    const Eigen::Index p = x.cols();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    std::vector<bool> passive(static_cast<std::size_t>(p), false);
    const double tol = 1e-10 * std::max(1.0, (x.transpose() * y).cwiseAbs().maxCoeff());

    auto solve_passive = [&](const std::vector<bool>& mask) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (mask[static_cast<std::size_t>(j)]) idx.push_back(j);
        }
        Eigen::VectorXd z = Eigen::VectorXd::Zero(p);
        if (idx.empty()) return z;
        Eigen::MatrixXd xp(x.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t c = 0; c < idx.size(); ++c) xp.col(static_cast<Eigen::Index>(c)) = x.col(idx[c]);
        const Eigen::VectorXd zp = xp.householderQr().solve(y);
        for (std::size_t c = 0; c < idx.size(); ++c) z[idx[c]] = zp[static_cast<Eigen::Index>(c)];
        return z;
    };

    Eigen::VectorXd w = x.transpose() * (y - x * beta);
    for (int outer = 0; outer < 10000; ++outer) {
        // pick the most violated KKT multiplier among the active (zero) set
        Eigen::Index best = -1;
        double best_w = tol;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (!passive[static_cast<std::size_t>(j)] && w[j] > best_w) {
                best_w = w[j];
                best = j;
            }
        }
        if (best < 0) return beta;  // KKT satisfied
        passive[static_cast<std::size_t>(best)] = true;

        for (int inner = 0; inner < 10000; ++inner) {
            const Eigen::VectorXd z = solve_passive(passive);
            bool feasible = true;
            double alpha = 1.0;
            Eigen::Index blocker = -1;
            for (Eigen::Index j = 0; j < p; ++j) {
                if (!passive[static_cast<std::size_t>(j)]) continue;
                if (z[j] <= 0.0) {
                    feasible = false;
                    const double step = beta[j] / (beta[j] - z[j]);
                    if (step < alpha) {
                        alpha = step;
                        blocker = j;
                    }
                }
            }
            if (feasible) {
                beta = z;
                break;
            }
            beta += alpha * (z - beta);
            for (Eigen::Index j = 0; j < p; ++j) {
                if (passive[static_cast<std::size_t>(j)] && (j == blocker || beta[j] <= 1e-14)) {
                    beta[j] = 0.0;
                    passive[static_cast<std::size_t>(j)] = false;
                }
            }
        }
        w = x.transpose() * (y - x * beta);
    }
    std::ostringstream msg;
    msg << "nnls_fit: iteration cap exceeded, max KKT residual " << w.maxCoeff();
    throw NumericError(msg.str());
}

TarwesModel train_rwes_linear(const std::vector<SplitPair>& pairs) {
    if (pairs.size() < 2) throw std::invalid_argument("train_rwes_linear: need at least 2 pairs");
    bool any_nonzero = false;
    for (const auto& p : pairs) {
        p.validate();
        any_nonzero = any_nonzero || p.delta_a != 0.0;
    }
    if (!any_nonzero) {
        throw std::invalid_argument("train_rwes_linear: degenerate input, all delta_a are zero");
    }
    return train_tarwes(pairs, {FeatureTag{FeatureTag::Kind::RawDelta, "", ""}}, {},
                        Regularizer::ridge(0.0));
}

TarwesModel train_tarwes(const std::vector<SplitPair>& pairs, std::vector<FeatureTag> spec,
                         std::map<std::string, PriorModel> fitted_priors, Regularizer reg) {
    if (spec.empty()) throw std::invalid_argument("train_tarwes: empty feature spec");
    if (pairs.size() < spec.size()) {
        throw std::invalid_argument("train_tarwes: need at least as many pairs as features");
    }
    const std::vector<SplitPair> mirrored = symmetrize(pairs);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(mirrored.size()),
                      static_cast<Eigen::Index>(spec.size()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(mirrored.size()));
    for (std::size_t i = 0; i < mirrored.size(); ++i) {
        const SplitPair& p = mirrored[i];
        p.validate();
        x.row(static_cast<Eigen::Index>(i)) =
            make_features(p.delta_a, p.se2_a, spec, fitted_priors, &p.aux).transpose();
        y[static_cast<Eigen::Index>(i)] = p.delta_b;
    }
    TarwesModel model;
    model.feature_spec = std::move(spec);
    model.regularizer = reg;
    model.fitted_priors = std::move(fitted_priors);
    model.coefficients = solve_regularizer(x, y, reg);
    return model;
}

std::vector<FeatureTag> tarwes_default_spec(bool with_ghidorah,
                                            const std::vector<std::string>& aux_metrics) {
    std::vector<FeatureTag> spec = {
        {FeatureTag::Kind::RawDelta, "", ""},
        {FeatureTag::Kind::EbGaussian, "gaussian", ""},
        {FeatureTag::Kind::EbLaplace, "laplace", ""},
    };
    if (with_ghidorah) spec.push_back({FeatureTag::Kind::EbGhidorah, "ghidorah", ""});
    for (const auto& metric : aux_metrics) {
        spec.push_back({FeatureTag::Kind::AuxRaw, "", metric});
        spec.push_back({FeatureTag::Kind::AuxEb, "gaussian", metric});
    }
    return spec;
}

namespace {

MeanVar eb_mean_var(const PriorModel& prior, double delta, double se2) {
    return std::visit(
        [&](const auto& p) -> MeanVar {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GaussianPrior>) {
                return posterior_gaussian(delta, se2, p.tau2);
            } else if constexpr (std::is_same_v<T, LaplacePrior>) {
                return posterior_laplace(delta, se2, p.nu2);
            } else if constexpr (std::is_same_v<T, MixturePrior>) {
                const auto s = posterior_mixture(delta, se2, p);
                return {s.mean, s.variance_uncapped};
            } else {
                throw std::invalid_argument(
                    "make_features: feature generators support gaussian/laplace/mixture priors");
            }
        },
        prior);
}

// Even features for the second-moment regression: |d|, d^2, then for each EB
// generator its squared posterior mean and posterior variance (together they
// span the EB second moment), and the noise level itself.
Eigen::VectorXd even_features(double delta, double se2, const SecondMomentModel& model) {
    Eigen::VectorXd out(3 + 2 * static_cast<Eigen::Index>(model.eb_features.size()));
    out[0] = std::abs(delta);
    out[1] = delta * delta;
    for (std::size_t j = 0; j < model.eb_features.size(); ++j) {
        const MeanVar mv = eb_mean_var(
            find_prior(model.fitted_priors, model.eb_features[j].prior_key), delta, se2);
        out[2 + 2 * static_cast<Eigen::Index>(j)] = mv.mean * mv.mean;
        out[3 + 2 * static_cast<Eigen::Index>(j)] = mv.var;
    }
    out[out.size() - 1] = se2;
    return out;
}

}  // namespace

SecondMomentModel train_second_moment(const std::vector<SplitPair>& pairs,
                                      const std::vector<FeatureTag>& spec,
                                      std::map<std::string, PriorModel> fitted_priors,
                                      Regularizer reg) {
    SecondMomentModel model;
    model.fitted_priors = std::move(fitted_priors);
    for (const auto& tag : spec) {
        if (tag.kind == FeatureTag::Kind::EbGaussian || tag.kind == FeatureTag::Kind::EbLaplace ||
            tag.kind == FeatureTag::Kind::EbGhidorah) {
            model.eb_features.push_back(tag);
        }
    }
    const std::size_t cols = 3 + 2 * model.eb_features.size();
    if (pairs.size() < cols) {
        throw std::invalid_argument("train_second_moment: need at least as many pairs as features");
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(pairs.size()), static_cast<Eigen::Index>(cols));
    Eigen::VectorXd y(static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const SplitPair& p = pairs[i];
        p.validate();
        x.row(static_cast<Eigen::Index>(i)) = even_features(p.delta_a, p.se2_a, model).transpose();
        y[static_cast<Eigen::Index>(i)] = p.delta_b * p.delta_b - p.se2_b;
    }
    model.coefficients = solve_regularizer(x, y, reg);
    return model;
}

double predict_mean(const TarwesModel& model, double delta, double se2, const AuxMap* aux) {
    return model.coefficients.dot(
        make_features(delta, se2, model.feature_spec, model.fitted_priors, aux));
}

double predict_second_moment_variance(const SecondMomentModel& model, double delta, double se2,
                                      double mean) {
    const double second = model.coefficients.dot(even_features(delta, se2, model));
    const double var = second - mean * mean;
    // negative-variance guard: regression output is not a proper moment
    return std::clamp(var, 1e-12 * se2, se2);
}

PosteriorSummary predict_tarwes(const TarwesModel& model, const ExperimentReadout& readout,
                                double alpha, const AuxMap* aux,
                                const SecondMomentModel* variance_model) {
    readout.validate();
    const double se2 = readout.se2();
    const double mean = predict_mean(model, readout.delta, se2, aux);
    const double var = variance_model != nullptr
                           ? predict_second_moment_variance(*variance_model, readout.delta, se2, mean)
                           : se2;
    return summarize_posterior(mean, var, se2, std::numeric_limits<double>::quiet_NaN(), alpha);
}

}  // namespace abshrink
