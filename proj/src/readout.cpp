#include "abshrink/readout.hpp"

#include <cmath>
#include <stdexcept>

namespace abshrink {

double effective_sample_size(std::int64_t n_treat, std::int64_t n_control) {
    if (n_treat < 1 || n_control < 1) {
        throw std::invalid_argument("effective_sample_size: group sizes must be >= 1");
    }
    const double nt = static_cast<double>(n_treat);
    const double nc = static_cast<double>(n_control);
    return 1.0 / (1.0 / nt + 1.0 / nc);
}

void ExperimentReadout::validate() const {
    if (n_treat < 1 || n_control < 1) {
        throw std::invalid_argument("readout '" + experiment_id + "': group sizes must be >= 1");
    }
    if (!(sigma2_pooled > 0.0) || !std::isfinite(sigma2_pooled)) {
        throw std::invalid_argument("readout '" + experiment_id + "': sigma2_pooled must be positive and finite");
    }
    if (!std::isfinite(delta)) {
        throw std::invalid_argument("readout '" + experiment_id + "': delta must be finite");
    }
}

double two_sided_p(double delta, double se) {
    if (!(se > 0.0) || !std::isfinite(se)) {
        throw std::invalid_argument("two_sided_p: se must be positive and finite");
    }
    if (!std::isfinite(delta)) {
        throw std::invalid_argument("two_sided_p: delta must be finite");
    }
    // 2(1 - Phi(|d|/se)) = erfc(|d|/(se sqrt(2)))
    return std::erfc(std::abs(delta) / se * kInvSqrt2);
}

SelectionRule SelectionRule::p_value_below(double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw std::invalid_argument("SelectionRule: p-value threshold must lie in (0,1]");
    }
    return SelectionRule{Kind::PValueBelow, threshold};
}

SelectionRule SelectionRule::abs_delta_above(double k) {
    if (!(k > 0.0) || !std::isfinite(k)) {
        throw std::invalid_argument("SelectionRule: K must be positive and finite");
    }
    return SelectionRule{Kind::AbsDeltaAbove, k};
}

bool SelectionRule::selects(double delta, double se) const {
    switch (kind) {
        case Kind::All:
            return true;
        case Kind::PValueBelow:
            // p <= t so that threshold 1 keeps p = 1 readouts (delta = 0).
            return two_sided_p(delta, se) <= value;
        case Kind::AbsDeltaAbove:
            return std::abs(delta) > value;
    }
    return false;
}

std::string SelectionRule::label() const {
    char buf[64];
    switch (kind) {
        case Kind::All:
            return "All";
        case Kind::PValueBelow:
            if (value >= 1.0) return "All";
            std::snprintf(buf, sizeof buf, "p<%g", value);
            return buf;
        case Kind::AbsDeltaAbove:
            std::snprintf(buf, sizeof buf, "|d|>%g", value);
            return buf;
    }
    return "?";
}

std::vector<ExperimentReadout> apply_selection(const std::vector<ExperimentReadout>& readouts,
                                               const SelectionRule& rule) {
    std::vector<ExperimentReadout> out;
    out.reserve(readouts.size());
    for (const auto& r : readouts) {
        if (rule.selects(r.delta, r.se())) out.push_back(r);
    }
    return out;
}

}  // namespace abshrink
