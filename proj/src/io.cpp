#include "abshrink/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace abshrink {

namespace {

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] void fail_at(const std::string& path, int line, const std::string& what) {
    throw std::invalid_argument(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& path, int line, const std::string& field,
                    const std::string& text) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        fail_at(path, line, "bad number in column '" + field + "': '" + text + "'");
    }
}

std::int64_t parse_int(const std::string& path, int line, const std::string& field,
                       const std::string& text) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        fail_at(path, line, "bad integer in column '" + field + "': '" + text + "'");
    }
}

struct CsvReader {
    std::string path;
    std::ifstream in;
    std::vector<std::string> header;
    int line_no = 0;

    explicit CsvReader(const std::string& p) : path(p), in(p) {
        if (!in) throw std::invalid_argument(path + ": cannot open file");
        std::string line;
        if (!std::getline(in, line)) fail_at(path, 1, "empty file, header required");
        line_no = 1;
        header = split_csv_line(line);
    }

    int column(const std::string& name, bool required = true) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<int>(i);
        }
        if (required) fail_at(path, 1, "missing required column '" + name + "'");
        return -1;
    }

    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line == "\r") continue;
            fields = split_csv_line(line);
            if (fields.size() != header.size()) {
                fail_at(path, line_no,
                        "expected " + std::to_string(header.size()) + " columns, found " +
                            std::to_string(fields.size()));
            }
            return true;
        }
        return false;
    }
};

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument(path + ": cannot open for writing");
    return out;
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    open_out(path) << content;
}

std::vector<ExperimentReadout> read_readout_csv(const std::string& path) {
    CsvReader r(path);
    const int c_exp = r.column("experiment_id");
    const int c_met = r.column("metric_id");
    const int c_delta = r.column("delta");
    const int c_nt = r.column("n_treat");
    const int c_nc = r.column("n_control");
    const int c_s2 = r.column("sigma2_pooled");
    std::vector<ExperimentReadout> rows;
    std::vector<std::string> f;
    while (r.next(f)) {
        ExperimentReadout row;
        row.experiment_id = f[c_exp];
        row.metric_id = f[c_met];
        row.delta = parse_double(path, r.line_no, "delta", f[c_delta]);
        row.n_treat = parse_int(path, r.line_no, "n_treat", f[c_nt]);
        row.n_control = parse_int(path, r.line_no, "n_control", f[c_nc]);
        row.sigma2_pooled = parse_double(path, r.line_no, "sigma2_pooled", f[c_s2]);
        try {
            row.validate();
        } catch (const std::exception& e) {
            fail_at(path, r.line_no, e.what());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_readout_csv(const std::string& path, const std::vector<ExperimentReadout>& readouts) {
    auto out = open_out(path);
    out << "experiment_id,metric_id,delta,n_treat,n_control,sigma2_pooled\n";
    for (const auto& r : readouts) {
        out << r.experiment_id << ',' << r.metric_id << ',' << fmt9(r.delta) << ',' << r.n_treat
            << ',' << r.n_control << ',' << fmt9(r.sigma2_pooled) << '\n';
    }
}

std::vector<SplitPair> read_pairs_csv(const std::string& path) {
    CsvReader r(path);
    const int c_exp = r.column("experiment_id");
    const int c_da = r.column("delta_a");
    const int c_sa = r.column("se2_a");
    const int c_db = r.column("delta_b");
    const int c_sb = r.column("se2_b");
    const int c_sf = r.column("full_se2");
    // aux_<metric>_delta_a / aux_<metric>_se2_a column pairs
    std::vector<std::pair<std::string, std::pair<int, int>>> aux_cols;
    for (std::size_t i = 0; i < r.header.size(); ++i) {
        const std::string& h = r.header[i];
        const std::string prefix = "aux_";
        const std::string suffix = "_delta_a";
        if (h.size() > prefix.size() + suffix.size() && h.rfind(prefix, 0) == 0 &&
            h.compare(h.size() - suffix.size(), suffix.size(), suffix) == 0) {
            const std::string metric =
                h.substr(prefix.size(), h.size() - prefix.size() - suffix.size());
            const int se2_col = r.column("aux_" + metric + "_se2_a");
            aux_cols.push_back({metric, {static_cast<int>(i), se2_col}});
        }
    }
    std::vector<SplitPair> rows;
    std::vector<std::string> f;
    while (r.next(f)) {
        SplitPair p;
        p.experiment_id = f[c_exp];
        p.delta_a = parse_double(path, r.line_no, "delta_a", f[c_da]);
        p.se2_a = parse_double(path, r.line_no, "se2_a", f[c_sa]);
        p.delta_b = parse_double(path, r.line_no, "delta_b", f[c_db]);
        p.se2_b = parse_double(path, r.line_no, "se2_b", f[c_sb]);
        p.full_se2 = parse_double(path, r.line_no, "full_se2", f[c_sf]);
        for (const auto& [metric, cols] : aux_cols) {
            p.aux[metric] = {parse_double(path, r.line_no, "aux delta", f[cols.first]),
                             parse_double(path, r.line_no, "aux se2", f[cols.second])};
        }
        try {
            p.validate();
        } catch (const std::exception& e) {
            fail_at(path, r.line_no, e.what());
        }
        rows.push_back(std::move(p));
    }
    return rows;
}

void write_pairs_csv(const std::string& path, const std::vector<SplitPair>& pairs) {
    std::set<std::string> metrics;
    for (const auto& p : pairs) {
        for (const auto& [m, v] : p.aux) metrics.insert(m);
    }
    auto out = open_out(path);
    out << "experiment_id,delta_a,se2_a,delta_b,se2_b,full_se2";
    for (const auto& m : metrics) out << ",aux_" << m << "_delta_a,aux_" << m << "_se2_a";
    out << '\n';
    for (const auto& p : pairs) {
        out << p.experiment_id << ',' << fmt9(p.delta_a) << ',' << fmt9(p.se2_a) << ','
            << fmt9(p.delta_b) << ',' << fmt9(p.se2_b) << ',' << fmt9(p.full_se2);
        for (const auto& m : metrics) {
            const auto it = p.aux.find(m);
            if (it == p.aux.end()) {
                throw std::invalid_argument("write_pairs_csv: pair '" + p.experiment_id +
                                            "' lacks aux metric '" + m + "'");
            }
            out << ',' << fmt9(it->second.first) << ',' << fmt9(it->second.second);
        }
        out << '\n';
    }
}

std::map<std::string, double> read_truth_csv(const std::string& path) {
    CsvReader r(path);
    const int c_exp = r.column("experiment_id");
    const int c_mu = r.column("mu_true");
    std::map<std::string, double> rows;
    std::vector<std::string> f;
    while (r.next(f)) {
        rows[f[c_exp]] = parse_double(path, r.line_no, "mu_true", f[c_mu]);
    }
    return rows;
}

void write_truth_csv(const std::string& path,
                     const std::vector<std::pair<std::string, double>>& truths) {
    auto out = open_out(path);
    out << "experiment_id,mu_true\n";
    for (const auto& [id, mu] : truths) out << id << ',' << fmt9(mu) << '\n';
}

std::vector<AdjustedRow> read_adjusted_csv(const std::string& path) {
    CsvReader r(path);
    const int c_exp = r.column("experiment_id");
    const int c_met = r.column("metric_id");
    const int c_method = r.column("method");
    const int c_draw = r.column("delta_raw");
    const int c_mean = r.column("mean_adj");
    const int c_var = r.column("var_adj");
    const int c_lo = r.column("ci_low");
    const int c_hi = r.column("ci_high");
    const int c_praw = r.column("p_raw");
    const int c_padj = r.column("p_adj");
    std::vector<AdjustedRow> rows;
    std::vector<std::string> f;
    while (r.next(f)) {
        AdjustedRow row;
        row.experiment_id = f[c_exp];
        row.metric_id = f[c_met];
        row.method = f[c_method];
        row.delta_raw = parse_double(path, r.line_no, "delta_raw", f[c_draw]);
        row.mean_adj = parse_double(path, r.line_no, "mean_adj", f[c_mean]);
        row.var_adj = parse_double(path, r.line_no, "var_adj", f[c_var]);
        row.ci_low = parse_double(path, r.line_no, "ci_low", f[c_lo]);
        row.ci_high = parse_double(path, r.line_no, "ci_high", f[c_hi]);
        row.p_raw = parse_double(path, r.line_no, "p_raw", f[c_praw]);
        row.p_adj = parse_double(path, r.line_no, "p_adj", f[c_padj]);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_adjusted_csv(const std::string& path, const std::vector<AdjustedRow>& rows) {
    auto out = open_out(path);
    out << "experiment_id,metric_id,method,delta_raw,mean_adj,var_adj,ci_low,ci_high,p_raw,p_adj\n";
    for (const auto& r : rows) {
        out << r.experiment_id << ',' << r.metric_id << ',' << r.method << ',' << fmt9(r.delta_raw)
            << ',' << fmt9(r.mean_adj) << ',' << fmt9(r.var_adj) << ',' << fmt9(r.ci_low) << ','
            << fmt9(r.ci_high) << ',' << fmt9(r.p_raw) << ',' << fmt9(r.p_adj) << '\n';
    }
}

void write_report_csv(const std::string& path, const EvalReport& report) {
    auto out = open_out(path);
    out << "method,bucket,count,rmse,coverage,var_s\n";
    for (const auto& r : report.rows) {
        out << r.method << ',' << r.bucket << ',' << r.count << ',' << fmt9(r.rmse) << ','
            << fmt9(r.coverage) << ',' << fmt9(r.var_s) << '\n';
    }
}

void write_plot_csv(const std::string& path, const std::vector<PlotRow>& rows) {
    auto out = open_out(path);
    out << "delta_a,delta_b,predicted\n";
    for (const auto& r : rows) {
        out << fmt9(r.delta_a) << ',' << fmt9(r.delta_b) << ',' << fmt9(r.predicted) << '\n';
    }
}

void write_prior_file(const std::string& path, const PriorModel& prior) {
    write_text_file(path, prior_to_kv(prior));
}

PriorModel read_prior_file(const std::string& path) {
    try {
        return prior_from_kv(read_text_file(path));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

namespace {

std::string feature_to_string(const FeatureTag& tag) {
    switch (tag.kind) {
        case FeatureTag::Kind::RawDelta: return "raw_delta";
        case FeatureTag::Kind::EbGaussian: return "eb_gaussian:" + tag.prior_key;
        case FeatureTag::Kind::EbLaplace: return "eb_laplace:" + tag.prior_key;
        case FeatureTag::Kind::EbGhidorah: return "eb_ghidorah:" + tag.prior_key;
        case FeatureTag::Kind::AuxRaw: return "aux_raw@" + tag.metric;
        case FeatureTag::Kind::AuxEb: return "aux_eb@" + tag.metric + ":" + tag.prior_key;
    }
    return "?";
}

FeatureTag feature_from_string(const std::string& text) {
    FeatureTag tag;
    std::string body = text;
    const auto at = body.find('@');
    const auto colon = body.find(':', at == std::string::npos ? 0 : at);
    std::string head = body.substr(0, std::min(at, colon));
    if (at != std::string::npos) {
        tag.metric = body.substr(at + 1, colon == std::string::npos ? std::string::npos
                                                                    : colon - at - 1);
    }
    if (colon != std::string::npos) tag.prior_key = body.substr(colon + 1);
    if (head == "raw_delta") tag.kind = FeatureTag::Kind::RawDelta;
    else if (head == "eb_gaussian") tag.kind = FeatureTag::Kind::EbGaussian;
    else if (head == "eb_laplace") tag.kind = FeatureTag::Kind::EbLaplace;
    else if (head == "eb_ghidorah") tag.kind = FeatureTag::Kind::EbGhidorah;
    else if (head == "aux_raw") tag.kind = FeatureTag::Kind::AuxRaw;
    else if (head == "aux_eb") tag.kind = FeatureTag::Kind::AuxEb;
    else throw std::invalid_argument("model file: unknown feature '" + text + "'");
    return tag;
}

}  // namespace

void write_model_file(const std::string& path, const TarwesModel& model,
                      const SecondMomentModel* second_moment) {
    std::ostringstream out;
    out << "kind=tarwes\n";
    out << "regularizer=" << (model.regularizer.kind == Regularizer::Kind::Nnls ? "nnls" : "ridge")
        << "\n";
    if (model.regularizer.kind == Regularizer::Kind::Ridge) {
        out << "lambda=" << fmt17(model.regularizer.lambda) << "\n";
    }
    out << "features=";
    for (std::size_t i = 0; i < model.feature_spec.size(); ++i) {
        if (i) out << ',';
        out << feature_to_string(model.feature_spec[i]);
    }
    out << "\n";
    for (Eigen::Index i = 0; i < model.coefficients.size(); ++i) {
        out << "coef" << i << "=" << fmt17(model.coefficients[i]) << "\n";
    }
    for (const auto& [key, prior] : model.fitted_priors) {
        std::istringstream pk(prior_to_kv(prior));
        std::string line;
        while (std::getline(pk, line)) {
            if (!line.empty()) out << "prior." << key << "." << line << "\n";
        }
    }
    if (second_moment != nullptr) {
        out << "second_moment=1\n";
        for (Eigen::Index i = 0; i < second_moment->coefficients.size(); ++i) {
            out << "sm_coef" << i << "=" << fmt17(second_moment->coefficients[i]) << "\n";
        }
    }
    write_text_file(path, out.str());
}

LoadedModel read_model_file(const std::string& path) {
    std::map<std::string, std::string> kv;
    {
        std::istringstream in(read_text_file(path));
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line[0] == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) fail_at(path, line_no, "missing '='");
            kv[line.substr(0, eq)] = line.substr(eq + 1);
        }
    }
    auto need = [&](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw std::invalid_argument(path + ": missing key '" + key + "'");
        return it->second;
    };
    if (need("kind") != "tarwes") throw std::invalid_argument(path + ": not a tarwes model file");

    LoadedModel loaded;
    TarwesModel& model = loaded.model;
    model.regularizer = need("regularizer") == "nnls"
                            ? Regularizer::nnls()
                            : Regularizer::ridge(std::stod(need("lambda")));
    {
        std::istringstream feats(need("features"));
        std::string item;
        while (std::getline(feats, item, ',')) model.feature_spec.push_back(feature_from_string(item));
    }
    model.coefficients.resize(static_cast<Eigen::Index>(model.feature_spec.size()));
    for (Eigen::Index i = 0; i < model.coefficients.size(); ++i) {
        model.coefficients[i] = std::stod(need("coef" + std::to_string(i)));
    }
    // group prior.<key>.<field> lines back into kv blobs
    std::map<std::string, std::string> prior_blobs;
    for (const auto& [key, value] : kv) {
        if (key.rfind("prior.", 0) != 0) continue;
        const auto second_dot = key.find('.', 6);
        if (second_dot == std::string::npos) {
            throw std::invalid_argument(path + ": malformed prior key '" + key + "'");
        }
        const std::string name = key.substr(6, second_dot - 6);
        prior_blobs[name] += key.substr(second_dot + 1) + "=" + value + "\n";
    }
    for (const auto& [name, blob] : prior_blobs) {
        model.fitted_priors.emplace(name, prior_from_kv(blob));
    }
    if (kv.count("second_moment")) {
        SecondMomentModel sm;
        sm.fitted_priors = model.fitted_priors;
        for (const auto& tag : model.feature_spec) {
            if (tag.kind == FeatureTag::Kind::EbGaussian ||
                tag.kind == FeatureTag::Kind::EbLaplace ||
                tag.kind == FeatureTag::Kind::EbGhidorah) {
                sm.eb_features.push_back(tag);
            }
        }
        sm.coefficients.resize(3 + 2 * static_cast<Eigen::Index>(sm.eb_features.size()));
        for (Eigen::Index i = 0; i < sm.coefficients.size(); ++i) {
            sm.coefficients[i] = std::stod(need("sm_coef" + std::to_string(i)));
        }
        loaded.second_moment = std::move(sm);
    }
    return loaded;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::map<std::string, std::string> kv;
    std::istringstream in(read_text_file(path));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail_at(path, line_no, "missing '='");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

}  // namespace abshrink
