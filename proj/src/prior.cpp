#include "abshrink/prior.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "abshrink/normal.hpp"

namespace abshrink {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string("prior: ") + name + " must be positive and finite");
    }
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void validate(const PriorModel& prior) {
    std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GaussianPrior>) {
                require_positive(p.tau2, "tau2");
            } else if constexpr (std::is_same_v<T, LaplacePrior>) {
                require_positive(p.nu2, "nu2");
            } else if constexpr (std::is_same_v<T, HuberPrior>) {
                require_positive(p.tau2, "tau2");
                require_positive(p.k, "k");
            } else if constexpr (std::is_same_v<T, StudentTPrior>) {
                require_positive(p.scale2, "scale2");
                if (!(p.df > 2.0)) throw std::invalid_argument("prior: StudentT df must exceed 2");
            } else if constexpr (std::is_same_v<T, MixturePrior>) {
                if (p.w_zero < 0.0 || p.w_gauss < 0.0 || p.w_laplace < 0.0) {
                    throw std::invalid_argument("prior: mixture weights must be nonnegative");
                }
                if (std::abs(p.w_zero + p.w_gauss + p.w_laplace - 1.0) > 1e-12) {
                    throw std::invalid_argument("prior: mixture weights must sum to 1");
                }
                require_positive(p.tau2, "tau2");
                require_positive(p.nu2, "nu2");
            }
        },
        prior);
}

double prior_variance(const PriorModel& prior) {
    return std::visit(
        [](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ZeroPrior>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, GaussianPrior>) {
                return p.tau2;
            } else if constexpr (std::is_same_v<T, LaplacePrior>) {
                return p.nu2;
            } else if constexpr (std::is_same_v<T, StudentTPrior>) {
                return p.scale2;
            } else if constexpr (std::is_same_v<T, MixturePrior>) {
                return p.w_gauss * p.tau2 + p.w_laplace * p.nu2;
            } else {  // Huber: exact second moment of the normalized density
                const double tau = std::sqrt(p.tau2);
                const double r = p.k / tau;
                // Gaussian core on [-k, k]
                const double zc = kSqrt2Pi * tau * std::erf(r * kInvSqrt2);
                const double m2c = p.tau2 * (zc - 2.0 * p.k * kSqrt2Pi * norm_pdf(r));
                // Laplace tails: rate a = k/tau2 beyond k
                const double a = p.k / p.tau2;
                const double zt = 2.0 * std::exp(-0.5 * r * r) / a;
                const double m2t = zt * (p.k * p.k + 2.0 * p.k / a + 2.0 / (a * a));
                return (m2c + m2t) / (zc + zt);
            }
        },
        prior);
}

std::string prior_kind(const PriorModel& prior) {
    struct V {
        std::string operator()(const ZeroPrior&) const { return "zero"; }
        std::string operator()(const GaussianPrior&) const { return "gaussian"; }
        std::string operator()(const LaplacePrior&) const { return "laplace"; }
        std::string operator()(const HuberPrior&) const { return "huber"; }
        std::string operator()(const StudentTPrior&) const { return "student_t"; }
        std::string operator()(const MixturePrior&) const { return "mixture"; }
    };
    return std::visit(V{}, prior);
}

std::string prior_to_kv(const PriorModel& prior) {
    std::ostringstream out;
    out << "kind=" << prior_kind(prior) << "\n";
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GaussianPrior>) {
                out << "tau2=" << fmt17(p.tau2) << "\n";
            } else if constexpr (std::is_same_v<T, LaplacePrior>) {
                out << "nu2=" << fmt17(p.nu2) << "\n";
            } else if constexpr (std::is_same_v<T, HuberPrior>) {
                out << "tau2=" << fmt17(p.tau2) << "\n";
                out << "k=" << fmt17(p.k) << "\n";
            } else if constexpr (std::is_same_v<T, StudentTPrior>) {
                out << "df=" << fmt17(p.df) << "\n";
                out << "scale2=" << fmt17(p.scale2) << "\n";
            } else if constexpr (std::is_same_v<T, MixturePrior>) {
                out << "p0=" << fmt17(p.w_zero) << "\n";
                out << "pG=" << fmt17(p.w_gauss) << "\n";
                out << "pL=" << fmt17(p.w_laplace) << "\n";
                out << "tau2=" << fmt17(p.tau2) << "\n";
                out << "nu2=" << fmt17(p.nu2) << "\n";
            }
        },
        prior);
    return out.str();
}

PriorModel prior_from_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("prior kv line " + std::to_string(line_no) + ": missing '='");
        }
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto need = [&](const char* key) -> double {
        auto it = kv.find(key);
        if (it == kv.end()) {
            throw std::invalid_argument(std::string("prior kv: missing key '") + key + "'");
        }
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) {
            throw std::invalid_argument(std::string("prior kv: bad number for '") + key + "'");
        }
        return v;
    };
    const auto kind_it = kv.find("kind");
    if (kind_it == kv.end()) throw std::invalid_argument("prior kv: missing 'kind'");
    const std::string& kind = kind_it->second;

    PriorModel prior;
    if (kind == "zero") {
        prior = ZeroPrior{};
    } else if (kind == "gaussian") {
        prior = GaussianPrior{need("tau2")};
    } else if (kind == "laplace") {
        prior = LaplacePrior{need("nu2")};
    } else if (kind == "huber") {
        prior = HuberPrior{need("tau2"), need("k")};
    } else if (kind == "student_t") {
        prior = StudentTPrior{need("df"), need("scale2")};
    } else if (kind == "mixture") {
        prior = MixturePrior{need("p0"), need("pG"), need("pL"), need("tau2"), need("nu2")};
    } else {
        throw std::invalid_argument("prior kv: unknown kind '" + kind + "'");
    }
    validate(prior);
    return prior;
}

}  // namespace abshrink
