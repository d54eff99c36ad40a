#include "dthp/kernel.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace dthp {

std::string to_string(KernelFamily family) {
    return family == KernelFamily::finite ? "finite" : "geometric";
}

KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "finite") return KernelFamily::finite;
    if (name == "geometric") return KernelFamily::geometric;
    throw std::invalid_argument("unknown kernel family: " + name);
}

namespace {

void check_baseline(double beta0) {
    if (!(beta0 > 0.0 && beta0 < 1.0)) {
        throw std::invalid_argument("baseline must lie in (0,1)");
    }
}

}  // namespace

Kernel Kernel::finite(double beta0, std::vector<double> weights) {
    check_baseline(beta0);
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("finite kernel weights must be nonnegative");
        }
    }
    Kernel k;
    k.family_ = KernelFamily::finite;
    k.beta0_ = beta0;
    k.weights_ = std::move(weights);
    const std::size_t m = k.weights_.size();
    // suffix_sums_[d] = sum of weights with lag > d; fixed tail-to-head order.
    k.suffix_sums_.assign(m + 1, 0.0);
    for (std::size_t d = m; d-- > 0;) {
        k.suffix_sums_[d] = k.suffix_sums_[d + 1] + k.weights_[d];
    }
    k.prefix_sums_.assign(m + 1, 0.0);
    for (std::size_t i = 1; i <= m; ++i) {
        k.prefix_sums_[i] = k.prefix_sums_[i - 1] + k.weights_[i - 1];
    }
    k.branching_ = k.suffix_sums_.empty() ? 0.0 : k.suffix_sums_[0];
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += static_cast<double>(i + 1) * k.weights_[i];
    k.first_moment_ = s;
    return k;
}

Kernel Kernel::geometric(double beta0, double scale, double ratio) {
    check_baseline(beta0);
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw std::invalid_argument("geometric kernel scale must be positive");
    }
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw std::invalid_argument("geometric kernel ratio must lie in (0,1)");
    }
    Kernel k;
    k.family_ = KernelFamily::geometric;
    k.beta0_ = beta0;
    k.scale_ = scale;
    k.ratio_ = ratio;
    k.branching_ = scale / (1.0 - ratio);
    k.first_moment_ = scale / ((1.0 - ratio) * (1.0 - ratio));
    return k;
}

const std::vector<double>& Kernel::weights() const {
    if (family_ != KernelFamily::finite) {
        throw std::logic_error("weights() requires the finite family");
    }
    return weights_;
}

double Kernel::scale() const {
    if (family_ != KernelFamily::geometric) {
        throw std::logic_error("scale() requires the geometric family");
    }
    return scale_;
}

double Kernel::ratio() const {
    if (family_ != KernelFamily::geometric) {
        throw std::logic_error("ratio() requires the geometric family");
    }
    return ratio_;
}

std::size_t Kernel::memory() const noexcept {
    return family_ == KernelFamily::finite ? weights_.size()
                                           : std::numeric_limits<std::size_t>::max();
}

double Kernel::beta(std::size_t i) const {
    if (i == 0) return beta0_;
    if (family_ == KernelFamily::finite) {
        return i <= weights_.size() ? weights_[i - 1] : 0.0;
    }
    return scale_ * std::pow(ratio_, static_cast<double>(i - 1));
}

double Kernel::tail_sum(std::size_t n) const {
    if (n == 0) throw std::invalid_argument("tail_sum requires n >= 1");
    if (family_ == KernelFamily::finite) {
        const std::size_t d = n - 1;
        return d < suffix_sums_.size() ? suffix_sums_[d] : 0.0;
    }
    return scale_ * std::pow(ratio_, static_cast<double>(n - 1)) / (1.0 - ratio_);
}

double Kernel::head_sum(std::size_t k) const {
    if (family_ == KernelFamily::finite) {
        return prefix_sums_[std::min(k, weights_.size())];
    }
    // scale * (1 - ratio^k) / (1 - ratio)
    return scale_ * (1.0 - std::pow(ratio_, static_cast<double>(k))) / (1.0 - ratio_);
}

Kernel Kernel::truncated(std::size_t m) const {
    std::vector<double> w(m, 0.0);
    for (std::size_t i = 1; i <= m; ++i) w[i - 1] = beta(i);
    return Kernel::finite(beta0_, std::move(w));
}

nlohmann::json Kernel::to_json() const {
    nlohmann::json j;
    j["beta0"] = beta0_;
    j["family"] = to_string(family_);
    if (family_ == KernelFamily::finite) {
        j["weights"] = weights_;
        j["scale"] = nullptr;
        j["ratio"] = nullptr;
    } else {
        j["weights"] = nullptr;
        j["scale"] = scale_;
        j["ratio"] = ratio_;
    }
    return j;
}

Kernel Kernel::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("kernel JSON must be an object");
    for (const char* key : {"beta0", "family"}) {
        if (!j.contains(key)) {
            throw std::invalid_argument(std::string("kernel JSON missing key: ") + key);
        }
    }
    const double beta0 = j.at("beta0").get<double>();
    const KernelFamily family = kernel_family_from_string(j.at("family").get<std::string>());
    if (family == KernelFamily::finite) {
        std::vector<double> w;
        if (j.contains("weights") && !j.at("weights").is_null()) {
            w = j.at("weights").get<std::vector<double>>();
        }
        return Kernel::finite(beta0, std::move(w));
    }
    if (!j.contains("scale") || !j.contains("ratio") || j.at("scale").is_null() ||
        j.at("ratio").is_null()) {
        throw std::invalid_argument("geometric kernel JSON requires scale and ratio");
    }
    return Kernel::geometric(beta0, j.at("scale").get<double>(), j.at("ratio").get<double>());
}

LimitConstants limit_constants(const Kernel& kernel) {
    if (!kernel.stable()) {
        throw std::domain_error("limit constants require total mass below one");
    }
    const double b = kernel.branching_ratio();
    const double mu = kernel.baseline() / (1.0 - b);
    const double sigma2 = mu * (1.0 - mu) / ((1.0 - b) * (1.0 - b));
    return LimitConstants{mu, sigma2, b * b * sigma2};
}

AssumptionReport check_assumptions(const Kernel& kernel) {
    AssumptionReport r{};
    r.total_mass = kernel.total_mass();
    r.branching_ratio = kernel.branching_ratio();
    r.first_moment = kernel.first_moment();
    r.mass_below_one = r.total_mass < 1.0;
    r.finite_first_moment = std::isfinite(r.first_moment);
    r.baseline_positive = kernel.baseline() > 0.0;
    r.weights_nonnegative = true;  // enforced at construction
    double worst = 0.0;
    for (std::size_t n = 1; n <= 64; ++n) {
        const double v = std::sqrt(static_cast<double>(n)) * kernel.tail_sum(n);
        if (v > worst) worst = v;
    }
    r.max_sqrt_n_tail = worst;
    return r;
}

nlohmann::json AssumptionReport::to_json() const {
    nlohmann::json j;
    j["mass_below_one"] = mass_below_one;
    j["finite_first_moment"] = finite_first_moment;
    j["baseline_positive"] = baseline_positive;
    j["weights_nonnegative"] = weights_nonnegative;
    j["total_mass"] = total_mass;
    j["branching_ratio"] = branching_ratio;
    j["first_moment"] = first_moment;
    j["max_sqrt_n_tail"] = max_sqrt_n_tail;
    j["all_pass"] = all_pass();
    return j;
}

}  // namespace dthp
