#include "dthp/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dthp/process.hpp"

namespace dthp {

std::string to_string(ExactMethod method) {
    switch (method) {
        case ExactMethod::enumeration: return "enumerate";
        case ExactMethod::dp: return "dp";
        case ExactMethod::dp_truncated: return "dp_truncated";
    }
    return "unknown";
}

double ExactDistribution::mean() const {
    double m = 0.0;
    for (std::size_t r = 0; r < pmf.size(); ++r) m += static_cast<double>(r) * pmf[r];
    return m;
}

nlohmann::json ExactDistribution::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["pmf"] = pmf;
    j["method"] = to_string(method);
    if (tv_error_bound) {
        j["tv_error_bound"] = *tv_error_bound;
        j["tv_bound_vacuous"] = tv_bound_vacuous;
    } else {
        j["tv_error_bound"] = nullptr;
    }
    return j;
}

namespace {

void require_stable(const Kernel& kernel, const char* what) {
    if (!kernel.stable()) {
        throw std::domain_error(std::string(what) + " requires total kernel mass below one");
    }
}

// Depth-first walk, zero branch first, merging the two children's conditional
// count pmfs pairwise at each node.
struct Enumerator {
    const Kernel& kernel;
    std::vector<std::uint8_t> prefix;

    std::vector<double> walk(std::size_t remaining) {
        if (remaining == 0) return {1.0};
        const std::size_t i = prefix.size() + 1;
        const double lambda = intensity_at(kernel, prefix, i);
        prefix.push_back(0);
        const std::vector<double> zero_branch = walk(remaining - 1);
        prefix.back() = 1;
        const std::vector<double> one_branch = walk(remaining - 1);
        prefix.pop_back();
        std::vector<double> merged(remaining + 1, 0.0);
        merged[0] = (1.0 - lambda) * zero_branch[0];
        for (std::size_t r = 1; r < remaining; ++r) {
            merged[r] = (1.0 - lambda) * zero_branch[r] + lambda * one_branch[r - 1];
        }
        merged[remaining] = lambda * one_branch[remaining - 1];
        return merged;
    }
};

struct DpLayout {
    std::size_t memory = 0;
    std::size_t states = 1;
    std::size_t mask = 0;
};

DpLayout dp_layout(const Kernel& kernel, std::size_t n, std::uint64_t op_budget) {
    if (!kernel.has_finite_memory()) {
        throw std::invalid_argument(
            "dp over bit states needs finite memory; truncate the kernel first");
    }
    const std::size_t m = kernel.memory();
    if (m > kDpMaxMemory) {
        throw std::invalid_argument("dp state space limited to memory <= 16");
    }
    DpLayout layout;
    layout.memory = m;
    layout.states = static_cast<std::size_t>(1) << m;
    layout.mask = layout.states - 1;
    const long double work = static_cast<long double>(n) * static_cast<long double>(n + 1) *
                             static_cast<long double>(layout.states);
    if (work > static_cast<long double>(op_budget)) {
        throw std::runtime_error("dp operation budget exceeded; reduce n or memory");
    }
    return layout;
}

// State encoding: bit d of the state is the outcome at lag d+1 (most recent
// step in bit 0). Intensity per state is precomputed once.
std::vector<double> dp_intensity_table(const Kernel& kernel, const DpLayout& layout) {
    std::vector<double> lambda(layout.states, 0.0);
    const auto& w = kernel.weights();
    for (std::size_t s = 0; s < layout.states; ++s) {
        double v = kernel.baseline();
        for (std::size_t d = 0; d < layout.memory; ++d) {
            if ((s >> d) & 1U) v += w[d];
        }
        lambda[s] = v;
    }
    return lambda;
}

// Core DP over (state, count). `capture` receives the marginal pmf after each
// step when non-null.
ExactDistribution dp_run(const Kernel& kernel, std::size_t n, std::uint64_t op_budget,
                         std::vector<ExactDistribution>* capture) {
    require_stable(kernel, "dp distribution");
    const DpLayout layout = dp_layout(kernel, n, op_budget);
    const std::vector<double> lambda = dp_intensity_table(kernel, layout);
    const std::size_t width = n + 1;
    std::vector<double> cur(layout.states * width, 0.0);
    std::vector<double> nxt(layout.states * width, 0.0);
    cur[0] = 1.0;  // empty history, zero count
    ExactDistribution out;
    for (std::size_t i = 1; i <= n; ++i) {
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (std::size_t s = 0; s < layout.states; ++s) {
            const double lam = lambda[s];
            const std::size_t s_zero = (s << 1) & layout.mask;
            const std::size_t s_one = s_zero | (layout.memory > 0 ? 1 : 0);
            const double* row = cur.data() + s * width;
            double* row_zero = nxt.data() + s_zero * width;
            double* row_one = nxt.data() + s_one * width;
            for (std::size_t r = 0; r < i; ++r) {
                const double p = row[r];
                if (p == 0.0) continue;
                row_zero[r] += p * (1.0 - lam);
                row_one[r + 1] += p * lam;
            }
        }
        cur.swap(nxt);
        if (capture != nullptr || i == n) {
            ExactDistribution d;
            d.n = i;
            d.method = ExactMethod::dp;
            d.pmf.assign(i + 1, 0.0);
            for (std::size_t s = 0; s < layout.states; ++s) {
                const double* row = cur.data() + s * width;
                for (std::size_t r = 0; r <= i; ++r) d.pmf[r] += row[r];
            }
            if (capture != nullptr) capture->push_back(d);
            if (i == n) out = std::move(d);
        }
    }
    if (n == 0) {
        out.n = 0;
        out.method = ExactMethod::dp;
        out.pmf = {1.0};
    }
    return out;
}

}  // namespace

ExactDistribution enumerate_distribution(const Kernel& kernel, std::size_t n) {
    require_stable(kernel, "enumeration");
    if (n > kEnumerateMaxSteps) {
        throw std::invalid_argument("enumeration limited to n <= 22");
    }
    Enumerator e{kernel, {}};
    e.prefix.reserve(n);
    ExactDistribution d;
    d.n = n;
    d.method = ExactMethod::enumeration;
    d.pmf = e.walk(n);
    return d;
}

ExactDistribution dp_distribution(const Kernel& kernel, std::size_t n, std::uint64_t op_budget) {
    return dp_run(kernel, n, op_budget, nullptr);
}

std::vector<ExactDistribution> dp_distributions_upto(const Kernel& kernel, std::size_t n,
                                                     std::uint64_t op_budget) {
    std::vector<ExactDistribution> all;
    all.reserve(n);
    dp_run(kernel, n, op_budget, &all);
    return all;
}

ExactDistribution dp_truncated(const Kernel& kernel, std::size_t n, std::size_t m,
                               std::uint64_t op_budget) {
    const Kernel trunc = kernel.truncated(m);
    ExactDistribution d = dp_run(trunc, n, op_budget, nullptr);
    d.method = ExactMethod::dp_truncated;
    const double bound = static_cast<double>(n) * kernel.tail_sum(m + 1);
    d.tv_error_bound = bound;
    d.tv_bound_vacuous = bound >= 1.0;
    return d;
}

double log_mgf(const ExactDistribution& dist, double t) {
    const std::size_t n = dist.n;
    if (t * static_cast<double>(n) <= 500.0) {
        double sum = 0.0;
        for (std::size_t r = 0; r < dist.pmf.size(); ++r) {
            sum += dist.pmf[r] * std::exp(t * static_cast<double>(r));
        }
        return std::log(sum);
    }
    // log-sum-exp over log pmf[r] + t r
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < dist.pmf.size(); ++r) {
        if (dist.pmf[r] <= 0.0) continue;
        peak = std::max(peak, std::log(dist.pmf[r]) + t * static_cast<double>(r));
    }
    double sum = 0.0;
    for (std::size_t r = 0; r < dist.pmf.size(); ++r) {
        if (dist.pmf[r] <= 0.0) continue;
        sum += std::exp(std::log(dist.pmf[r]) + t * static_cast<double>(r) - peak);
    }
    return peak + std::log(sum);
}

double exact_mgf(const ExactDistribution& dist, double t) {
    const double lm = log_mgf(dist, t);
    if (lm > 709.0) {
        throw std::overflow_error("moment generating function exceeds double range");
    }
    if (t * static_cast<double>(dist.n) <= 500.0) {
        // direct sum, not exp(log(sum)), to keep full precision
        double sum = 0.0;
        for (std::size_t r = 0; r < dist.pmf.size(); ++r) {
            sum += dist.pmf[r] * std::exp(t * static_cast<double>(r));
        }
        return sum;
    }
    return std::exp(lm);
}

RecursionCheck verify_recursion(const Kernel& kernel, std::size_t n, double t) {
    require_stable(kernel, "recursion check");
    if (n == 0 || n > kEnumerateMaxSteps) {
        throw std::invalid_argument("recursion check needs 1 <= n <= 22");
    }
    const double lhs = exact_mgf(enumerate_distribution(kernel, n), t);
    const double prev = n == 1 ? 1.0 : exact_mgf(enumerate_distribution(kernel, n - 1), t);

    // E( e^{t H_{n-1}} lambda_n ): walk every length-(n-1) path, tracking its
    // chain-rule probability with the same intensities the enumerator uses.
    double weighted = 0.0;
    std::vector<std::uint8_t> prefix;
    prefix.reserve(n);
    const auto visit = [&](auto&& self, double prob, std::int64_t count) -> void {
        const std::size_t i = prefix.size() + 1;
        if (prefix.size() == n - 1) {
            weighted += prob * std::exp(t * static_cast<double>(count)) *
                        intensity_at(kernel, prefix, i);
            return;
        }
        const double lambda = intensity_at(kernel, prefix, i);
        prefix.push_back(0);
        self(self, prob * (1.0 - lambda), count);
        prefix.back() = 1;
        self(self, prob * lambda, count + 1);
        prefix.pop_back();
    };
    visit(visit, 1.0, 0);

    RecursionCheck c;
    c.lhs = lhs;
    c.rhs = prev + std::expm1(t) * weighted;
    c.abs_diff = std::fabs(c.lhs - c.rhs);
    c.rel_diff = c.abs_diff / std::max(1.0, std::fabs(c.lhs));
    c.ok = c.rel_diff <= 1e-10;
    return c;
}

CornerCoefficients corner_coefficients(const Kernel& kernel, std::size_t n) {
    require_stable(kernel, "corner coefficients");
    CornerCoefficients c;
    c.all_zeros = std::pow(1.0 - kernel.baseline(), static_cast<double>(n));
    double prod = 1.0;
    for (std::size_t k = 1; k <= n; ++k) {
        prod *= kernel.baseline() + kernel.head_sum(k - 1);
    }
    c.all_ones = prod;
    return c;
}

double expected_count(const Kernel& kernel, std::size_t n, std::uint64_t op_budget) {
    require_stable(kernel, "expected count");
    const DpLayout layout = dp_layout(kernel, n, op_budget);
    const std::vector<double> lambda = dp_intensity_table(kernel, layout);
    std::vector<double> marginal(layout.states, 0.0);
    std::vector<double> next(layout.states, 0.0);
    marginal[0] = 1.0;
    double total = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t s = 0; s < layout.states; ++s) {
            const double p = marginal[s];
            if (p == 0.0) continue;
            const double lam = lambda[s];
            total += p * lam;
            const std::size_t s_zero = (s << 1) & layout.mask;
            const std::size_t s_one = s_zero | (layout.memory > 0 ? 1 : 0);
            next[s_zero] += p * (1.0 - lam);
            next[s_one] += p * lam;
        }
        marginal.swap(next);
    }
    return total;
}

}  // namespace dthp
