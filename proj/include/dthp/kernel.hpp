#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace dthp {

enum class KernelFamily { finite, geometric };

[[nodiscard]] std::string to_string(KernelFamily family);
[[nodiscard]] KernelFamily kernel_family_from_string(const std::string& name);

// Excitation kernel: baseline beta0 plus nonnegative lag weights beta_1, beta_2, ...
// Two families: finite support (weights given explicitly, beta_i = 0 past the last
// lag) and geometric decay (beta_i = scale * ratio^(i-1), ratio in (0,1)).
//
// Construction validates structure only (baseline in (0,1), weights >= 0,
// scale > 0, ratio in (0,1)). Summability of total mass below 1 is NOT enforced
// here so that failing kernels can still be loaded and diagnosed; operations that
// require it (simulation, limit constants) check stable() themselves.
class Kernel {
  public:
    [[nodiscard]] static Kernel finite(double beta0, std::vector<double> weights);
    [[nodiscard]] static Kernel geometric(double beta0, double scale, double ratio);

    [[nodiscard]] KernelFamily family() const noexcept { return family_; }
    [[nodiscard]] double baseline() const noexcept { return beta0_; }

    // Finite family only; empty for memory zero.
    [[nodiscard]] const std::vector<double>& weights() const;
    // Geometric family only.
    [[nodiscard]] double scale() const;
    [[nodiscard]] double ratio() const;

    // Number of lags with (structurally) nonzero weight; SIZE_MAX for geometric.
    [[nodiscard]] std::size_t memory() const noexcept;
    [[nodiscard]] bool has_finite_memory() const noexcept { return family_ == KernelFamily::finite; }

    // Lag weight beta_i; beta(0) returns the baseline.
    [[nodiscard]] double beta(std::size_t i) const;

    // sum_{j >= n} beta_j for n >= 1. Non-increasing in n; tail_sum(1) equals
    // branching_ratio(). Finite family uses precomputed suffix sums, geometric
    // the closed form scale * ratio^(n-1) / (1 - ratio).
    [[nodiscard]] double tail_sum(std::size_t n) const;

    // sum_{i=1..k} beta_i (head of the lag weights; k = 0 gives 0).
    [[nodiscard]] double head_sum(std::size_t k) const;

    // B = sum_{i>=1} beta_i.
    [[nodiscard]] double branching_ratio() const noexcept { return branching_; }
    // S = sum_{i>=1} i * beta_i. Finite for both families by construction.
    [[nodiscard]] double first_moment() const noexcept { return first_moment_; }
    [[nodiscard]] double total_mass() const noexcept { return beta0_ + branching_; }
    [[nodiscard]] bool stable() const noexcept { return total_mass() < 1.0; }

    // Finite kernel keeping lags 1..m only (beta0 unchanged). For a finite
    // kernel with memory <= m this is an identical copy.
    [[nodiscard]] Kernel truncated(std::size_t m) const;

    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] static Kernel from_json(const nlohmann::json& j);

  private:
    Kernel() = default;

    KernelFamily family_ = KernelFamily::finite;
    double beta0_ = 0.0;
    std::vector<double> weights_;      // finite
    std::vector<double> suffix_sums_;  // finite: suffix_sums_[k] = sum_{j>k} weights, k in [0, m]
    std::vector<double> prefix_sums_;  // finite: prefix_sums_[k] = sum_{j<=k} weights, k in [0, m]
    double scale_ = 0.0;               // geometric
    double ratio_ = 0.0;               // geometric
    double branching_ = 0.0;
    double first_moment_ = 0.0;
};

struct LimitConstants {
    double mean;                  // mu = beta0 / (1 - B)
    double variance;              // sigma^2 = mu (1 - mu) / (1 - B)^2
    double compensator_variance;  // B^2 sigma^2
};

// Requires stable(); throws std::domain_error otherwise.
[[nodiscard]] LimitConstants limit_constants(const Kernel& kernel);

struct AssumptionReport {
    bool mass_below_one;        // beta0 + B < 1
    bool finite_first_moment;   // S < inf (structural for both families)
    bool baseline_positive;     // beta0 > 0
    bool weights_nonnegative;   // structural
    double total_mass;
    double branching_ratio;
    double first_moment;
    // max over the diagnostic grid n = 1..64 of sqrt(n) * tail_sum(n); a bounded
    // value is implied by S < inf, reported as a numeric diagnostic.
    double max_sqrt_n_tail;
    [[nodiscard]] bool all_pass() const {
        return mass_below_one && finite_first_moment && baseline_positive && weights_nonnegative;
    }
    [[nodiscard]] nlohmann::json to_json() const;
};

[[nodiscard]] AssumptionReport check_assumptions(const Kernel& kernel);

}  // namespace dthp
