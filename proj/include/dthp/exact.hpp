#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dthp/kernel.hpp"

namespace dthp {

inline constexpr std::size_t kEnumerateMaxSteps = 22;
inline constexpr std::size_t kDpMaxMemory = 16;
inline constexpr std::uint64_t kDefaultOpBudget = 250'000'000ULL;

enum class ExactMethod { enumeration, dp, dp_truncated };

[[nodiscard]] std::string to_string(ExactMethod method);

// Distribution of the cumulative count after n steps. pmf has n+1 entries,
// pmf[r] = P(H_n = r), entries nonnegative, sum within 1e-12 of one.
// tv_error_bound is set only for the truncated method: total-variation distance
// to the untruncated law is at most that value (n * tail_sum(m+1)); when the
// bound reaches 1 it is vacuous and flagged.
struct ExactDistribution {
    std::size_t n = 0;
    std::vector<double> pmf;
    ExactMethod method = ExactMethod::enumeration;
    std::optional<double> tv_error_bound;
    bool tv_bound_vacuous = false;

    [[nodiscard]] double mean() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

// Exhaustive tree walk over all 2^n paths, depth-first with the zero branch
// first, conditional pmfs merged pairwise on the way up. Requires a stable
// kernel and n <= 22.
[[nodiscard]] ExactDistribution enumerate_distribution(const Kernel& kernel, std::size_t n);

// Dynamic program over (last-m-bits, count) states. Finite family only,
// memory <= 16, and n * 2^memory * n transition work within op_budget.
[[nodiscard]] ExactDistribution dp_distribution(const Kernel& kernel, std::size_t n,
                                                std::uint64_t op_budget = kDefaultOpBudget);

// Same DP but capturing the marginal pmf after every step 1..n.
[[nodiscard]] std::vector<ExactDistribution> dp_distributions_upto(
    const Kernel& kernel, std::size_t n, std::uint64_t op_budget = kDefaultOpBudget);

// DP on kernel.truncated(m) plus the total-variation error bound
// n * tail_sum(m+1) of the original kernel.
[[nodiscard]] ExactDistribution dp_truncated(const Kernel& kernel, std::size_t n, std::size_t m,
                                             std::uint64_t op_budget = kDefaultOpBudget);

// E e^{tH} and its log. The log form switches to a log-sum-exp evaluation when
// t * n > 500; exact_mgf throws std::overflow_error when the result would not
// fit a double.
[[nodiscard]] double log_mgf(const ExactDistribution& dist, double t);
[[nodiscard]] double exact_mgf(const ExactDistribution& dist, double t);

// Both sides of the one-step identity
//   E e^{tH_n} = E e^{tH_{n-1}} + (e^t - 1) E( e^{tH_{n-1}} lambda_n ),
// each evaluated by exhaustive enumeration. ok iff the relative gap is within
// 1e-10.
struct RecursionCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_diff = 0.0;
    double rel_diff = 0.0;
    bool ok = false;
};

[[nodiscard]] RecursionCheck verify_recursion(const Kernel& kernel, std::size_t n, double t);

// Probabilities of the all-zeros and all-ones paths:
//   P(H_n = 0) = (1 - beta0)^n
//   P(H_n = n) = prod_{k=1..n} (beta0 + sum_{i=1..k-1} beta_i)
// The step-k factor conditions on the k-1 prior events, so the last factor
// stops at lag k-1.
struct CornerCoefficients {
    double all_zeros = 0.0;
    double all_ones = 0.0;
};

[[nodiscard]] CornerCoefficients corner_coefficients(const Kernel& kernel, std::size_t n);

// E H_n = sum_{i=1..n} E lambda_i via the state-marginal DP. Finite family only.
[[nodiscard]] double expected_count(const Kernel& kernel, std::size_t n,
                                    std::uint64_t op_budget = kDefaultOpBudget);

}  // namespace dthp
