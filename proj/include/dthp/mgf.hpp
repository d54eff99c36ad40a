#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dthp/exact.hpp"
#include "dthp/kernel.hpp"

namespace dthp {

enum class GammaMethod { exact_enum, dp, monte_carlo };
enum class BoundVerdict { ok, fail, inconclusive };

[[nodiscard]] std::string to_string(GammaMethod method);
[[nodiscard]] std::string to_string(BoundVerdict verdict);

// Per-step growth rate Gamma_n(t) = (1/n) log E e^{t H_n}. Exact path routes
// through the count-distribution oracles: the finite-memory DP when the state
// space and operation budget allow it, exhaustive enumeration otherwise
// (n <= 22). Throws std::runtime_error when neither fits the budget.
// Gamma_n(0) is 0 exactly, by definition rather than by arithmetic.
[[nodiscard]] double gamma_exact(const Kernel& kernel, std::size_t n, double t);

struct OracleDistribution {
    ExactDistribution dist;
    GammaMethod method = GammaMethod::dp;
};

[[nodiscard]] OracleDistribution oracle_distribution(const Kernel& kernel, std::size_t n,
                                                     std::uint64_t op_budget = kDefaultOpBudget);

// Monte Carlo estimate of Gamma_n(t) from R simulated terminal counts.
// Evaluated in shifted log space (weights exp(t H_r - max_r t H_r)), so large
// t n cannot overflow. heavy_tail flags t > 0 with weight coefficient of
// variation above 5: the estimate is then dominated by rare paths and the
// standard error is unreliable.
struct McGamma {
    double value = 0.0;
    double se = 0.0;
    bool heavy_tail = false;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
};

struct McParams {
    std::size_t replicates = 20000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

[[nodiscard]] McGamma gamma_mc(const Kernel& kernel, std::size_t n, double t, std::size_t replicates,
                               std::uint64_t seed, unsigned workers = 1);

// Envelope for Gamma_n(t):
//   t > 0:  [ log(1 - beta0 + beta0 e^t), t ]
//   t < 0:  [ log(1 - beta0), (1/n) log(1 - beta0 + beta0 e^t) ]
//   t = 0:  [0, 0]
struct GammaBounds {
    double lower = 0.0;
    double upper = 0.0;
};

[[nodiscard]] GammaBounds gamma_bounds(const Kernel& kernel, std::size_t n, double t);

// Bound check with a tri-state verdict. Exact values use tolerance 1e-10 on
// each side. Monte Carlo values are `ok` only when confidently inside
// (3 standard errors clear of both edges), `fail` only when confidently
// outside, `inconclusive` otherwise; positive t beyond the exact budget is
// always diagnostic-only (inconclusive).
struct BoundCheck {
    std::size_t n = 0;
    double t = 0.0;
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double tolerance = 0.0;
    double se = 0.0;
    GammaMethod method = GammaMethod::dp;
    BoundVerdict verdict = BoundVerdict::inconclusive;
};

[[nodiscard]] BoundCheck check_bounds(const Kernel& kernel, std::size_t n, double t,
                                      const McParams& mc = {});

// Gamma_n(t) for n = 1..n_max at fixed t < 0, with the strict-decrease flag.
// Strictness margin: each step must drop by more than 1e-12. A kernel with no
// self-excitation (B = 0) yields a constant sequence; the note names that
// degenerate case.
struct MonotoneReport {
    double t = 0.0;
    std::vector<double> gamma;
    bool strictly_decreasing = false;
    double last_decrement = 0.0;
    std::string note;
};

[[nodiscard]] MonotoneReport check_monotone(const Kernel& kernel, double t, std::size_t n_max,
                                            std::uint64_t op_budget = kDefaultOpBudget);

// Limit bracket for t < 0: the sequence decreases toward its limit, which also
// stays above log(1 - beta0), so limit in [lower, upper] with
// upper = Gamma_{n_max}(t). gamma_limit reports the best available estimate
// (the horizon value); last_decrement indicates how settled it is.
struct LimitEstimate {
    double t = 0.0;
    double gamma_limit = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double last_decrement = 0.0;
};

[[nodiscard]] LimitEstimate estimate_limit(const Kernel& kernel, double t, std::size_t n_max,
                                           std::uint64_t op_budget = kDefaultOpBudget);

// Grid evaluation: one bound check per (n, t) cell, plus monotonicity and
// limit rows for each negative t. Cells beyond the exact budget fall back to
// Monte Carlo with the given parameters.
struct MgfReport {
    std::vector<std::size_t> n_list;
    std::vector<double> t_grid;
    std::vector<BoundCheck> cells;
    std::vector<MonotoneReport> monotone;
    std::vector<LimitEstimate> limits;

    [[nodiscard]] bool all_cells_ok() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

[[nodiscard]] MgfReport mgf_report(const Kernel& kernel, std::vector<std::size_t> n_list,
                                   std::vector<double> t_grid, const McParams& mc = {},
                                   std::uint64_t op_budget = kDefaultOpBudget);

// Long-format CSV of the cells: n,t,gamma,method,lower,upper,ok
// ('#' config lines first, 17 significant digits, ok column holds the verdict).
void write_mgf_csv(std::ostream& out, const MgfReport& report, const nlohmann::json& config);

}  // namespace dthp
