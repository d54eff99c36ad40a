#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dthp/kernel.hpp"

namespace dthp {

enum class Target { process, compensator };
enum class ExperimentKind { lln, clt };

[[nodiscard]] std::string to_string(Target target);
[[nodiscard]] Target target_from_string(const std::string& name);

// Phi(x), standard normal CDF, evaluated through erfc (absolute error at the
// rounding level, far below the 1e-7 the downstream checks need).
[[nodiscard]] double normal_cdf(double x);

// Kolmogorov-Smirnov distance between the sample and a centered normal with
// the given variance. Requires variance > 0 and a nonempty sample.
[[nodiscard]] double ks_distance_to_normal(std::vector<double> samples, double variance);

// Replicate experiment summary. checks is the pass/fail map actually gating
// the experiment; extra diagnostics (mean_abs_deviation,
// fraction_within_band) are reported but not part of the JSON payload.
struct LimitReport {
    Target target = Target::process;
    ExperimentKind kind = ExperimentKind::lln;
    std::size_t n = 0;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    double empirical_mean = 0.0;
    double theoretical_mean = 0.0;
    double empirical_var = 0.0;
    double theoretical_var = 0.0;
    double ks_statistic = 0.0;
    double mean_abs_deviation = 0.0;
    double fraction_within_band = 0.0;
    std::map<std::string, bool> checks;

    [[nodiscard]] bool pass() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

// Averages X_n/n over replicates (X = count or compensator). Gate:
// |empirical mean - mu| <= 4 sqrt(theoretical_var / (n R)) + 1e-9.
[[nodiscard]] LimitReport lln_experiment(const Kernel& kernel, std::size_t n,
                                         std::size_t replicates, std::uint64_t seed, Target target,
                                         unsigned workers = 1);

// Standardizes (X_n - n mu)/sqrt(n) over replicates and checks mean, variance
// (within 10% relative), and KS distance (<= 1.95/sqrt(R) + 0.01) against the
// limiting normal. Requires replicates >= 100.
[[nodiscard]] LimitReport clt_experiment(const Kernel& kernel, std::size_t n,
                                         std::size_t replicates, std::uint64_t seed, Target target,
                                         unsigned workers = 1);

// Standardized terminal values (X_n - n mu)/sqrt(n), one per replicate; the
// sample behind clt_experiment, exposed for export.
[[nodiscard]] std::vector<double> standardized_terminals(const Kernel& kernel, std::size_t n,
                                                         std::size_t replicates,
                                                         std::uint64_t seed, Target target,
                                                         unsigned workers = 1);

// Scans R paths of length n and tracks the remaining-influence statistic:
// violations counts steps where zeta < 0 or zeta > first_moment (exact
// comparisons, no tolerance).
struct BoundScan {
    std::size_t n = 0;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    double max_zeta = 0.0;
    double bound = 0.0;
    std::uint64_t violations = 0;
    double mean_zeta_over_sqrt_n = 0.0;

    [[nodiscard]] nlohmann::json to_json() const;
};

[[nodiscard]] BoundScan zeta_bound_check(const Kernel& kernel, std::size_t n,
                                         std::size_t replicates, std::uint64_t seed,
                                         unsigned workers = 1);

// Mean of M_n across replicates against the 4 sqrt(n/R) band, plus the
// worst-case |M_n|/n as an o(n) diagnostic.
struct MartingaleScan {
    std::size_t n = 0;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    double mean_terminal = 0.0;
    double band = 0.0;
    double max_abs_over_n = 0.0;
    bool pass = false;

    [[nodiscard]] nlohmann::json to_json() const;
};

[[nodiscard]] MartingaleScan martingale_check(const Kernel& kernel, std::size_t n,
                                              std::size_t replicates, std::uint64_t seed,
                                              unsigned workers = 1);

// Single-trajectory strong-law proxy: max over i in [n/2, n] of |H_i/i - mu|
// against 8 sigma / sqrt(n/2). The path uses derive_seed(seed, 0), i.e.
// replicate 0 of the same master seed.
struct TrajectoryScan {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double max_abs_deviation = 0.0;
    double bound = 0.0;
    bool pass = false;

    [[nodiscard]] nlohmann::json to_json() const;
};

[[nodiscard]] TrajectoryScan slln_trajectory_check(const Kernel& kernel, std::size_t n,
                                                   std::uint64_t seed);

}  // namespace dthp
