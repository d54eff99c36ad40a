#include "dthp/mgf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "dthp/process.hpp"

namespace dthp {

std::string to_string(GammaMethod method) {
    switch (method) {
        case GammaMethod::exact_enum: return "exact";
        case GammaMethod::dp: return "dp";
        case GammaMethod::monte_carlo: return "monte_carlo";
    }
    return "unknown";
}

std::string to_string(BoundVerdict verdict) {
    switch (verdict) {
        case BoundVerdict::ok: return "ok";
        case BoundVerdict::fail: return "fail";
        case BoundVerdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

namespace {

bool dp_fits(const Kernel& kernel, std::size_t n, std::uint64_t op_budget) {
    if (!kernel.has_finite_memory() || kernel.memory() > kDpMaxMemory) return false;
    const long double work = static_cast<long double>(n) * static_cast<long double>(n + 1) *
                             static_cast<long double>(static_cast<std::size_t>(1) << kernel.memory());
    return work <= static_cast<long double>(op_budget);
}

}  // namespace

OracleDistribution oracle_distribution(const Kernel& kernel, std::size_t n,
                                       std::uint64_t op_budget) {
    if (dp_fits(kernel, n, op_budget)) {
        return {dp_distribution(kernel, n, op_budget), GammaMethod::dp};
    }
    if (n <= kEnumerateMaxSteps) {
        return {enumerate_distribution(kernel, n), GammaMethod::exact_enum};
    }
    throw std::runtime_error("exact growth rate out of budget; use the Monte Carlo estimate");
}

double gamma_exact(const Kernel& kernel, std::size_t n, double t) {
    if (n == 0) throw std::invalid_argument("growth rate needs n >= 1");
    if (t == 0.0) return 0.0;
    const OracleDistribution oracle = oracle_distribution(kernel, n);
    return log_mgf(oracle.dist, t) / static_cast<double>(n);
}

McGamma gamma_mc(const Kernel& kernel, std::size_t n, double t, std::size_t replicates,
                 std::uint64_t seed, unsigned workers) {
    if (n == 0 || replicates < 2) {
        throw std::invalid_argument("monte carlo growth rate needs n >= 1 and R >= 2");
    }
    McGamma result;
    result.replicates = replicates;
    result.seed = seed;
    if (t == 0.0) return result;

    const auto terminals = replicate_terminals(kernel, n, replicates, seed, workers);
    double peak = -std::numeric_limits<double>::infinity();
    for (const auto& term : terminals) {
        peak = std::max(peak, t * static_cast<double>(term.count));
    }
    double sum = 0.0;
    for (const auto& term : terminals) {
        sum += std::exp(t * static_cast<double>(term.count) - peak);
    }
    const double r_count = static_cast<double>(replicates);
    const double mean_w = sum / r_count;
    double ss = 0.0;
    for (const auto& term : terminals) {
        const double w = std::exp(t * static_cast<double>(term.count) - peak);
        ss += (w - mean_w) * (w - mean_w);
    }
    const double sd_w = std::sqrt(ss / (r_count - 1.0));
    result.value = (peak + std::log(mean_w)) / static_cast<double>(n);
    result.se = sd_w / (std::sqrt(r_count) * mean_w) / static_cast<double>(n);
    result.heavy_tail = t > 0.0 && sd_w > 5.0 * mean_w;
    return result;
}

GammaBounds gamma_bounds(const Kernel& kernel, std::size_t n, double t) {
    if (n == 0) throw std::invalid_argument("bounds need n >= 1");
    const double b0 = kernel.baseline();
    // log(1 - b0 + b0 e^t) = log1p(b0 (e^t - 1)), stable for both signs of t
    const double mixed = std::log1p(b0 * std::expm1(t));
    if (t > 0.0) return {mixed, t};
    if (t < 0.0) return {std::log1p(-b0), mixed / static_cast<double>(n)};
    return {0.0, 0.0};
}

BoundCheck check_bounds(const Kernel& kernel, std::size_t n, double t, const McParams& mc) {
    BoundCheck check;
    check.n = n;
    check.t = t;
    const GammaBounds bounds = gamma_bounds(kernel, n, t);
    check.lower = bounds.lower;
    check.upper = bounds.upper;

    bool exact = true;
    try {
        const OracleDistribution oracle = oracle_distribution(kernel, n);
        check.method = oracle.method;
        check.value = t == 0.0 ? 0.0 : log_mgf(oracle.dist, t) / static_cast<double>(n);
    } catch (const std::runtime_error&) {
        exact = false;
        const McGamma est = gamma_mc(kernel, n, t, mc.replicates, mc.seed, mc.workers);
        check.method = GammaMethod::monte_carlo;
        check.value = est.value;
        check.se = est.se;
        if (est.heavy_tail) {
            check.tolerance = 3.0 * est.se;
            check.verdict = BoundVerdict::inconclusive;
            return check;
        }
    }

    constexpr double kExactTol = 1e-10;
    if (exact) {
        check.tolerance = kExactTol;
        check.verdict = (check.value >= check.lower - kExactTol &&
                         check.value <= check.upper + kExactTol)
                            ? BoundVerdict::ok
                            : BoundVerdict::fail;
        return check;
    }

    const double noise = 3.0 * check.se;
    check.tolerance = std::max(kExactTol, noise);
    if (t > 0.0) {
        // heavy upper tail of e^{tH}: never assert from samples alone
        check.verdict = BoundVerdict::inconclusive;
        return check;
    }
    if (check.value >= check.lower + noise && check.value <= check.upper - noise) {
        check.verdict = BoundVerdict::ok;
    } else if (check.value < check.lower - noise - kExactTol ||
               check.value > check.upper + noise + kExactTol) {
        check.verdict = BoundVerdict::fail;
    } else {
        check.verdict = BoundVerdict::inconclusive;
    }
    return check;
}

namespace {

// Gamma_n(t) for n = 1..n_max through the cheapest exact oracle: one DP sweep
// capturing every horizon when the state space allows, otherwise per-n
// enumeration.
std::vector<double> gamma_sequence(const Kernel& kernel, double t, std::size_t n_max,
                                   std::uint64_t op_budget) {
    std::vector<double> gamma(n_max, 0.0);
    if (dp_fits(kernel, n_max, op_budget)) {
        const auto dists = dp_distributions_upto(kernel, n_max, op_budget);
        for (std::size_t i = 0; i < n_max; ++i) {
            gamma[i] = log_mgf(dists[i], t) / static_cast<double>(i + 1);
        }
        return gamma;
    }
    if (n_max > kEnumerateMaxSteps) {
        throw std::runtime_error("growth-rate sequence out of exact budget");
    }
    for (std::size_t i = 0; i < n_max; ++i) {
        gamma[i] = log_mgf(enumerate_distribution(kernel, i + 1), t) / static_cast<double>(i + 1);
    }
    return gamma;
}

constexpr double kStrictnessMargin = 1e-12;

}  // namespace

MonotoneReport check_monotone(const Kernel& kernel, double t, std::size_t n_max,
                              std::uint64_t op_budget) {
    if (!(t < 0.0)) throw std::invalid_argument("monotone check applies to t < 0");
    if (n_max < 2) throw std::invalid_argument("monotone check needs n_max >= 2");
    MonotoneReport report;
    report.t = t;
    report.gamma = gamma_sequence(kernel, t, n_max, op_budget);
    bool strict = true;
    for (std::size_t i = 1; i < report.gamma.size(); ++i) {
        if (!(report.gamma[i - 1] - report.gamma[i] > kStrictnessMargin)) strict = false;
    }
    report.strictly_decreasing = strict;
    report.last_decrement = report.gamma[n_max - 2] - report.gamma[n_max - 1];
    if (kernel.branching_ratio() == 0.0) {
        report.note = "constant sequence: all lag weights are zero, so every step is independent";
    }
    return report;
}

LimitEstimate estimate_limit(const Kernel& kernel, double t, std::size_t n_max,
                             std::uint64_t op_budget) {
    const MonotoneReport mono = check_monotone(kernel, t, n_max, op_budget);
    LimitEstimate est;
    est.t = t;
    est.gamma_limit = mono.gamma.back();
    est.lower = std::log1p(-kernel.baseline());
    est.upper = mono.gamma.back();
    est.last_decrement = mono.last_decrement;
    return est;
}

bool MgfReport::all_cells_ok() const {
    for (const auto& cell : cells) {
        if (cell.verdict != BoundVerdict::ok) return false;
    }
    return true;
}

nlohmann::json MgfReport::to_json() const {
    nlohmann::json j;
    j["n_list"] = n_list;
    j["t_grid"] = t_grid;
    j["cells"] = nlohmann::json::array();
    for (const auto& cell : cells) {
        nlohmann::json c;
        c["n"] = cell.n;
        c["t"] = cell.t;
        c["gamma"] = cell.value;
        c["method"] = to_string(cell.method);
        c["lower"] = cell.lower;
        c["upper"] = cell.upper;
        c["ok"] = to_string(cell.verdict);
        if (cell.method == GammaMethod::monte_carlo) {
            c["se"] = cell.se;
        } else {
            c["se"] = nullptr;
        }
        j["cells"].push_back(std::move(c));
    }
    j["monotone"] = nlohmann::json::array();
    for (const auto& mono : monotone) {
        nlohmann::json m;
        m["t"] = mono.t;
        m["gamma"] = mono.gamma;
        m["strictly_decreasing"] = mono.strictly_decreasing;
        m["last_decrement"] = mono.last_decrement;
        m["note"] = mono.note;
        j["monotone"].push_back(std::move(m));
    }
    j["limits"] = nlohmann::json::array();
    for (const auto& lim : limits) {
        nlohmann::json l;
        l["t"] = lim.t;
        l["gamma_limit"] = lim.gamma_limit;
        l["lower"] = lim.lower;
        l["upper"] = lim.upper;
        l["last_decrement"] = lim.last_decrement;
        j["limits"].push_back(std::move(l));
    }
    return j;
}

MgfReport mgf_report(const Kernel& kernel, std::vector<std::size_t> n_list,
                     std::vector<double> t_grid, const McParams& mc, std::uint64_t op_budget) {
    if (n_list.empty() || t_grid.empty()) {
        throw std::invalid_argument("grid evaluation needs nonempty n and t lists");
    }
    MgfReport report;
    report.n_list = std::move(n_list);
    report.t_grid = std::move(t_grid);

    for (std::size_t n : report.n_list) {
        // one oracle distribution per n, shared across the whole t row
        bool have_exact = true;
        OracleDistribution oracle;
        try {
            oracle = oracle_distribution(kernel, n, op_budget);
        } catch (const std::runtime_error&) {
            have_exact = false;
        }
        for (double t : report.t_grid) {
            if (have_exact) {
                BoundCheck cell;
                cell.n = n;
                cell.t = t;
                const GammaBounds bounds = gamma_bounds(kernel, n, t);
                cell.lower = bounds.lower;
                cell.upper = bounds.upper;
                cell.method = oracle.method;
                cell.value = t == 0.0 ? 0.0 : log_mgf(oracle.dist, t) / static_cast<double>(n);
                cell.tolerance = 1e-10;
                cell.verdict = (cell.value >= cell.lower - cell.tolerance &&
                                cell.value <= cell.upper + cell.tolerance)
                                   ? BoundVerdict::ok
                                   : BoundVerdict::fail;
                report.cells.push_back(cell);
            } else {
                report.cells.push_back(check_bounds(kernel, n, t, mc));
            }
        }
    }

    std::size_t exact_horizon = 0;
    for (std::size_t n : report.n_list) {
        const bool feasible = dp_fits(kernel, n, op_budget) || n <= kEnumerateMaxSteps;
        if (feasible && n > exact_horizon) exact_horizon = n;
    }
    if (exact_horizon >= 2) {
        for (double t : report.t_grid) {
            if (t >= 0.0) continue;
            report.monotone.push_back(check_monotone(kernel, t, exact_horizon, op_budget));
            report.limits.push_back(estimate_limit(kernel, t, exact_horizon, op_budget));
        }
    }
    return report;
}

void write_mgf_csv(std::ostream& out, const MgfReport& report, const nlohmann::json& config) {
    out << "# config: " << config.dump() << "\n";
    out << "n,t,gamma,method,lower,upper,ok\n";
    char buf[192];
    for (const auto& cell : report.cells) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%s,%.17g,%.17g,%s\n", cell.n, cell.t,
                      cell.value, to_string(cell.method).c_str(), cell.lower, cell.upper,
                      to_string(cell.verdict).c_str());
        out << buf;
    }
}

}  // namespace dthp
