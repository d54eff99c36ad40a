// Acceptance gate: eleven checks, one [PASS]/[FAIL] line each, exit 0 only
// when every check passes. argv[1] is the path to the command-line binary,
// exercised by the reproducibility check.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dthp/estimate.hpp"
#include "dthp/exact.hpp"
#include "dthp/kernel.hpp"
#include "dthp/limit_experiments.hpp"
#include "dthp/mgf.hpp"
#include "dthp/process.hpp"
#include "dthp/rng.hpp"

namespace {

using dthp::Kernel;

Kernel k0() { return Kernel::finite(0.4, {}); }
Kernel k1() { return Kernel::finite(0.3, {0.2}); }
Kernel k2() { return Kernel::geometric(0.2, 0.1, 0.5); }
Kernel k3() { return Kernel::finite(0.2, {0.15, 0.1, 0.05}); }

struct Harness {
    int failures = 0;
    int index = 0;

    void run(const std::string& name, double budget_seconds,
             const std::function<std::string()>& body) {
        ++index;
        const auto start = std::chrono::steady_clock::now();
        std::string reason;
        try {
            reason = body();
        } catch (const std::exception& e) {
            reason = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (reason.empty() && budget_seconds > 0.0 && elapsed > budget_seconds) {
            std::ostringstream os;
            os << "runtime " << elapsed << "s exceeds the " << budget_seconds << "s budget";
            reason = os.str();
        }
        if (reason.empty()) {
            std::printf("[PASS] %2d %-58s %7.2fs\n", index, name.c_str(), elapsed);
        } else {
            std::printf("[FAIL] %2d %-58s %7.2fs  %s\n", index, name.c_str(), elapsed,
                        reason.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// 1. Enumeration and the dynamic program agree entrywise within 1e-12 for
//    n = 1..18 on the memoryless, one-lag, and three-lag kernels.
std::string check_exact_oracles() {
    for (const Kernel& k : {k0(), k1(), k3()}) {
        for (std::size_t n = 1; n <= 18; ++n) {
            const auto a = dthp::enumerate_distribution(k, n);
            const auto b = dthp::dp_distribution(k, n);
            for (std::size_t r = 0; r <= n; ++r) {
                if (std::fabs(a.pmf[r] - b.pmf[r]) > 1e-12) {
                    return "pmf mismatch at n=" + std::to_string(n) + " r=" + std::to_string(r) +
                           ": " + fmt(a.pmf[r]) + " vs " + fmt(b.pmf[r]);
                }
            }
        }
    }
    return {};
}

// 2. One-step identity of the moment generating function, relative gap within
//    1e-10, across kernels, horizons 2..14, and six transform arguments.
std::string check_recursion() {
    const std::vector<Kernel> kernels = {k0(), k1(), k2().truncated(12)};
    for (const Kernel& k : kernels) {
        for (std::size_t n = 2; n <= 14; ++n) {
            for (double t : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
                const dthp::RecursionCheck c = dthp::verify_recursion(k, n, t);
                if (!c.ok) {
                    return "identity off at n=" + std::to_string(n) + " t=" + fmt(t) +
                           ": rel=" + fmt(c.rel_diff);
                }
            }
        }
    }
    return {};
}

// 3. Replicate means of H_n/n and Lambda_n/n both land within 0.002 of the
//    limit 0.375 (n = 1e5, R = 50), and a single trajectory keeps its running
//    average within 8 sigma / sqrt(n/2) over the back half.
std::string check_lln() {
    const std::size_t n = 100000;
    const auto count =
        dthp::lln_experiment(k1(), n, 50, 2024, dthp::Target::process, 4);
    if (std::fabs(count.empirical_mean - 0.375) > 0.002) {
        return "count mean " + fmt(count.empirical_mean) + " not within 0.002 of 0.375";
    }
    const auto comp =
        dthp::lln_experiment(k1(), n, 50, 2024, dthp::Target::compensator, 4);
    if (std::fabs(comp.empirical_mean - 0.375) > 0.002) {
        return "compensator mean " + fmt(comp.empirical_mean) + " not within 0.002 of 0.375";
    }
    const dthp::TrajectoryScan t = dthp::slln_trajectory_check(k1(), n, 2024);
    if (!t.pass) {
        return "trajectory deviation " + fmt(t.max_abs_deviation) + " above " + fmt(t.bound);
    }
    return {};
}

// 4./5. Standardized terminals at n = 5000 over 1e4 replicates: sample
// variance within 10% of the limit, mean inside the 4-sigma band, KS distance
// below 1.95/sqrt(R) + 0.01, for both the count and the compensator.
std::string check_clt(dthp::Target target, double limit_var) {
    const auto rep = dthp::clt_experiment(k1(), 5000, 10000, 777, target, 4);
    if (std::fabs(rep.theoretical_var - limit_var) > 1e-12) {
        return "limit variance " + fmt(rep.theoretical_var) + " != " + fmt(limit_var);
    }
    if (std::fabs(rep.empirical_var - limit_var) > 0.1 * limit_var) {
        return "sample variance " + fmt(rep.empirical_var) + " outside 10% of " + fmt(limit_var);
    }
    const double mean_gate = 4.0 * std::sqrt(limit_var / 10000.0) + 1e-9;
    if (std::fabs(rep.empirical_mean) > mean_gate) {
        return "sample mean " + fmt(rep.empirical_mean) + " outside " + fmt(mean_gate);
    }
    const double ks_gate = 1.95 / std::sqrt(10000.0) + 0.01;
    if (rep.ks_statistic > ks_gate) {
        return "ks " + fmt(rep.ks_statistic) + " above " + fmt(ks_gate);
    }
    if (!rep.pass()) return "report gates disagree";
    return {};
}

// 6. Remaining influence: no excursion outside [0, sum_j j beta_j] in 1e6
//    steps per kernel (exact comparisons), and for the one-lag kernel every
//    step value is exactly 0 or 0.2.
std::string check_zeta() {
    for (const Kernel& k : {k0(), k1(), k2()}) {
        const dthp::BoundScan scan = dthp::zeta_bound_check(k, 250000, 4, 99, 4);
        if (scan.violations != 0) {
            return std::to_string(scan.violations) + " envelope violations";
        }
    }
    const dthp::Path p = dthp::simulate(k1(), 1000000, 99);
    for (std::size_t i = 0; i < p.n; ++i) {
        if (p.zeta[i] != 0.0 && p.zeta[i] != 0.2) {
            return "one-lag zeta " + fmt(p.zeta[i]) + " at step " + std::to_string(i + 1);
        }
    }
    return {};
}

// 7. Growth-rate envelope: every exact cell over n = 1..20 and the eight-point
//    t grid sits inside its sandwich within 1e-10; two spot values reproduced
//    within 1e-6.
std::string check_gamma_bounds() {
    const std::vector<double> t_grid = {-2.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 2.0};
    for (const Kernel& k : {k0(), k1(), k2().truncated(12)}) {
        for (std::size_t n = 1; n <= 20; ++n) {
            for (double t : t_grid) {
                const dthp::BoundCheck c = dthp::check_bounds(k, n, t);
                if (c.method == dthp::GammaMethod::monte_carlo) {
                    return "cell n=" + std::to_string(n) + " t=" + fmt(t) +
                           " fell back to monte carlo";
                }
                if (c.verdict != dthp::BoundVerdict::ok) {
                    return "cell n=" + std::to_string(n) + " t=" + fmt(t) + " value " +
                           fmt(c.value) + " outside [" + fmt(c.lower) + ", " + fmt(c.upper) + "]";
                }
            }
        }
    }
    const double g_neg = dthp::gamma_exact(k1(), 2, -1.0);
    if (std::fabs(g_neg - (-0.2210099138715616)) > 1e-6) {
        return "spot value at t=-1: " + fmt(g_neg);
    }
    const double g_pos = dthp::gamma_exact(k1(), 2, 1.0);
    if (std::fabs(g_pos - 0.47330129963088391) > 1e-6) {
        return "spot value at t=+1: " + fmt(g_pos);
    }
    return {};
}

// 8. For negative arguments the growth rate strictly decreases in n up to 20,
//    with the last decrement below 0.005, and the limit bracket
//    [log(1-beta0), Gamma_20] contains the horizon value.
std::string check_monotone() {
    for (const Kernel& k : {k1(), k2().truncated(12)}) {
        for (double t : {-2.0, -1.0, -0.5}) {
            const dthp::MonotoneReport r = dthp::check_monotone(k, t, 20);
            if (!r.strictly_decreasing) {
                return "sequence not strictly decreasing at t=" + fmt(t) + " " + r.note;
            }
            if (!(r.last_decrement < 0.005)) {
                return "last decrement " + fmt(r.last_decrement) + " at t=" + fmt(t);
            }
            const dthp::LimitEstimate e = dthp::estimate_limit(k, t, 20);
            if (!(e.lower <= e.gamma_limit && e.gamma_limit <= e.upper)) {
                return "bracket misses the horizon value at t=" + fmt(t);
            }
        }
    }
    return {};
}

// 9. Doob decomposition: M_i + Lambda_i reproduces H_i bit for bit on 1e3
//    fuzzed paths, and the exhaustive path-weighted mean of each martingale
//    increment vanishes within 1e-12 for n <= 12.
std::string check_doob() {
    dthp::Xoshiro256ss rng(424242);
    for (int trial = 0; trial < 1000; ++trial) {
        const double beta0 = 0.05 + 0.5 * rng.uniform53();
        const std::size_t m = static_cast<std::size_t>(rng.next() % 4);
        std::vector<double> w(m);
        double mass = 0.0;
        for (double& v : w) {
            v = rng.uniform53();
            mass += v;
        }
        const double budget = (0.9 - beta0) * rng.uniform53();
        for (double& v : w) v *= mass > 0.0 ? budget / mass : 0.0;
        const Kernel k = Kernel::finite(beta0, std::move(w));
        const std::size_t n = 50 + rng.next() % 350;
        const dthp::Path p = dthp::simulate(k, n, rng.next());
        for (std::size_t i = 0; i < p.n; ++i) {
            if (p.martingale[i] + p.compensator[i] != static_cast<double>(p.counts[i])) {
                return "decomposition broke at trial " + std::to_string(trial) + " step " +
                       std::to_string(i + 1);
            }
        }
    }

    for (const Kernel& k : {k1(), k3(), k2().truncated(6)}) {
        const std::size_t n = 12;
        std::vector<double> mean_incr(n, 0.0);
        std::vector<std::uint8_t> h;
        const std::function<void(double, std::size_t)> visit = [&](double prob,
                                                                   std::size_t depth) {
            if (depth == n) return;
            const double lambda = dthp::intensity_at(k, h, depth + 1);
            mean_incr[depth] += prob * (1.0 - lambda) * (0.0 - lambda);
            mean_incr[depth] += prob * lambda * (1.0 - lambda);
            h.push_back(0);
            visit(prob * (1.0 - lambda), depth + 1);
            h.back() = 1;
            visit(prob * lambda, depth + 1);
            h.pop_back();
        };
        visit(1.0, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (std::fabs(mean_incr[i]) > 1e-12) {
                return "increment mean " + fmt(mean_incr[i]) + " at step " + std::to_string(i + 1);
            }
        }
    }
    return {};
}

// 10. Likelihood plumbing: the fit on 1e5 simulated steps recovers both
//     parameters within 0.02, and the objective matches the chain-rule
//     log-probability within 1e-10 on every prefix of length <= 22.
std::string check_mle() {
    const dthp::Path p = dthp::simulate(k1(), 100000, 20240917);
    const dthp::FitResult r = dthp::fit(p.xi, dthp::KernelFamily::finite, {0.1, 0.05});
    if (!r.converged) return "fit did not converge";
    if (std::fabs(r.params[0] - 0.3) > 0.02) {
        return "baseline estimate " + fmt(r.params[0]) + " not within 0.02 of 0.3";
    }
    if (std::fabs(r.params[1] - 0.2) > 0.02) {
        return "lag-weight estimate " + fmt(r.params[1]) + " not within 0.02 of 0.2";
    }
    for (std::size_t n = 1; n <= 22; ++n) {
        const std::vector<std::uint8_t> prefix(p.xi.begin(), p.xi.begin() + n);
        double chain = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double lambda = dthp::intensity_at(k1(), prefix, i + 1);
            chain += prefix[i] != 0 ? std::log(lambda) : std::log1p(-lambda);
        }
        if (std::fabs(dthp::loglik(k1(), prefix) - chain) > 1e-10) {
            return "objective drifts from the chain rule at prefix " + std::to_string(n);
        }
    }
    return {};
}

// 11. Reproducibility through the command surface: identical invocations give
//     byte-identical files, including across worker counts.
std::string check_cli_reproducibility(const std::string& cli) {
    namespace fs = std::filesystem;
    if (cli.empty()) return "no binary path supplied";
    const fs::path dir = fs::temp_directory_path() / "dthp-acceptance";
    fs::create_directories(dir);
    const fs::path kpath = dir / "kernel.json";
    {
        std::ofstream out(kpath);
        out << k1().to_json().dump();
    }

    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    const auto invoke = [&](const std::string& args) -> bool {
        const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };

    struct Case {
        std::string name;
        std::string args;  // {k} kernel path, {o} output path, {w} workers flag
    };
    const std::vector<Case> cases = {
        {"simulate", "simulate --kernel {k} --n 20000 --seed 31 --out {o} {w}"},
        {"exact", "exact --kernel {k} --n 14 --out {o} {w}"},
        {"limits-clt",
         "limits clt --kernel {k} --n 400 --R 500 --seed 5 --target process --out {o} {w}"},
        {"mgf", "mgf --kernel {k} --n-list 1,2,3,4,5,6 --t-grid -1,-0.5,0.5,1 --out {o} {w}"},
    };
    const auto expand = [&](std::string tpl, const std::string& out, const std::string& workers) {
        const auto sub = [&](const std::string& from, const std::string& to) {
            for (std::size_t pos = tpl.find(from); pos != std::string::npos;
                 pos = tpl.find(from)) {
                tpl.replace(pos, from.size(), to);
            }
        };
        sub("{k}", kpath.string());
        sub("{o}", out);
        sub("{w}", workers);
        return tpl;
    };

    for (const Case& c : cases) {
        const fs::path out1 = dir / (c.name + ".1");
        const fs::path out2 = dir / (c.name + ".2");
        const fs::path out3 = dir / (c.name + ".3");
        if (!invoke(expand(c.args, out1.string(), "")) ||
            !invoke(expand(c.args, out2.string(), "")) ||
            !invoke(expand(c.args, out3.string(), "--workers 7"))) {
            return c.name + ": invocation failed";
        }
        const std::string bytes = slurp(out1);
        if (bytes.empty()) return c.name + ": empty output";
        if (bytes != slurp(out2)) return c.name + ": rerun differs";
        if (bytes != slurp(out3)) return c.name + ": worker count leaked into the output";
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
    return {};
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    Harness h;
    h.run("exact oracle agreement, enumeration vs dp", 30.0, check_exact_oracles);
    h.run("one-step mgf identity across kernels", 60.0, check_recursion);
    h.run("replicate and single-path mean laws", 60.0, check_lln);
    h.run("standardized count fluctuations", 300.0,
          [] { return check_clt(dthp::Target::process, 0.3662109375); });
    h.run("standardized compensator fluctuations", 300.0,
          [] { return check_clt(dthp::Target::compensator, 0.0146484375); });
    h.run("remaining-influence envelope", 0.0, check_zeta);
    h.run("growth-rate sandwich on the exact grid", 0.0, check_gamma_bounds);
    h.run("growth-rate monotonicity and limit bracket", 0.0, check_monotone);
    h.run("decomposition exactness and increment means", 0.0, check_doob);
    h.run("likelihood fit recovery and chain-rule match", 120.0, check_mle);
    h.run("byte-identical command reruns", 0.0,
          [&cli] { return check_cli_reproducibility(cli); });

    if (h.failures == 0) {
        std::printf("all %d checks passed\n", h.index);
        return 0;
    }
    std::printf("%d of %d checks failed\n", h.failures, h.index);
    return 1;
}
