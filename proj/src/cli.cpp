#include "dthp/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dthp/estimate.hpp"
#include "dthp/exact.hpp"
#include "dthp/kernel.hpp"
#include "dthp/limit_experiments.hpp"
#include "dthp/mgf.hpp"
#include "dthp/parallel.hpp"
#include "dthp/process.hpp"
#include "dthp/version.hpp"

namespace dthp {

namespace {

Kernel load_kernel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open kernel file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("malformed kernel JSON in " + path + ": " + e.what());
    }
    return Kernel::from_json(j);
}

void write_text(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output file: " + path);
    out << content;
}

std::string json_with_config(nlohmann::json payload, const nlohmann::json& config) {
    payload["config"] = config;
    return payload.dump(2) + "\n";
}

// Shared run parameters; worker count deliberately left out of the embedded
// config so outputs are byte-identical for every --workers value.
nlohmann::json base_config(const std::string& command) {
    nlohmann::json c;
    c["version"] = kVersion;
    c["command"] = command;
    return c;
}

struct CommonArgs {
    std::string kernel_path;
    std::string out_path;
    long workers_flag = 0;
};

void add_workers_flag(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--workers", args.workers_flag,
                    "worker threads (default: DTHP_WORKERS or 1); never affects results");
}

}  // namespace

std::vector<std::uint8_t> read_bit_sequence(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open data file: " + path);
    std::vector<std::uint8_t> bits;
    std::string line;
    bool csv_mode = false;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen && line.rfind("i,xi", 0) == 0) {
            csv_mode = true;
            header_seen = true;
            continue;
        }
        header_seen = true;
        if (csv_mode) {
            const auto first = line.find(',');
            if (first == std::string::npos) {
                throw std::invalid_argument("malformed trajectory CSV row: " + line);
            }
            const auto second = line.find(',', first + 1);
            const std::string cell =
                line.substr(first + 1, second == std::string::npos ? std::string::npos
                                                                   : second - first - 1);
            if (cell == "0") {
                bits.push_back(0);
            } else if (cell == "1") {
                bits.push_back(1);
            } else {
                throw std::invalid_argument("trajectory CSV xi column must be 0/1, got: " + cell);
            }
        } else {
            std::string token;
            std::istringstream row(line);
            row >> token;
            if (token == "0") {
                bits.push_back(0);
            } else if (token == "1") {
                bits.push_back(1);
            } else {
                throw std::invalid_argument("data lines must be 0 or 1, got: " + line);
            }
        }
    }
    if (bits.empty()) throw std::invalid_argument("no observations in data file: " + path);
    return bits;
}

namespace {

int cmd_simulate(const CommonArgs& common, std::size_t n, std::uint64_t seed) {
    const Kernel kernel = load_kernel(common.kernel_path);
    const Path path = simulate(kernel, n, seed);
    nlohmann::json config = base_config("simulate");
    config["kernel"] = kernel.to_json();
    config["n"] = n;
    config["seed"] = seed;
    std::ostringstream out;
    write_path_csv(out, path, config);
    write_text(common.out_path, out.str());
    std::cerr << "simulate: n=" << n << " seed=" << seed << " events=" << path.counts.back()
              << "\n";
    return 0;
}

int cmd_exact(const CommonArgs& common, std::size_t n, const std::string& method, long memory,
              std::uint64_t budget) {
    const Kernel kernel = load_kernel(common.kernel_path);
    ExactDistribution dist;
    if (method == "enumerate") {
        dist = enumerate_distribution(kernel, n);
    } else if (method == "dp") {
        dist = dp_distribution(kernel, n, budget);
    } else if (method == "dp-truncated") {
        if (memory <= 0) {
            throw std::invalid_argument("--method dp-truncated requires --memory");
        }
        dist = dp_truncated(kernel, n, static_cast<std::size_t>(memory), budget);
    } else if (method == "auto") {
        if (kernel.has_finite_memory() && kernel.memory() <= kDpMaxMemory) {
            dist = dp_distribution(kernel, n, budget);
        } else {
            dist = enumerate_distribution(kernel, n);
        }
    } else {
        throw std::invalid_argument("unknown method: " + method);
    }
    nlohmann::json config = base_config("exact");
    config["kernel"] = kernel.to_json();
    config["n"] = n;
    config["method"] = method;
    if (memory > 0) config["memory"] = memory;
    config["budget"] = budget;
    write_text(common.out_path, json_with_config(dist.to_json(), config));
    std::cerr << "exact: n=" << n << " method=" << to_string(dist.method)
              << " mean=" << dist.mean() << "\n";
    return 0;
}

int cmd_limits_replicate(const CommonArgs& common, const std::string& which, std::size_t n,
                         std::size_t replicates, std::uint64_t seed, const std::string& target_name,
                         const std::string& samples_out) {
    const Kernel kernel = load_kernel(common.kernel_path);
    const Target target = target_from_string(target_name);
    const unsigned workers = resolve_workers(common.workers_flag);
    const LimitReport report = which == "lln"
                                   ? lln_experiment(kernel, n, replicates, seed, target, workers)
                                   : clt_experiment(kernel, n, replicates, seed, target, workers);
    nlohmann::json config = base_config("limits " + which);
    config["kernel"] = kernel.to_json();
    config["n"] = n;
    config["R"] = replicates;
    config["seed"] = seed;
    config["target"] = target_name;
    write_text(common.out_path, json_with_config(report.to_json(), config));
    if (!samples_out.empty()) {
        const std::vector<double> z =
            standardized_terminals(kernel, n, replicates, seed, target, workers);
        std::ostringstream out;
        out << "# config: " << config.dump() << "\n";
        out << "z\n";
        char buf[64];
        for (double v : z) {
            std::snprintf(buf, sizeof(buf), "%.17g\n", v);
            out << buf;
        }
        write_text(samples_out, out.str());
    }
    std::cerr << which << " " << target_name << ": mean=" << report.empirical_mean
              << " var=" << report.empirical_var << " ks=" << report.ks_statistic
              << (report.pass() ? " PASS" : " FAIL") << "\n";
    return report.pass() ? 0 : 1;
}

int cmd_limits_zeta(const CommonArgs& common, std::size_t n, std::size_t replicates,
                    std::uint64_t seed) {
    const Kernel kernel = load_kernel(common.kernel_path);
    const BoundScan scan =
        zeta_bound_check(kernel, n, replicates, seed, resolve_workers(common.workers_flag));
    nlohmann::json config = base_config("limits zeta");
    config["kernel"] = kernel.to_json();
    config["n"] = n;
    config["R"] = replicates;
    config["seed"] = seed;
    write_text(common.out_path, json_with_config(scan.to_json(), config));
    std::cerr << "zeta: max=" << scan.max_zeta << " bound=" << scan.bound
              << " violations=" << scan.violations << "\n";
    return scan.violations == 0 ? 0 : 1;
}

int cmd_limits_martingale(const CommonArgs& common, std::size_t n, std::size_t replicates,
                          std::uint64_t seed) {
    const Kernel kernel = load_kernel(common.kernel_path);
    const MartingaleScan scan =
        martingale_check(kernel, n, replicates, seed, resolve_workers(common.workers_flag));
    nlohmann::json config = base_config("limits martingale");
    config["kernel"] = kernel.to_json();
    config["n"] = n;
    config["R"] = replicates;
    config["seed"] = seed;
    write_text(common.out_path, json_with_config(scan.to_json(), config));
    std::cerr << "martingale: mean=" << scan.mean_terminal << " band=" << scan.band
              << (scan.pass ? " PASS" : " FAIL") << "\n";
    return scan.pass ? 0 : 1;
}

int cmd_mgf(const CommonArgs& common, std::vector<std::size_t> n_list, std::vector<double> t_grid,
            std::size_t mc_replicates, std::uint64_t seed, long truncate, std::uint64_t budget,
            const std::string& csv_out) {
    Kernel kernel = load_kernel(common.kernel_path);
    if (truncate > 0) kernel = kernel.truncated(static_cast<std::size_t>(truncate));
    McParams mc;
    mc.replicates = mc_replicates;
    mc.seed = seed;
    mc.workers = resolve_workers(common.workers_flag);
    const MgfReport report = mgf_report(kernel, std::move(n_list), std::move(t_grid), mc, budget);

    nlohmann::json config = base_config("mgf");
    config["kernel"] = kernel.to_json();
    config["n_list"] = report.n_list;
    config["t_grid"] = report.t_grid;
    config["mc_replicates"] = mc_replicates;
    config["seed"] = seed;
    if (truncate > 0) config["truncate"] = truncate;
    config["budget"] = budget;
    write_text(common.out_path, json_with_config(report.to_json(), config));
    if (!csv_out.empty()) {
        std::ostringstream out;
        write_mgf_csv(out, report, config);
        write_text(csv_out, out.str());
    }

    bool failing = !report.all_cells_ok();
    for (const auto& mono : report.monotone) {
        if (!mono.strictly_decreasing && mono.note.empty()) failing = true;
    }
    std::cerr << "mgf: cells=" << report.cells.size()
              << (failing ? " FAIL" : " OK") << "\n";
    return failing ? 1 : 0;
}

int cmd_estimate(const CommonArgs& common, const std::string& data_path,
                 const std::string& family_name, std::vector<double> init, long memory,
                 std::size_t budget) {
    const std::vector<std::uint8_t> bits = read_bit_sequence(data_path);
    const KernelFamily family = kernel_family_from_string(family_name);
    if (init.empty()) {
        if (family == KernelFamily::finite) {
            const std::size_t m = memory >= 0 ? static_cast<std::size_t>(memory) : 1;
            init.assign(m + 1, 0.05);
            init[0] = 0.1;
        } else {
            init = {0.1, 0.05, 0.5};
        }
    }
    FitOptions options;
    options.max_sweeps = budget;
    const FitResult result = fit(bits, family, init, options);

    nlohmann::json config = base_config("estimate");
    config["data"] = data_path;
    config["family"] = family_name;
    config["init"] = init;
    config["budget"] = budget;
    write_text(common.out_path, json_with_config(result.to_json(), config));
    std::cerr << "estimate: loglik=" << result.loglik << " iterations=" << result.iterations
              << (result.converged ? " converged" : " NOT-converged") << "\n";
    return result.converged ? 0 : 1;
}

int cmd_check_kernel(const CommonArgs& common) {
    const Kernel kernel = load_kernel(common.kernel_path);
    const AssumptionReport report = check_assumptions(kernel);
    nlohmann::json config = base_config("check-kernel");
    config["kernel"] = kernel.to_json();
    write_text(common.out_path, json_with_config(report.to_json(), config));
    std::cerr << "check-kernel: total_mass=" << report.total_mass
              << (report.all_pass() ? " PASS" : " FAIL") << "\n";
    return report.all_pass() ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& argv) {
    CLI::App app{"discrete-time self-exciting binary process toolkit"};
    app.require_subcommand(1);

    // simulate
    CommonArgs sim_args;
    std::size_t sim_n = 0;
    std::uint64_t sim_seed = 0;
    auto* sim = app.add_subcommand("simulate", "sample one trajectory and emit its CSV");
    sim->add_option("--kernel", sim_args.kernel_path, "kernel JSON file")->required();
    sim->add_option("--n", sim_n, "number of steps")->required()->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_seed, "master seed")->required();
    sim->add_option("--out", sim_args.out_path, "output CSV path (default: stdout)");
    add_workers_flag(sim, sim_args);

    // exact
    CommonArgs exact_args;
    std::size_t exact_n = 0;
    std::string exact_method = "auto";
    long exact_memory = -1;
    std::uint64_t exact_budget = kDefaultOpBudget;
    auto* exact = app.add_subcommand("exact", "exact count distribution after n steps");
    exact->add_option("--kernel", exact_args.kernel_path, "kernel JSON file")->required();
    exact->add_option("--n", exact_n, "horizon")->required()->check(CLI::PositiveNumber);
    exact->add_option("--method", exact_method,
                      "auto | enumerate | dp | dp-truncated (default auto)");
    exact->add_option("--memory", exact_memory, "truncation memory for dp-truncated");
    exact->add_option("--budget", exact_budget, "operation budget for the dp");
    exact->add_option("--out", exact_args.out_path, "output JSON path (default: stdout)");
    add_workers_flag(exact, exact_args);

    // limits
    auto* limits = app.add_subcommand("limits", "replicate experiments against the limit laws");
    limits->require_subcommand(1);
    struct LimitsArgs {
        CommonArgs common;
        std::size_t n = 0;
        std::size_t replicates = 0;
        std::uint64_t seed = 0;
        std::string target = "process";
        std::string samples_out;
    };
    LimitsArgs lln_args, clt_args, zeta_args, mart_args;
    const auto add_limits_common = [](CLI::App* cmd, LimitsArgs& args, bool with_target) {
        cmd->add_option("--kernel", args.common.kernel_path, "kernel JSON file")->required();
        cmd->add_option("--n", args.n, "steps per replicate")->required()->check(CLI::PositiveNumber);
        cmd->add_option("--R", args.replicates, "replicates")->required()->check(CLI::PositiveNumber);
        cmd->add_option("--seed", args.seed, "master seed")->required();
        if (with_target) {
            cmd->add_option("--target", args.target, "process | compensator (default process)");
        }
        cmd->add_option("--out", args.common.out_path, "output JSON path (default: stdout)");
        add_workers_flag(cmd, args.common);
    };
    auto* lln = limits->add_subcommand("lln", "replicate averages against the mean law");
    add_limits_common(lln, lln_args, true);
    auto* clt = limits->add_subcommand("clt", "standardized terminals against the normal limit");
    add_limits_common(clt, clt_args, true);
    clt->add_option("--samples-out", clt_args.samples_out, "CSV of standardized samples");
    auto* zeta = limits->add_subcommand("zeta", "remaining-influence bound scan");
    add_limits_common(zeta, zeta_args, false);
    auto* mart = limits->add_subcommand("martingale", "terminal martingale mean check");
    add_limits_common(mart, mart_args, false);

    // mgf
    CommonArgs mgf_args;
    std::vector<double> mgf_t_grid = {-2.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 2.0};
    std::vector<std::size_t> mgf_n_list = {1,  2,  3,  4,  5,  6,  7,  8,  9,  10,
                                           11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
    std::size_t mgf_mc_replicates = 20000;
    std::uint64_t mgf_seed = 1;
    long mgf_truncate = -1;
    std::uint64_t mgf_budget = kDefaultOpBudget;
    std::string mgf_csv_out;
    auto* mgf = app.add_subcommand("mgf", "growth-rate grid with envelope checks");
    mgf->add_option("--kernel", mgf_args.kernel_path, "kernel JSON file")->required();
    mgf->add_option("--t-grid", mgf_t_grid, "comma-separated t values")->delimiter(',');
    mgf->add_option("--n-list", mgf_n_list, "comma-separated horizons")->delimiter(',');
    mgf->add_option("--mc-R", mgf_mc_replicates, "Monte Carlo replicates for out-of-budget cells");
    mgf->add_option("--seed", mgf_seed, "Monte Carlo master seed");
    mgf->add_option("--truncate", mgf_truncate, "replace the kernel by its m-lag truncation");
    mgf->add_option("--budget", mgf_budget, "operation budget for the dp");
    mgf->add_option("--out", mgf_args.out_path, "output JSON path (default: stdout)");
    mgf->add_option("--csv-out", mgf_csv_out, "long-format CSV of the grid cells");
    add_workers_flag(mgf, mgf_args);

    // estimate
    CommonArgs est_args;
    std::string est_data, est_family = "finite";
    std::vector<double> est_init;
    long est_memory = -1;
    std::size_t est_budget = 500;
    auto* est = app.add_subcommand("estimate", "maximum-likelihood fit of kernel parameters");
    est->add_option("--data", est_data, "0/1 text file or trajectory CSV")->required();
    est->add_option("--family", est_family, "finite | geometric (default finite)");
    est->add_option("--init", est_init, "initial parameters (comma separated)")->delimiter(',');
    est->add_option("--memory", est_memory, "finite-family lag count for the default init");
    est->add_option("--budget", est_budget, "sweep budget");
    est->add_option("--out", est_args.out_path, "output JSON path (default: stdout)");
    add_workers_flag(est, est_args);

    // check-kernel
    CommonArgs check_args;
    auto* check = app.add_subcommand("check-kernel", "report the standing assumptions");
    check->add_option("--kernel", check_args.kernel_path, "kernel JSON file")->required();
    check->add_option("--out", check_args.out_path, "output JSON path (default: stdout)");
    add_workers_flag(check, check_args);

    std::vector<const char*> cargv;
    cargv.reserve(argv.size() + 1);
    cargv.push_back("dthp");
    for (const auto& a : argv) cargv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        // prints help to stdout or the one-line error to stderr
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_args, sim_n, sim_seed);
        if (exact->parsed()) {
            return cmd_exact(exact_args, exact_n, exact_method, exact_memory, exact_budget);
        }
        if (lln->parsed()) {
            return cmd_limits_replicate(lln_args.common, "lln", lln_args.n, lln_args.replicates,
                                        lln_args.seed, lln_args.target, "");
        }
        if (clt->parsed()) {
            return cmd_limits_replicate(clt_args.common, "clt", clt_args.n, clt_args.replicates,
                                        clt_args.seed, clt_args.target, clt_args.samples_out);
        }
        if (zeta->parsed()) {
            return cmd_limits_zeta(zeta_args.common, zeta_args.n, zeta_args.replicates,
                                   zeta_args.seed);
        }
        if (mart->parsed()) {
            return cmd_limits_martingale(mart_args.common, mart_args.n, mart_args.replicates,
                                         mart_args.seed);
        }
        if (mgf->parsed()) {
            return cmd_mgf(mgf_args, mgf_n_list, mgf_t_grid, mgf_mc_replicates, mgf_seed,
                           mgf_truncate, mgf_budget, mgf_csv_out);
        }
        if (est->parsed()) {
            return cmd_estimate(est_args, est_data, est_family, est_init, est_memory, est_budget);
        }
        if (check->parsed()) return cmd_check_kernel(check_args);
        std::cerr << "usage error: no subcommand\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace dthp
