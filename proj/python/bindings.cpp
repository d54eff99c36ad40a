#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dthp/cli.hpp"
#include "dthp/estimate.hpp"
#include "dthp/exact.hpp"
#include "dthp/kernel.hpp"
#include "dthp/limit_experiments.hpp"
#include "dthp/mgf.hpp"
#include "dthp/process.hpp"
#include "dthp/rng.hpp"
#include "dthp/version.hpp"

namespace py = pybind11;

namespace {

void register_kernel(py::module_& m) {
    py::class_<dthp::Kernel>(m, "Kernel")
        .def_static("finite", &dthp::Kernel::finite, py::arg("beta0"), py::arg("weights"))
        .def_static("geometric", &dthp::Kernel::geometric, py::arg("beta0"), py::arg("scale"),
                    py::arg("ratio"))
        .def_property_readonly("family",
                               [](const dthp::Kernel& k) { return dthp::to_string(k.family()); })
        .def_property_readonly("baseline", &dthp::Kernel::baseline)
        .def_property_readonly("has_finite_memory", &dthp::Kernel::has_finite_memory)
        .def("weights", &dthp::Kernel::weights)
        .def("scale", &dthp::Kernel::scale)
        .def("ratio", &dthp::Kernel::ratio)
        .def("beta", &dthp::Kernel::beta, py::arg("i"))
        .def("tail_sum", &dthp::Kernel::tail_sum, py::arg("n"))
        .def("head_sum", &dthp::Kernel::head_sum, py::arg("k"))
        .def_property_readonly("branching_ratio", &dthp::Kernel::branching_ratio)
        .def_property_readonly("first_moment", &dthp::Kernel::first_moment)
        .def_property_readonly("total_mass", &dthp::Kernel::total_mass)
        .def_property_readonly("stable", &dthp::Kernel::stable)
        .def("truncated", &dthp::Kernel::truncated, py::arg("m"))
        .def("to_json", [](const dthp::Kernel& k) { return k.to_json().dump(); })
        .def_static("from_json",
                    [](const std::string& text) {
                        return dthp::Kernel::from_json(nlohmann::json::parse(text));
                    })
        .def("__repr__", [](const dthp::Kernel& k) {
            return "<Kernel " + k.to_json().dump() + ">";
        });

    py::class_<dthp::LimitConstants>(m, "LimitConstants")
        .def_readonly("mean", &dthp::LimitConstants::mean)
        .def_readonly("variance", &dthp::LimitConstants::variance)
        .def_readonly("compensator_variance", &dthp::LimitConstants::compensator_variance);
    m.def("limit_constants", &dthp::limit_constants, py::arg("kernel"));

    py::class_<dthp::AssumptionReport>(m, "AssumptionReport")
        .def_readonly("mass_below_one", &dthp::AssumptionReport::mass_below_one)
        .def_readonly("finite_first_moment", &dthp::AssumptionReport::finite_first_moment)
        .def_readonly("baseline_positive", &dthp::AssumptionReport::baseline_positive)
        .def_readonly("weights_nonnegative", &dthp::AssumptionReport::weights_nonnegative)
        .def_readonly("total_mass", &dthp::AssumptionReport::total_mass)
        .def_readonly("branching_ratio", &dthp::AssumptionReport::branching_ratio)
        .def_readonly("first_moment", &dthp::AssumptionReport::first_moment)
        .def_readonly("max_sqrt_n_tail", &dthp::AssumptionReport::max_sqrt_n_tail)
        .def("all_pass", &dthp::AssumptionReport::all_pass);
    m.def("check_assumptions", &dthp::check_assumptions, py::arg("kernel"));

    m.def("derive_seed", &dthp::derive_seed, py::arg("master"), py::arg("index"));
}

void register_process(py::module_& m) {
    py::class_<dthp::Path>(m, "Path")
        .def_readonly("n", &dthp::Path::n)
        .def_readonly("seed", &dthp::Path::seed)
        .def_readonly("xi", &dthp::Path::xi)
        .def_readonly("counts", &dthp::Path::counts)
        .def_readonly("intensity", &dthp::Path::intensity)
        .def_readonly("compensator", &dthp::Path::compensator)
        .def_readonly("martingale", &dthp::Path::martingale)
        .def_readonly("zeta", &dthp::Path::zeta);

    py::class_<dthp::TerminalStat>(m, "TerminalStat")
        .def_readonly("count", &dthp::TerminalStat::count)
        .def_readonly("compensator", &dthp::TerminalStat::compensator)
        .def_readonly("martingale", &dthp::TerminalStat::martingale)
        .def_readonly("zeta", &dthp::TerminalStat::zeta);

    m.def("simulate", &dthp::simulate, py::arg("kernel"), py::arg("n"), py::arg("seed"));
    m.def("decompose", &dthp::decompose, py::arg("kernel"), py::arg("xi"));
    m.def("intensity_at", &dthp::intensity_at, py::arg("kernel"), py::arg("history"),
          py::arg("i"));
    m.def("replicate_terminals", &dthp::replicate_terminals, py::arg("kernel"), py::arg("n"),
          py::arg("replicates"), py::arg("master_seed"), py::arg("workers") = 1,
          py::call_guard<py::gil_scoped_release>());
    m.def("path_csv", [](const dthp::Path& p) {
        std::ostringstream out;
        dthp::write_path_csv(out, p, nlohmann::json::object());
        return out.str();
    });
}

void register_exact(py::module_& m) {
    py::class_<dthp::ExactDistribution>(m, "ExactDistribution")
        .def_readonly("n", &dthp::ExactDistribution::n)
        .def_readonly("pmf", &dthp::ExactDistribution::pmf)
        .def_property_readonly(
            "method", [](const dthp::ExactDistribution& d) { return dthp::to_string(d.method); })
        .def_readonly("tv_error_bound", &dthp::ExactDistribution::tv_error_bound)
        .def_readonly("tv_bound_vacuous", &dthp::ExactDistribution::tv_bound_vacuous)
        .def("mean", &dthp::ExactDistribution::mean)
        .def("to_json", [](const dthp::ExactDistribution& d) { return d.to_json().dump(); });

    m.def("enumerate_distribution", &dthp::enumerate_distribution, py::arg("kernel"),
          py::arg("n"));
    m.def("dp_distribution", &dthp::dp_distribution, py::arg("kernel"), py::arg("n"),
          py::arg("op_budget") = dthp::kDefaultOpBudget);
    m.def("dp_truncated", &dthp::dp_truncated, py::arg("kernel"), py::arg("n"), py::arg("m"),
          py::arg("op_budget") = dthp::kDefaultOpBudget);
    m.def("log_mgf", &dthp::log_mgf, py::arg("dist"), py::arg("t"));
    m.def("exact_mgf", &dthp::exact_mgf, py::arg("dist"), py::arg("t"));

    py::class_<dthp::RecursionCheck>(m, "RecursionCheck")
        .def_readonly("lhs", &dthp::RecursionCheck::lhs)
        .def_readonly("rhs", &dthp::RecursionCheck::rhs)
        .def_readonly("abs_diff", &dthp::RecursionCheck::abs_diff)
        .def_readonly("rel_diff", &dthp::RecursionCheck::rel_diff)
        .def_readonly("ok", &dthp::RecursionCheck::ok);
    m.def("verify_recursion", &dthp::verify_recursion, py::arg("kernel"), py::arg("n"),
          py::arg("t"));

    py::class_<dthp::CornerCoefficients>(m, "CornerCoefficients")
        .def_readonly("all_zeros", &dthp::CornerCoefficients::all_zeros)
        .def_readonly("all_ones", &dthp::CornerCoefficients::all_ones);
    m.def("corner_coefficients", &dthp::corner_coefficients, py::arg("kernel"), py::arg("n"));
    m.def("expected_count", &dthp::expected_count, py::arg("kernel"), py::arg("n"),
          py::arg("op_budget") = dthp::kDefaultOpBudget);
}

void register_mgf(py::module_& m) {
    m.def("gamma_exact", &dthp::gamma_exact, py::arg("kernel"), py::arg("n"), py::arg("t"));

    py::class_<dthp::McGamma>(m, "McGamma")
        .def_readonly("value", &dthp::McGamma::value)
        .def_readonly("se", &dthp::McGamma::se)
        .def_readonly("heavy_tail", &dthp::McGamma::heavy_tail)
        .def_readonly("replicates", &dthp::McGamma::replicates)
        .def_readonly("seed", &dthp::McGamma::seed);
    m.def("gamma_mc", &dthp::gamma_mc, py::arg("kernel"), py::arg("n"), py::arg("t"),
          py::arg("replicates"), py::arg("seed"), py::arg("workers") = 1,
          py::call_guard<py::gil_scoped_release>());

    py::class_<dthp::GammaBounds>(m, "GammaBounds")
        .def_readonly("lower", &dthp::GammaBounds::lower)
        .def_readonly("upper", &dthp::GammaBounds::upper);
    m.def("gamma_bounds", &dthp::gamma_bounds, py::arg("kernel"), py::arg("n"), py::arg("t"));

    py::class_<dthp::BoundCheck>(m, "BoundCheck")
        .def_readonly("n", &dthp::BoundCheck::n)
        .def_readonly("t", &dthp::BoundCheck::t)
        .def_readonly("value", &dthp::BoundCheck::value)
        .def_readonly("lower", &dthp::BoundCheck::lower)
        .def_readonly("upper", &dthp::BoundCheck::upper)
        .def_readonly("tolerance", &dthp::BoundCheck::tolerance)
        .def_readonly("se", &dthp::BoundCheck::se)
        .def_property_readonly(
            "method", [](const dthp::BoundCheck& c) { return dthp::to_string(c.method); })
        .def_property_readonly(
            "verdict", [](const dthp::BoundCheck& c) { return dthp::to_string(c.verdict); });
    m.def(
        "check_bounds",
        [](const dthp::Kernel& kernel, std::size_t n, double t, std::size_t mc_replicates,
           std::uint64_t mc_seed, unsigned workers) {
            dthp::McParams mc;
            mc.replicates = mc_replicates;
            mc.seed = mc_seed;
            mc.workers = workers;
            return dthp::check_bounds(kernel, n, t, mc);
        },
        py::arg("kernel"), py::arg("n"), py::arg("t"), py::arg("mc_replicates") = 20000,
        py::arg("mc_seed") = 1, py::arg("workers") = 1);

    py::class_<dthp::MonotoneReport>(m, "MonotoneReport")
        .def_readonly("t", &dthp::MonotoneReport::t)
        .def_readonly("gamma", &dthp::MonotoneReport::gamma)
        .def_readonly("strictly_decreasing", &dthp::MonotoneReport::strictly_decreasing)
        .def_readonly("last_decrement", &dthp::MonotoneReport::last_decrement)
        .def_readonly("note", &dthp::MonotoneReport::note);
    m.def("check_monotone", &dthp::check_monotone, py::arg("kernel"), py::arg("t"),
          py::arg("n_max"), py::arg("op_budget") = dthp::kDefaultOpBudget);

    py::class_<dthp::LimitEstimate>(m, "LimitEstimate")
        .def_readonly("t", &dthp::LimitEstimate::t)
        .def_readonly("gamma_limit", &dthp::LimitEstimate::gamma_limit)
        .def_readonly("lower", &dthp::LimitEstimate::lower)
        .def_readonly("upper", &dthp::LimitEstimate::upper)
        .def_readonly("last_decrement", &dthp::LimitEstimate::last_decrement);
    m.def("estimate_limit", &dthp::estimate_limit, py::arg("kernel"), py::arg("t"),
          py::arg("n_max"), py::arg("op_budget") = dthp::kDefaultOpBudget);
}

void register_limits(py::module_& m) {
    m.def("normal_cdf", &dthp::normal_cdf, py::arg("x"));
    m.def("ks_distance_to_normal", &dthp::ks_distance_to_normal, py::arg("samples"),
          py::arg("variance"));

    py::class_<dthp::LimitReport>(m, "LimitReport")
        .def_property_readonly(
            "target", [](const dthp::LimitReport& r) { return dthp::to_string(r.target); })
        .def_readonly("n", &dthp::LimitReport::n)
        .def_readonly("replicates", &dthp::LimitReport::replicates)
        .def_readonly("seed", &dthp::LimitReport::seed)
        .def_readonly("empirical_mean", &dthp::LimitReport::empirical_mean)
        .def_readonly("theoretical_mean", &dthp::LimitReport::theoretical_mean)
        .def_readonly("empirical_var", &dthp::LimitReport::empirical_var)
        .def_readonly("theoretical_var", &dthp::LimitReport::theoretical_var)
        .def_readonly("ks_statistic", &dthp::LimitReport::ks_statistic)
        .def_readonly("mean_abs_deviation", &dthp::LimitReport::mean_abs_deviation)
        .def_readonly("fraction_within_band", &dthp::LimitReport::fraction_within_band)
        .def_readonly("checks", &dthp::LimitReport::checks)
        .def("passed", &dthp::LimitReport::pass)
        .def("to_json", [](const dthp::LimitReport& r) { return r.to_json().dump(); });

    const auto wrap_target = [](const std::string& name) { return dthp::target_from_string(name); };
    m.def(
        "lln_experiment",
        [wrap_target](const dthp::Kernel& kernel, std::size_t n, std::size_t replicates,
                      std::uint64_t seed, const std::string& target, unsigned workers) {
            return dthp::lln_experiment(kernel, n, replicates, seed, wrap_target(target), workers);
        },
        py::arg("kernel"), py::arg("n"), py::arg("replicates"), py::arg("seed"),
        py::arg("target") = "process", py::arg("workers") = 1,
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "clt_experiment",
        [wrap_target](const dthp::Kernel& kernel, std::size_t n, std::size_t replicates,
                      std::uint64_t seed, const std::string& target, unsigned workers) {
            return dthp::clt_experiment(kernel, n, replicates, seed, wrap_target(target), workers);
        },
        py::arg("kernel"), py::arg("n"), py::arg("replicates"), py::arg("seed"),
        py::arg("target") = "process", py::arg("workers") = 1,
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "standardized_terminals",
        [wrap_target](const dthp::Kernel& kernel, std::size_t n, std::size_t replicates,
                      std::uint64_t seed, const std::string& target, unsigned workers) {
            return dthp::standardized_terminals(kernel, n, replicates, seed, wrap_target(target),
                                                workers);
        },
        py::arg("kernel"), py::arg("n"), py::arg("replicates"), py::arg("seed"),
        py::arg("target") = "process", py::arg("workers") = 1,
        py::call_guard<py::gil_scoped_release>());

    py::class_<dthp::BoundScan>(m, "BoundScan")
        .def_readonly("n", &dthp::BoundScan::n)
        .def_readonly("replicates", &dthp::BoundScan::replicates)
        .def_readonly("seed", &dthp::BoundScan::seed)
        .def_readonly("max_zeta", &dthp::BoundScan::max_zeta)
        .def_readonly("bound", &dthp::BoundScan::bound)
        .def_readonly("violations", &dthp::BoundScan::violations)
        .def_readonly("mean_zeta_over_sqrt_n", &dthp::BoundScan::mean_zeta_over_sqrt_n);
    m.def("zeta_bound_check", &dthp::zeta_bound_check, py::arg("kernel"), py::arg("n"),
          py::arg("replicates"), py::arg("seed"), py::arg("workers") = 1,
          py::call_guard<py::gil_scoped_release>());

    py::class_<dthp::MartingaleScan>(m, "MartingaleScan")
        .def_readonly("n", &dthp::MartingaleScan::n)
        .def_readonly("replicates", &dthp::MartingaleScan::replicates)
        .def_readonly("seed", &dthp::MartingaleScan::seed)
        .def_readonly("mean_terminal", &dthp::MartingaleScan::mean_terminal)
        .def_readonly("band", &dthp::MartingaleScan::band)
        .def_readonly("max_abs_over_n", &dthp::MartingaleScan::max_abs_over_n)
        .def_readonly("passed", &dthp::MartingaleScan::pass);
    m.def("martingale_check", &dthp::martingale_check, py::arg("kernel"), py::arg("n"),
          py::arg("replicates"), py::arg("seed"), py::arg("workers") = 1,
          py::call_guard<py::gil_scoped_release>());

    py::class_<dthp::TrajectoryScan>(m, "TrajectoryScan")
        .def_readonly("n", &dthp::TrajectoryScan::n)
        .def_readonly("seed", &dthp::TrajectoryScan::seed)
        .def_readonly("max_abs_deviation", &dthp::TrajectoryScan::max_abs_deviation)
        .def_readonly("bound", &dthp::TrajectoryScan::bound)
        .def_readonly("passed", &dthp::TrajectoryScan::pass);
    m.def("slln_trajectory_check", &dthp::slln_trajectory_check, py::arg("kernel"), py::arg("n"),
          py::arg("seed"));
}

void register_estimate(py::module_& m) {
    m.def("loglik", &dthp::loglik, py::arg("kernel"), py::arg("xi"));
    m.def("residual_diagnostic", &dthp::residual_diagnostic, py::arg("kernel"), py::arg("xi"));
    m.def(
        "project_feasible",
        [](const std::string& family, std::vector<double> params) {
            return dthp::project_feasible(dthp::kernel_family_from_string(family),
                                          std::move(params));
        },
        py::arg("family"), py::arg("params"));

    py::class_<dthp::FitResult>(m, "FitResult")
        .def_property_readonly(
            "family", [](const dthp::FitResult& r) { return dthp::to_string(r.family); })
        .def_readonly("params", &dthp::FitResult::params)
        .def_readonly("loglik", &dthp::FitResult::loglik)
        .def_readonly("iterations", &dthp::FitResult::iterations)
        .def_readonly("converged", &dthp::FitResult::converged)
        .def_readonly("residual_stat", &dthp::FitResult::residual_stat)
        .def("kernel", &dthp::FitResult::kernel)
        .def("to_json", [](const dthp::FitResult& r) { return r.to_json().dump(); });
    m.def(
        "fit",
        [](const std::vector<std::uint8_t>& xi, const std::string& family,
           std::vector<double> init, std::size_t max_sweeps) {
            dthp::FitOptions options;
            options.max_sweeps = max_sweeps;
            return dthp::fit(xi, dthp::kernel_family_from_string(family), std::move(init),
                             options);
        },
        py::arg("xi"), py::arg("family"), py::arg("init"), py::arg("max_sweeps") = 500,
        py::call_guard<py::gil_scoped_release>());
}

}  // namespace

PYBIND11_MODULE(_dthp, m) {
    m.doc() = "discrete-time self-exciting binary process toolkit";
    m.attr("__version__") = dthp::kVersion;
    register_kernel(m);
    register_process(m);
    register_exact(m);
    register_mgf(m);
    register_limits(m);
    register_estimate(m);
    m.def("run_cli", &dthp::run_cli, py::arg("argv"));
}
