#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dthp/kernel.hpp"

namespace dthp {

// Feasible-box shrink: every lambda stays in [eps, 1 - eps], keeping the log
// terms and their finite-difference gradients bounded.
inline constexpr double kFeasibilityMargin = 1e-6;

// Parameter vector layout: finite family (beta0, w_1..w_m); geometric family
// (beta0, scale, ratio).
[[nodiscard]] Kernel kernel_from_params(KernelFamily family, const std::vector<double>& params);

// Clamps into the family box and rescales the excitation mass until
// beta0 + B <= 1 - eps. Exactly idempotent: applying it to its own output
// returns the input bit for bit.
[[nodiscard]] std::vector<double> project_feasible(KernelFamily family,
                                                   std::vector<double> params);

// sum_i [ xi_i log lambda_i + (1 - xi_i) log(1 - lambda_i) ]. Returns -inf
// when some lambda leaves (0,1) with the opposite outcome observed.
[[nodiscard]] double loglik(const Kernel& kernel, const std::vector<std::uint8_t>& xi);

// Central finite-difference gradient of the log-likelihood at params,
// evaluation points clamped into the feasible box (denominator adjusted).
[[nodiscard]] std::vector<double> fd_gradient(const std::vector<std::uint8_t>& xi,
                                              KernelFamily family,
                                              const std::vector<double>& params, double step);

struct FitOptions {
    std::size_t max_sweeps = 500;     // iteration budget (one sweep = one pass over coordinates)
    double gradient_tolerance = 1e-6;  // on the projected gradient, sup norm
    double improvement_tolerance = 1e-10;
    double fd_step = 1e-6;
};

struct FitResult {
    KernelFamily family = KernelFamily::finite;
    std::vector<double> params;
    double loglik = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    double residual_stat = 0.0;  // |M_n| / sqrt(sum lambda_i (1 - lambda_i)) under the fit

    [[nodiscard]] Kernel kernel() const { return kernel_from_params(family, params); }
    [[nodiscard]] nlohmann::json to_json() const;
};

// Projected coordinate ascent with backtracking line search over the family
// box intersected with {beta0 + B <= 1 - eps}. Converged when the projected
// gradient sup norm reaches gradient_tolerance or a full sweep improves the
// objective by at most improvement_tolerance; budget exhaustion returns the
// best iterate with converged = false. Throws on an infeasible init.
[[nodiscard]] FitResult fit(const std::vector<std::uint8_t>& xi, KernelFamily family,
                            std::vector<double> init, const FitOptions& options = {});

// Signed goodness-of-fit statistic M_n / sqrt(sum_i lambda_i (1 - lambda_i));
// approximately standard normal under a correct model, systematically negative
// when the kernel over-predicts.
[[nodiscard]] double residual_diagnostic(const Kernel& kernel,
                                         const std::vector<std::uint8_t>& xi);

}  // namespace dthp
