#include "dthp/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dthp/process.hpp"

namespace dthp {

namespace {

constexpr double kEps = kFeasibilityMargin;
constexpr double kScaleFloor = 1e-12;
constexpr double kBoundaryTol = 1e-9;

double excitation_mass(KernelFamily family, const std::vector<double>& p) {
    if (family == KernelFamily::finite) {
        double b = 0.0;
        for (std::size_t i = 1; i < p.size(); ++i) b += p[i];
        return b;
    }
    return p[1] / (1.0 - p[2]);
}

void check_layout(KernelFamily family, const std::vector<double>& p) {
    if (family == KernelFamily::finite) {
        if (p.empty()) throw std::invalid_argument("finite parameters need at least beta0");
    } else if (p.size() != 3) {
        throw std::invalid_argument("geometric parameters are (beta0, scale, ratio)");
    }
}

}  // namespace

Kernel kernel_from_params(KernelFamily family, const std::vector<double>& params) {
    check_layout(family, params);
    if (family == KernelFamily::finite) {
        return Kernel::finite(params[0], std::vector<double>(params.begin() + 1, params.end()));
    }
    return Kernel::geometric(params[0], params[1], params[2]);
}

std::vector<double> project_feasible(KernelFamily family, std::vector<double> params) {
    check_layout(family, params);
    params[0] = std::clamp(params[0], kEps, 1.0 - kEps);
    if (family == KernelFamily::finite) {
        for (std::size_t i = 1; i < params.size(); ++i) params[i] = std::max(params[i], 0.0);
    } else {
        params[1] = std::max(params[1], kScaleFloor);
        params[2] = std::clamp(params[2], kEps, 1.0 - kEps);
    }
    const double slack = 1.0 - kEps - params[0];
    // contraction loop: multiplying by a factor <= 1 never increases a term,
    // so the mass decreases monotonically and the loop exits once it fits,
    // making a second projection a bit-exact no-op
    for (int round = 0; round < 100; ++round) {
        const double mass = excitation_mass(family, params);
        if (mass <= slack) break;
        const double f = slack / mass;
        if (family == KernelFamily::finite) {
            for (std::size_t i = 1; i < params.size(); ++i) params[i] *= f;
        } else {
            params[1] = std::max(params[1] * f, kScaleFloor);
        }
    }
    return params;
}

double loglik(const Kernel& kernel, const std::vector<std::uint8_t>& xi) {
    if (xi.empty()) throw std::invalid_argument("log-likelihood needs a nonempty sequence");
    Stepper st(kernel);
    double total = 0.0;
    for (std::uint8_t bit : xi) {
        if (bit > 1) throw std::invalid_argument("bit sequence entries must be 0 or 1");
        const double lambda = st.intensity();
        if (bit != 0) {
            if (!(lambda > 0.0)) return -std::numeric_limits<double>::infinity();
            total += std::log(lambda);
        } else {
            if (!(lambda < 1.0)) return -std::numeric_limits<double>::infinity();
            total += std::log1p(-lambda);
        }
        st.advance(bit != 0);
    }
    return total;
}

double residual_diagnostic(const Kernel& kernel, const std::vector<std::uint8_t>& xi) {
    if (xi.empty()) throw std::invalid_argument("residual diagnostic needs a nonempty sequence");
    Stepper st(kernel);
    double denom = 0.0;
    for (std::uint8_t bit : xi) {
        const double lambda = st.intensity();
        denom += lambda * (1.0 - lambda);
        st.advance(bit != 0);
    }
    return st.martingale() / std::sqrt(denom);
}

namespace {

struct Box {
    double lo = 0.0;
    double hi = 0.0;
};

// Feasible interval for coordinate j with the other coordinates held fixed.
Box coordinate_box(KernelFamily family, const std::vector<double>& p, std::size_t j) {
    if (family == KernelFamily::finite) {
        double others = 0.0;
        for (std::size_t i = 1; i < p.size(); ++i) {
            if (i != j) others += p[i];
        }
        if (j == 0) return {kEps, 1.0 - kEps - others};
        return {0.0, 1.0 - kEps - p[0] - others};
    }
    if (j == 0) return {kEps, 1.0 - kEps - p[1] / (1.0 - p[2])};
    if (j == 1) return {kScaleFloor, (1.0 - kEps - p[0]) * (1.0 - p[2])};
    const double cap = 1.0 - p[1] / (1.0 - kEps - p[0]);
    return {kEps, std::min(1.0 - kEps, cap)};
}

struct Objective {
    const std::vector<std::uint8_t>& xi;
    KernelFamily family;

    double operator()(const std::vector<double>& p) const {
        return loglik(kernel_from_params(family, p), xi);
    }
};

double central_difference(const Objective& obj, std::vector<double> p, std::size_t j, double step,
                          const Box& box) {
    const double x = p[j];
    const double hi = std::min(x + step, box.hi);
    const double lo = std::max(x - step, box.lo);
    if (!(hi > lo)) return 0.0;
    p[j] = hi;
    const double f_hi = obj(p);
    p[j] = lo;
    const double f_lo = obj(p);
    return (f_hi - f_lo) / (hi - lo);
}

}  // namespace

std::vector<double> fd_gradient(const std::vector<std::uint8_t>& xi, KernelFamily family,
                                const std::vector<double>& params, double step) {
    check_layout(family, params);
    const Objective obj{xi, family};
    std::vector<double> g(params.size(), 0.0);
    for (std::size_t j = 0; j < params.size(); ++j) {
        g[j] = central_difference(obj, params, j, step, coordinate_box(family, params, j));
    }
    return g;
}

FitResult fit(const std::vector<std::uint8_t>& xi, KernelFamily family, std::vector<double> init,
              const FitOptions& options) {
    check_layout(family, init);
    if (xi.empty()) throw std::invalid_argument("fit needs a nonempty sequence");
    {
        const std::vector<double> projected = project_feasible(family, init);
        if (projected != init) {
            throw std::invalid_argument("initial parameters outside the feasible box");
        }
    }

    const Objective obj{xi, family};
    std::vector<double> p = std::move(init);
    double value = obj(p);
    if (!std::isfinite(value)) {
        throw std::invalid_argument("initial parameters give a non-finite log-likelihood");
    }

    FitResult result;
    result.family = family;
    result.converged = false;

    std::size_t sweeps = 0;
    while (sweeps < options.max_sweeps) {
        ++sweeps;
        // projected gradient at the sweep start: components pushing through an
        // active face are zeroed
        double grad_norm = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
            const Box box = coordinate_box(family, p, j);
            double g = central_difference(obj, p, j, options.fd_step, box);
            if (p[j] <= box.lo + kBoundaryTol && g < 0.0) g = 0.0;
            if (p[j] >= box.hi - kBoundaryTol && g > 0.0) g = 0.0;
            grad_norm = std::max(grad_norm, std::fabs(g));
        }
        if (grad_norm <= options.gradient_tolerance) {
            result.converged = true;
            break;
        }

        const double sweep_start = value;
        for (std::size_t j = 0; j < p.size(); ++j) {
            const Box box = coordinate_box(family, p, j);
            if (!(box.hi > box.lo)) continue;
            double g = central_difference(obj, p, j, options.fd_step, box);
            if (p[j] <= box.lo + kBoundaryTol && g < 0.0) g = 0.0;
            if (p[j] >= box.hi - kBoundaryTol && g > 0.0) g = 0.0;
            if (g == 0.0) continue;
            const double direction = g > 0.0 ? 1.0 : -1.0;
            const double room = direction > 0.0 ? box.hi - p[j] : p[j] - box.lo;
            double alpha = std::min(room, 0.25 * (box.hi - box.lo));
            bool moved = false;
            while (alpha > 1e-14) {
                std::vector<double> trial = p;
                trial[j] = std::clamp(p[j] + direction * alpha, box.lo, box.hi);
                const double trial_value = obj(trial);
                if (trial_value > value + 1e-4 * alpha * std::fabs(g)) {
                    p = std::move(trial);
                    value = trial_value;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            (void)moved;
        }
        if (value - sweep_start <= options.improvement_tolerance) {
            result.converged = true;
            break;
        }
    }

    p = project_feasible(family, p);
    result.params = p;
    result.loglik = obj(p);
    result.iterations = sweeps;
    result.residual_stat = std::fabs(residual_diagnostic(kernel_from_params(family, p), xi));
    return result;
}

nlohmann::json FitResult::to_json() const {
    nlohmann::json j;
    j["family"] = to_string(family);
    nlohmann::json pj;
    pj["beta0"] = params.empty() ? 0.0 : params[0];
    if (family == KernelFamily::finite) {
        pj["weights"] = std::vector<double>(params.begin() + 1, params.end());
    } else {
        pj["scale"] = params[1];
        pj["ratio"] = params[2];
    }
    j["params"] = pj;
    j["loglik"] = loglik;
    j["iterations"] = iterations;
    j["converged"] = converged;
    j["residual_stat"] = residual_stat;
    return j;
}

}  // namespace dthp
