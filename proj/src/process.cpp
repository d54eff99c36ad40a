#include "dthp/process.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "dthp/parallel.hpp"

namespace dthp {

Stepper::Stepper(const Kernel& kernel) : kernel_(&kernel) {
    if (kernel.has_finite_memory()) {
        ring_.assign(std::max<std::size_t>(kernel.memory(), 1), 0);
    }
}

double Stepper::intensity() const {
    const Kernel& k = *kernel_;
    double lambda = k.baseline();
    if (k.has_finite_memory()) {
        const std::size_t m = k.memory();
        const std::size_t depth = std::min(step_, m);
        const auto& w = k.weights();
        // ascending lag order; identical to the definitional convolution
        for (std::size_t d = 0; d < depth; ++d) {
            lambda += w[d] * static_cast<double>(ring_[(step_ - 1 - d) % ring_.size()]);
        }
    } else {
        lambda += k.scale() * geo_accum_;
    }
    return lambda;
}

void Stepper::advance(bool event) {
    const Kernel& k = *kernel_;
    const double lambda = intensity();
    compensator_ += lambda;
    step_ += 1;
    count_ += event ? 1 : 0;
    if (k.has_finite_memory()) {
        const std::size_t m = k.memory();
        if (m > 0) ring_[(step_ - 1) % ring_.size()] = event ? 1 : 0;
        // remaining influence of the last min(step, m) bits:
        //   zeta = sum_d tail_sum(d+1) * bit(lag d+1), nonnegative by term
        double z = 0.0;
        const std::size_t depth = std::min(step_, m);
        for (std::size_t d = 0; d < depth; ++d) {
            z += k.tail_sum(d + 1) * static_cast<double>(ring_[(step_ - 1 - d) % ring_.size()]);
        }
        zeta_ = z;
    } else {
        geo_accum_ = k.ratio() * geo_accum_ + (event ? 1.0 : 0.0);
        zeta_ = k.tail_sum(1) * geo_accum_;
    }
}

namespace {

Path make_path(std::size_t n, std::uint64_t seed) {
    Path p;
    p.n = n;
    p.seed = seed;
    p.xi.resize(n);
    p.counts.resize(n);
    p.intensity.resize(n);
    p.compensator.resize(n);
    p.martingale.resize(n);
    p.zeta.resize(n);
    return p;
}

}  // namespace

Path simulate(const Kernel& kernel, std::size_t n, std::uint64_t seed) {
    Path p = make_path(n, seed);
    simulate_stream(kernel, n, seed,
                    [&p](std::size_t i, bool bit, double lambda, std::int64_t count,
                         double compensator, double zeta) {
                        const std::size_t idx = i - 1;
                        p.xi[idx] = bit ? 1 : 0;
                        p.counts[idx] = count;
                        p.intensity[idx] = lambda;
                        p.compensator[idx] = compensator;
                        p.martingale[idx] = static_cast<double>(count) - compensator;
                        p.zeta[idx] = zeta;
                    });
    return p;
}

Path decompose(const Kernel& kernel, const std::vector<std::uint8_t>& xi) {
    if (!kernel.stable()) {
        throw std::domain_error("decomposition requires total kernel mass below one");
    }
    for (std::uint8_t b : xi) {
        if (b > 1) throw std::invalid_argument("bit sequence entries must be 0 or 1");
    }
    Path p = make_path(xi.size(), 0);
    Stepper st(kernel);
    for (std::size_t idx = 0; idx < xi.size(); ++idx) {
        const double lambda = st.intensity();
        st.advance(xi[idx] != 0);
        p.xi[idx] = xi[idx];
        p.counts[idx] = st.count();
        p.intensity[idx] = lambda;
        p.compensator[idx] = st.compensator();
        p.martingale[idx] = static_cast<double>(st.count()) - st.compensator();
        p.zeta[idx] = st.zeta();
    }
    return p;
}

double intensity_at(const Kernel& kernel, const std::vector<std::uint8_t>& history,
                    std::size_t i) {
    if (i == 0) throw std::invalid_argument("step index starts at 1");
    if (history.size() + 1 < i) {
        throw std::invalid_argument("history too short for requested step");
    }
    double lambda = kernel.baseline();
    std::size_t depth = i - 1;
    if (kernel.has_finite_memory()) depth = std::min(depth, kernel.memory());
    for (std::size_t j = 1; j <= depth; ++j) {
        lambda += kernel.beta(j) * static_cast<double>(history[i - 1 - j]);
    }
    return lambda;
}

double max_intensity_divergence(const Kernel& kernel, const std::vector<std::uint8_t>& xi) {
    Stepper st(kernel);
    double worst = 0.0;
    for (std::size_t idx = 0; idx < xi.size(); ++idx) {
        const double a = st.intensity();
        const double b = intensity_at(kernel, xi, idx + 1);
        worst = std::max(worst, std::fabs(a - b));
        st.advance(xi[idx] != 0);
    }
    return worst;
}

std::vector<TerminalStat> replicate_terminals(const Kernel& kernel, std::size_t n,
                                              std::size_t replicates, std::uint64_t master_seed,
                                              unsigned workers) {
    if (!kernel.stable()) {
        throw std::domain_error("simulation requires total kernel mass below one");
    }
    std::vector<TerminalStat> out(replicates);
    parallel_for(replicates, workers, [&](std::size_t r) {
        Stepper st(kernel);
        Xoshiro256ss rng(derive_seed(master_seed, r));
        for (std::size_t i = 0; i < n; ++i) {
            st.advance(rng.uniform53() < st.intensity());
        }
        out[r] = TerminalStat{st.count(), st.compensator(), st.martingale(), st.zeta()};
    });
    return out;
}

void write_path_csv(std::ostream& out, const Path& path, const nlohmann::json& config) {
    out << "# config: " << config.dump() << "\n";
    out << "i,xi,H,lambda,Lambda,M,zeta\n";
    char buf[128];
    for (std::size_t idx = 0; idx < path.n; ++idx) {
        std::snprintf(buf, sizeof(buf), "%zu,%d,%lld,%.17g,%.17g,%.17g,%.17g\n", idx + 1,
                      static_cast<int>(path.xi[idx]), static_cast<long long>(path.counts[idx]),
                      path.intensity[idx], path.compensator[idx], path.martingale[idx],
                      path.zeta[idx]);
        out << buf;
    }
}

}  // namespace dthp
