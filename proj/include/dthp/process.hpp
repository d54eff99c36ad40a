#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "dthp/kernel.hpp"
#include "dthp/rng.hpp"

namespace dthp {

// One realized trajectory with its decomposition. Index i in [0, n) holds the
// step-(i+1) quantities. Invariants, exact in floating point by construction:
//   counts[i]      = number of ones among xi[0..i]
//   martingale[i]  = counts[i] - compensator[i] (stored difference), and
//                    martingale[i] + compensator[i] == counts[i] bit-exactly
//   0 <= zeta[i] <= first_moment (zeta is a sum of nonnegative terms)
struct Path {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint8_t> xi;
    std::vector<std::int64_t> counts;
    std::vector<double> intensity;
    std::vector<double> compensator;
    std::vector<double> martingale;
    std::vector<double> zeta;
};

// End-of-path summary used by the replicate experiments; O(1) memory per path.
struct TerminalStat {
    std::int64_t count = 0;
    double compensator = 0.0;
    double martingale = 0.0;
    double zeta = 0.0;
};

// Sequential engine advancing one step at a time. Holds exactly the history
// the kernel needs: a ring of the last `memory` bits for the finite family, a
// single geometric accumulator T_i = ratio * T_{i-1} + xi_i for the geometric
// family (then lambda_{i+1} = beta0 + scale * T_i and
// zeta_i = tail_sum(1) * T_i).
class Stepper {
  public:
    explicit Stepper(const Kernel& kernel);

    // Intensity of the next step given the history consumed so far.
    [[nodiscard]] double intensity() const;
    void advance(bool event);

    [[nodiscard]] std::size_t step() const noexcept { return step_; }
    [[nodiscard]] std::int64_t count() const noexcept { return count_; }
    [[nodiscard]] double compensator() const noexcept { return compensator_; }
    [[nodiscard]] double martingale() const noexcept {
        return static_cast<double>(count_) - compensator_;
    }
    [[nodiscard]] double zeta() const noexcept { return zeta_; }

  private:
    const Kernel* kernel_;
    std::size_t step_ = 0;
    std::int64_t count_ = 0;
    double compensator_ = 0.0;
    double zeta_ = 0.0;
    // finite family
    std::vector<std::uint8_t> ring_;  // ring_[ (step-1-d) % m ] = bit at lag d+1
    // geometric family
    double geo_accum_ = 0.0;
};

// Streams a simulated path step by step: visit(i, bit, lambda, count,
// compensator, zeta) with i in [1, n]. Requires a stable kernel. One uniform
// draw per step; bit = (u < lambda).
template <typename Visitor>
void simulate_stream(const Kernel& kernel, std::size_t n, std::uint64_t seed, Visitor&& visit);

[[nodiscard]] Path simulate(const Kernel& kernel, std::size_t n, std::uint64_t seed);

// Rebuilds intensity/compensator/martingale/zeta along a given bit sequence.
// Produces bit-identical arrays to the simulate() that generated the sequence.
[[nodiscard]] Path decompose(const Kernel& kernel, const std::vector<std::uint8_t>& xi);

// Definitional convolution: lambda_i = beta0 + sum_{j=1..i-1} beta_j * xi_{i-j},
// summed in ascending lag order. history holds xi_1.. (0/1), needs size >= i-1.
[[nodiscard]] double intensity_at(const Kernel& kernel, const std::vector<std::uint8_t>& history,
                                  std::size_t i);

// Largest |lambda_stepper - lambda_convolution| along a path; diagnostic for
// the geometric O(1) intensity recursion.
[[nodiscard]] double max_intensity_divergence(const Kernel& kernel,
                                              const std::vector<std::uint8_t>& xi);

// Terminal statistics for R independent replicates, replicate r seeded with
// derive_seed(master_seed, r). Deterministic for every worker count: each
// replicate's result lands in slot r.
[[nodiscard]] std::vector<TerminalStat> replicate_terminals(const Kernel& kernel, std::size_t n,
                                                            std::size_t replicates,
                                                            std::uint64_t master_seed,
                                                            unsigned workers = 1);

// CSV with 17 significant digits. Column layout:
//   i,xi,H,lambda,Lambda,M,zeta
// preceded by '#' comment lines carrying the config JSON.
void write_path_csv(std::ostream& out, const Path& path, const nlohmann::json& config);

// --- template definition ---

template <typename Visitor>
void simulate_stream(const Kernel& kernel, std::size_t n, std::uint64_t seed, Visitor&& visit) {
    if (!kernel.stable()) {
        throw std::domain_error("simulation requires total kernel mass below one");
    }
    Stepper st(kernel);
    Xoshiro256ss rng(seed);
    for (std::size_t i = 1; i <= n; ++i) {
        const double lambda = st.intensity();
        const bool bit = rng.uniform53() < lambda;
        st.advance(bit);
        visit(i, bit, lambda, st.count(), st.compensator(), st.zeta());
    }
}

}  // namespace dthp
