#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dthp/exact.hpp"
#include "dthp/process.hpp"
#include "test_fixtures.hpp"

using dthp::dp_distribution;
using dthp::dp_truncated;
using dthp::enumerate_distribution;
using dthp::ExactDistribution;
using dthp::Kernel;

namespace {

std::vector<long double> binomial_pmf(std::size_t n, long double p) {
    std::vector<long double> b(n + 1, 0.0L);
    b[0] = std::pow(1.0L - p, static_cast<long double>(n));
    for (std::size_t k = 1; k <= n; ++k) {
        b[k] = b[k - 1] * static_cast<long double>(n - k + 1) / static_cast<long double>(k) * p /
               (1.0L - p);
    }
    return b;
}

double pmf_sum(const ExactDistribution& d) {
    double s = 0.0;
    for (double v : d.pmf) s += v;
    return s;
}

}  // namespace

TEST_SUITE_BEGIN("exact");

TEST_CASE("two-step distribution worked example") {
    const ExactDistribution d = enumerate_distribution(fixtures::k1(), 2);
    REQUIRE(d.pmf.size() == 3);
    CHECK(d.pmf[0] == doctest::Approx(0.49).epsilon(1e-14));
    CHECK(d.pmf[1] == doctest::Approx(0.36).epsilon(1e-14));
    CHECK(d.pmf[2] == doctest::Approx(0.15).epsilon(1e-14));
}

TEST_CASE("single step distribution") {
    const ExactDistribution d = enumerate_distribution(fixtures::k1(), 1);
    CHECK(d.pmf[0] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(d.pmf[1] == 0.3);
}

TEST_CASE("memoryless enumeration is binomial") {
    const ExactDistribution d = enumerate_distribution(fixtures::k0(), 5);
    const auto oracle = binomial_pmf(5, 0.4L);
    for (std::size_t k = 0; k <= 5; ++k) {
        CHECK(d.pmf[k] == doctest::Approx(static_cast<double>(oracle[k])).epsilon(1e-14));
    }
}

TEST_CASE("enumeration rejects oversized horizons") {
    CHECK_THROWS_AS((void)enumerate_distribution(fixtures::k1(), 23), std::invalid_argument);
}

TEST_CASE("enumeration rejects saturated kernels") {
    CHECK_THROWS_AS((void)enumerate_distribution(Kernel::finite(0.6, {0.5}), 3),
                    std::domain_error);
}

TEST_CASE("dp agrees with enumeration entrywise") {
    const std::vector<Kernel> kernels = {fixtures::k0(), fixtures::k1(), fixtures::k3(),
                                         fixtures::k2().truncated(5)};
    for (const Kernel& k : kernels) {
        for (std::size_t n = 1; n <= 12; ++n) {
            const ExactDistribution a = enumerate_distribution(k, n);
            const ExactDistribution b = dp_distribution(k, n);
            REQUIRE(a.pmf.size() == b.pmf.size());
            for (std::size_t r = 0; r < a.pmf.size(); ++r) {
                CHECK(std::fabs(a.pmf[r] - b.pmf[r]) <= 1e-12);
            }
        }
    }
}

TEST_CASE("dp against a long-double binomial oracle at n=100") {
    const ExactDistribution d = dp_distribution(fixtures::k0(), 100);
    const auto oracle = binomial_pmf(100, 0.4L);
    for (std::size_t k = 0; k <= 100; ++k) {
        const double expected = static_cast<double>(oracle[k]);
        if (expected > 1e-290) {
            CHECK(d.pmf[k] == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("dp normalization and mean at a deep horizon") {
    const ExactDistribution d = dp_distribution(fixtures::k1(), 200);
    CHECK(std::fabs(pmf_sum(d) - 1.0) <= 1e-12);
    CHECK(std::fabs(d.mean() / 200.0 - 0.375) <= 0.005);
}

TEST_CASE("dp input validation") {
    CHECK_THROWS_AS((void)dp_distribution(fixtures::k2(), 5), std::invalid_argument);
    const Kernel wide = Kernel::finite(0.1, std::vector<double>(17, 0.01));
    CHECK_THROWS_AS((void)dp_distribution(wide, 5), std::invalid_argument);
    CHECK_THROWS_AS((void)dp_distribution(fixtures::k3(), 100, 1000), std::runtime_error);
}

TEST_CASE("captured horizons match standalone runs") {
    const auto all = dthp::dp_distributions_upto(fixtures::k3(), 9);
    REQUIRE(all.size() == 9);
    for (std::size_t n = 1; n <= 9; ++n) {
        const ExactDistribution solo = dp_distribution(fixtures::k3(), n);
        REQUIRE(all[n - 1].pmf.size() == solo.pmf.size());
        for (std::size_t r = 0; r < solo.pmf.size(); ++r) {
            CHECK(all[n - 1].pmf[r] == solo.pmf[r]);
        }
    }
}

TEST_CASE("truncated dp carries the tail bound") {
    const ExactDistribution d = dp_truncated(fixtures::k2(), 50, 12);
    REQUIRE(d.tv_error_bound.has_value());
    CHECK(*d.tv_error_bound == doctest::Approx(0.00244140625).epsilon(1e-14));
    CHECK_FALSE(d.tv_bound_vacuous);
    CHECK(std::fabs(pmf_sum(d) - 1.0) <= 1e-12);

    const ExactDistribution shallow = dp_truncated(fixtures::k2(), 50, 1);
    REQUIRE(shallow.tv_error_bound.has_value());
    CHECK(*shallow.tv_error_bound == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(shallow.tv_bound_vacuous);
}

TEST_CASE("deeper truncations converge within the stated bound") {
    const ExactDistribution exact = enumerate_distribution(fixtures::k2(), 14);
    for (std::size_t m : {6, 8, 10}) {
        const ExactDistribution approx = dp_truncated(fixtures::k2(), 14, m);
        double tv = 0.0;
        for (std::size_t r = 0; r < exact.pmf.size(); ++r) {
            tv += std::fabs(exact.pmf[r] - approx.pmf[r]);
        }
        tv *= 0.5;
        CHECK(tv <= *approx.tv_error_bound);
    }
}

TEST_CASE("moment generating function worked examples") {
    const ExactDistribution d = enumerate_distribution(fixtures::k1(), 2);
    CHECK(dthp::exact_mgf(d, -1.0) == doctest::Approx(0.64273689130721112).epsilon(1e-14));
    CHECK(dthp::exact_mgf(d, 0.0) == doctest::Approx(1.0).epsilon(1e-12));

    const ExactDistribution b = enumerate_distribution(fixtures::k0(), 5);
    const double base = 0.6 + 0.4 * std::exp(1.0);
    CHECK(dthp::exact_mgf(b, 1.0) == doctest::Approx(std::pow(base, 5)).epsilon(1e-13));
}

TEST_CASE("log evaluation switches to log-sum-exp without losing accuracy") {
    const ExactDistribution d = dp_distribution(fixtures::k1(), 22);
    const double t = 23.0;  // t n = 506, above the direct threshold
    long double direct = 0.0L;
    for (std::size_t r = 0; r < d.pmf.size(); ++r) {
        direct += static_cast<long double>(d.pmf[r]) *
                  std::exp(static_cast<long double>(t) * static_cast<long double>(r));
    }
    const double expected = static_cast<double>(std::log(direct));
    CHECK(dthp::log_mgf(d, t) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(dthp::exact_mgf(d, t) == doctest::Approx(static_cast<double>(direct)).epsilon(1e-12));
}

TEST_CASE("overflow guard") {
    const ExactDistribution d = dp_distribution(fixtures::k0(), 100);
    CHECK_THROWS_AS((void)dthp::exact_mgf(d, 10.0), std::overflow_error);
    CHECK(dthp::log_mgf(d, 10.0) == doctest::Approx(100.0 * std::log(0.6 + 0.4 * std::exp(10.0)))
                                        .epsilon(1e-12));
}

TEST_CASE("one-step identity worked example") {
    const dthp::RecursionCheck c = dthp::verify_recursion(fixtures::k1(), 2, 1.0);
    CHECK(c.ok);
    CHECK(c.lhs == doctest::Approx(2.5769398730848536).epsilon(1e-12));
    CHECK(c.rhs == doctest::Approx(2.5769398730848536).epsilon(1e-12));

    const dthp::RecursionCheck zero = dthp::verify_recursion(fixtures::k2(), 4, 0.0);
    CHECK(zero.ok);
    CHECK(zero.lhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(zero.rhs == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("one-step identity across kernels and arguments") {
    const std::vector<Kernel> kernels = {fixtures::k0(), fixtures::k1(), fixtures::k3(),
                                         fixtures::k2(), fixtures::k2().truncated(10)};
    for (const Kernel& k : kernels) {
        for (std::size_t n : {2, 5, 8}) {
            for (double t : {-2.0, -0.5, 0.5, 2.0}) {
                const dthp::RecursionCheck c = dthp::verify_recursion(k, n, t);
                CHECK(c.ok);
            }
        }
    }
}

TEST_CASE("corner path probabilities") {
    const dthp::CornerCoefficients c2 = dthp::corner_coefficients(fixtures::k1(), 2);
    CHECK(c2.all_zeros == doctest::Approx(0.49).epsilon(1e-14));
    CHECK(c2.all_ones == doctest::Approx(0.15).epsilon(1e-14));
    const dthp::CornerCoefficients c3 = dthp::corner_coefficients(fixtures::k1(), 3);
    CHECK(c3.all_ones == doctest::Approx(0.075).epsilon(1e-14));
    const dthp::CornerCoefficients c0 = dthp::corner_coefficients(fixtures::k0(), 4);
    CHECK(c0.all_zeros == doctest::Approx(std::pow(0.6, 4)).epsilon(1e-14));
    CHECK(c0.all_ones == doctest::Approx(std::pow(0.4, 4)).epsilon(1e-14));
}

TEST_CASE("corner coefficients match the distribution edges") {
    const std::vector<Kernel> kernels = {fixtures::k1(), fixtures::k3(),
                                         fixtures::k2().truncated(6), fixtures::k2()};
    for (const Kernel& k : kernels) {
        for (std::size_t n = 1; n <= 8; ++n) {
            const ExactDistribution d = enumerate_distribution(k, n);
            const dthp::CornerCoefficients c = dthp::corner_coefficients(k, n);
            CHECK(std::fabs(d.pmf[0] - c.all_zeros) <= 1e-12);
            CHECK(std::fabs(d.pmf[n] - c.all_ones) <= 1e-12);
        }
    }
}

TEST_CASE("expected count matches the distribution mean") {
    for (const Kernel& k : {fixtures::k0(), fixtures::k1(), fixtures::k3()}) {
        CHECK(dthp::expected_count(k, 1) == doctest::Approx(k.baseline()).epsilon(1e-14));
        for (std::size_t n : {5, 50}) {
            const ExactDistribution d = dp_distribution(k, n);
            CHECK(std::fabs(d.mean() - dthp::expected_count(k, n)) <= 1e-10);
        }
    }
}

TEST_CASE("distributions normalize across methods") {
    CHECK(std::fabs(pmf_sum(enumerate_distribution(fixtures::k2(), 10)) - 1.0) <= 1e-12);
    CHECK(std::fabs(pmf_sum(dp_distribution(fixtures::k3(), 80)) - 1.0) <= 1e-12);
    CHECK(std::fabs(pmf_sum(dp_truncated(fixtures::k2(), 60, 10)) - 1.0) <= 1e-12);
}

TEST_CASE("json export shape") {
    const nlohmann::json plain = dp_distribution(fixtures::k1(), 3).to_json();
    CHECK(plain.at("n") == 3);
    CHECK(plain.at("method") == "dp");
    CHECK(plain.at("tv_error_bound").is_null());
    CHECK(plain.at("pmf").size() == 4);

    const nlohmann::json trunc = dp_truncated(fixtures::k2(), 10, 4).to_json();
    CHECK(trunc.at("method") == "dp_truncated");
    CHECK(trunc.at("tv_error_bound").is_number());
    CHECK(trunc.contains("tv_bound_vacuous"));
}

TEST_SUITE_END();
