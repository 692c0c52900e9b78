#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "msr/calibration.hpp"
#include "msr/rho.hpp"

using namespace msr;
using Catch::Matchers::WithinAbs;

TEST_CASE("logistic weight basics") {
    const LogisticWeight w{0.8};
    CHECK_THAT(w(0.0), WithinAbs(0.5, 1e-16));
    for (double y : {-30.0, -2.0, -0.3, 0.4, 5.0, 400.0})
        CHECK_THAT(w(y) + w(-y), WithinAbs(1.0, 1e-15));
    CHECK(std::isfinite(w(1e8)));
    CHECK(w(1e8) == 0.0);
    CHECK_THROWS_AS(LogisticWeight{-0.1}, std::domain_error);
    CHECK_THROWS_AS(LogisticWeight{std::nan("")}, std::domain_error);
}

TEST_CASE("stable_logistic agrees with the naive formula in the safe range") {
    for (double t : {-30.0, -1.0, 0.0, 0.5, 20.0})
        CHECK_THAT(stable_logistic(t), WithinAbs(1.0 / (1.0 + std::exp(-t)), 1e-15));
    CHECK(stable_logistic(800.0) == 1.0);
    CHECK(stable_logistic(-800.0) == 0.0);
}

TEST_CASE("rho at zero is exactly one quarter") {
    CHECK_THAT(rho(0.0), WithinAbs(0.25, 1e-12));
}

TEST_CASE("rho stays in (0, 1/4] on [0, 10]") {
    for (int i = 0; i <= 100; ++i) {
        const double a = 0.1 * i;
        const double v = rho(a);
        REQUIRE(v > 0.0);
        REQUIRE(v <= 0.25 + 1e-12);
    }
}

TEST_CASE("rho rejects bad arguments") {
    CHECK_THROWS_AS(rho(-0.5), std::domain_error);
    CHECK_THROWS_AS(rho(std::numeric_limits<double>::infinity()), std::domain_error);
    CHECK_THROWS_AS(rho_shifted(1.0, std::nan("")), std::domain_error);
}

TEST_CASE("rho matches a Monte Carlo oracle at a = 0.5") {
    // oracle: plain sample mean of the squared weight under N(0.5, 1)
    std::mt19937_64 gen(991);
    std::normal_distribution<double> normal(0.5, 1.0);
    const int n = 10'000'000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double y = normal(gen);
        const double w = 1.0 / (1.0 + std::exp(y));  // 2*a*y with a = 0.5
        sum += w * w;
        sum_sq += w * w * w * w;
    }
    const double mc = sum / n;
    const double se = std::sqrt((sum_sq / n - mc * mc) / n);
    CHECK_THAT(rho(0.5), WithinAbs(mc, 3.0 * se));
}

TEST_CASE("rho at tau* reproduces the headline constant") {
    const auto tau = tau_star_cached();
    const double v = rho(tau.tau_star);
    CHECK(tau.tau_star * tau.tau_star * v >= 0.115);
    CHECK(tau.tau_star * tau.tau_star * v <= 0.125);
}

TEST_CASE("rho_shifted basics") {
    CHECK_THAT(rho_shifted(0.0, -3.7), WithinAbs(0.25, 1e-12));
    CHECK_THAT(rho_shifted(0.0, 11.0), WithinAbs(0.25, 1e-12));
    for (double a : {0.4, 1.0, 2.3})
        CHECK(rho_shifted(a, a) == rho(a));  // same code path, bit identical
}

TEST_CASE("reflection identity of the squared weight") {
    // integral of (1-w)^2 phi(.-c) = 1 - 2 int w phi(.-c) + int w^2 phi(.-c)
    for (double a : {0.3, 1.0, 2.0}) {
        for (double c : {-1.5, 0.4, 2.0}) {
            const LogisticWeight w{a};
            const double lhs =
                gauss_expectation([&](double y) { const double d = 1.0 - w(y); return d * d; }, c);
            const double mean_w = gauss_expectation([&](double y) { return w(y); }, c);
            const double rhs = 1.0 - 2.0 * mean_w + rho_shifted(a, c);
            CHECK_THAT(lhs, WithinAbs(rhs, 1e-10));
        }
    }
}

TEST_CASE("rho_shifted at a reflected center via the complement identity") {
    const double direct = rho_shifted(1.0, -1.0);
    const double mean_w =
        gauss_expectation([](double y) { return stable_logistic(-2.0 * y); }, 1.0);
    CHECK_THAT(direct, WithinAbs(1.0 - 2.0 * mean_w + rho_shifted(1.0, 1.0), 1e-10));
}

TEST_CASE("rho_shifted vanishes far from the origin") {
    // exp(-4 a c + 8 a^2) scale: below 1e-8 for a >= 0.2 at c = 30
    for (double a : {0.2, 0.5, 1.0, 2.0}) CHECK(rho_shifted(a, 30.0) < 1e-8);
    // slower slopes need a farther center
    CHECK(rho_shifted(0.05, 100.0) < 1e-8);
    CHECK(rho_shifted(0.05, 30.0) < rho_shifted(0.05, 15.0));
}

TEST_CASE("rho_prime vanishes at zero") {
    CHECK_THAT(rho_prime(0.0), WithinAbs(0.0, 1e-12));
}

TEST_CASE("rho_prime matches central finite differences on [0, 3]") {
    const double h = 1e-5;
    for (int i = 0; i < 50; ++i) {
        const double a = 0.05 + (3.0 - 0.05) * i / 49.0;
        const double fd = (rho(a + h) - rho(a - h)) / (2.0 * h);
        REQUIRE_THAT(rho_prime(a), WithinAbs(fd, 1e-7));
    }
}

TEST_CASE("rho_prime at 0.8 against the finite-difference oracle") {
    const double h = 1e-5;
    const double fd = (rho(0.8 + h) - rho(0.8 - h)) / (2.0 * h);
    CHECK_THAT(rho_prime(0.8), WithinAbs(fd, 1e-7));
}

TEST_CASE("rho_prime satisfies the tau* first-order relation") {
    const auto tau = tau_star_cached();
    CHECK_THAT(rho_prime(tau.tau_star),
               WithinAbs(-2.0 * rho(tau.tau_star) / tau.tau_star, 1e-9));
}

TEST_CASE("rho_shifted_center_derivative matches finite differences") {
    const double h = 1e-5;
    for (double a : {0.3, 0.9}) {
        for (double c : {-0.5, 0.7, 1.8}) {
            const double fd = (rho_shifted(a, c + h) - rho_shifted(a, c - h)) / (2.0 * h);
            CHECK_THAT(rho_shifted_center_derivative(a, c), WithinAbs(fd, 1e-7));
        }
    }
}
