// Acceptance suite: every release-gating property of the solver, one
// pass/fail line per criterion.  Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "msr/msr.hpp"

namespace {

struct Criterion {
    int id;
    std::string title;
    std::function<void(std::vector<std::string>&)> run;
};

void expect(std::vector<std::string>& failures, bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
}

std::string fmt(double v) { return msr::format_double(v, 6); }

// --- criterion bodies -------------------------------------------------------

void criterion1_constants(std::vector<std::string>& failures) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto tau = msr::solve_tau_star();
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    expect(failures, tau.tau_star >= 1.22 && tau.tau_star <= 1.24,
           "tau* = " + fmt(tau.tau_star) + " outside [1.22, 1.24]");
    expect(failures, tau.value >= 0.115 && tau.value <= 0.125,
           "tau*^2 rho(tau*) = " + fmt(tau.value) + " outside [0.115, 0.125]");
    expect(failures, elapsed < 1.0, "runtime " + fmt(elapsed) + " s exceeds 1 s");
}

void criterion2_foc(std::vector<std::string>& failures) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 50; ++i) {
        const double ratio = std::pow(10.0, -2.0 + 4.0 * i / 49.0);
        const msr::ProblemSpec spec{ratio, 1.0};
        const auto cal = msr::solve_a_star(spec);
        const double residual = std::abs(msr::foc_residual(cal.a_star, spec));
        if (residual >= 1e-6) {
            failures.push_back("k/sigma = " + fmt(ratio) + ": |FOC| = " + fmt(residual));
        }
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    expect(failures, elapsed < 30.0, "runtime " + fmt(elapsed) + " s exceeds 30 s");
}

void criterion3_monotonicity(std::vector<std::string>& failures) {
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 1000; ++i) {
        const double k = i / 100.0;
        const double a = msr::solve_a_star(msr::ProblemSpec{k, 1.0}).a_star;
        if (!(a < prev - 1e-8)) {
            failures.push_back("a*(k) not strictly decreasing at k = " + fmt(k));
            break;
        }
        prev = a;
    }
    prev = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 100; ++i) {
        const double sigma = i / 10.0;
        const double a = msr::solve_a_star(msr::ProblemSpec{1.0, sigma}).a_star;
        if (!(a > prev + 1e-8)) {
            failures.push_back("a*(sigma) not strictly increasing at sigma = " + fmt(sigma));
            break;
        }
        prev = a;
    }
}

void criterion4_sandwich(std::vector<std::string>& failures) {
    const auto t0 = std::chrono::steady_clock::now();
    for (double ratio : {0.25, 1.0, 4.0}) {
        const msr::ProblemSpec spec{ratio, 1.0};
        const auto cal = msr::solve_a_star(spec);
        const double hardest = cal.worst_case_msr;
        const auto rule = msr::msr_optimal_rule(spec);
        const double wc2d = msr::worst_case_msr(rule, spec).value;
        const double bayes = msr::bayes_msr_two_point(
            rule, spec, {cal.a_star * spec.sigma, cal.a_star * spec.sigma + spec.k});
        const double worst_gap =
            std::max({std::abs(wc2d - hardest), std::abs(bayes - hardest),
                      std::abs(wc2d - bayes)}) / hardest;
        if (worst_gap >= 1e-4) {
            failures.push_back("k/sigma = " + fmt(ratio) + ": sandwich relative gap " +
                               fmt(worst_gap));
        }
        const auto outcome = msr::check_theorem1(spec);
        if (outcome.details.at("challengers").size() < 10)
            failures.push_back("fewer than 10 challenger rules");
        if (!outcome.passed) {
            failures.push_back("k/sigma = " + fmt(ratio) + ": challenger check failed (" +
                               outcome.details.dump() + ")");
        }
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    expect(failures, elapsed < 300.0, "runtime " + fmt(elapsed) + " s exceeds 5 min");
}

void criterion5_point_identified(std::vector<std::string>& failures) {
    for (double sigma : {1.0, 2.0}) {
        const msr::ProblemSpec spec{0.0, sigma};
        const auto rule = msr::msr_optimal_rule(spec);
        const double tau = msr::tau_star_cached().tau_star;
        for (int i = 0; i < 100; ++i) {
            const double x = -5.0 * sigma + 10.0 * sigma * i / 99.0;
            const double klq = msr::stable_logistic(2.0 * tau * x / sigma);
            if (std::abs(rule.evaluate(x) - klq) >= 1e-6) {
                failures.push_back("sigma = " + fmt(sigma) + ": rule differs from KLQ at x = " +
                                   fmt(x));
                break;
            }
        }
        const double wc = msr::worst_case_msr(rule, spec).value;
        const double lemma1_value = sigma * sigma * msr::tau_star_cached().value;
        if (std::abs(wc - lemma1_value) >= 1e-3 * lemma1_value) {
            failures.push_back("sigma = " + fmt(sigma) + ": worst case " + fmt(wc) +
                               " vs Lemma 1 value " + fmt(lemma1_value));
        }
    }
}

void criterion6_mean_regret_threshold(std::vector<std::string>& failures) {
    const double sigma = 1.3;
    const double threshold = msr::mean_regret_step_threshold(sigma);
    expect(failures,
           std::holds_alternative<msr::MeanRegretStep>(
               msr::mean_regret_rule(msr::ProblemSpec{threshold, sigma}).variant()),
           "rule at k = sqrt(pi/2) sigma is not the empirical success rule");
    const double above = std::nextafter(threshold, 2.0 * threshold);
    const auto rule = msr::mean_regret_rule(msr::ProblemSpec{above, sigma});
    expect(failures, std::holds_alternative<msr::MeanRegretGaussian>(rule.variant()),
           "rule just above the threshold is not Gaussian");
    for (double k : {2.0, 3.5, 10.0}) {
        const auto gaussian = msr::mean_regret_rule(msr::ProblemSpec{k, sigma});
        const auto* g = std::get_if<msr::MeanRegretGaussian>(&gaussian.variant());
        if (g == nullptr) {
            failures.push_back("k = " + fmt(k) + ": expected the Gaussian-CDF rule");
            continue;
        }
        const double expected = std::sqrt(2.0 * k * k / std::numbers::pi - sigma * sigma);
        if (std::abs(g->scale - expected) > 1e-12)
            failures.push_back("k = " + fmt(k) + ": scale " + fmt(g->scale) + " vs " +
                               fmt(expected));
    }
}

void criterion7_oracles(std::vector<std::string>& failures) {
    // quadrature vs plain Monte Carlo, 1e7 draws per point
    std::mt19937_64 gen(555);
    for (double a : {0.25, 0.5, 1.0, 1.23, 2.0}) {
        std::normal_distribution<double> normal(a, 1.0);
        const int n = 10'000'000;
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double y = normal(gen);
            const double w = 1.0 / (1.0 + std::exp(2.0 * a * y));
            sum += w * w;
            sum_sq += w * w * w * w;
        }
        const double mc = sum / n;
        const double se = std::sqrt((sum_sq / n - mc * mc) / n);
        const double quad = msr::rho(a);
        if (std::abs(quad - mc) > 3.0 * se) {
            failures.push_back("rho(" + fmt(a) + ") = " + fmt(quad) + " vs MC " + fmt(mc) +
                               " (3se = " + fmt(3.0 * se) + ")");
        }
    }
    // analytic derivative vs central differences
    const double h = 1e-5;
    for (int i = 0; i < 50; ++i) {
        const double a = 0.05 + (3.0 - 0.05) * i / 49.0;
        const double fd = (msr::rho(a + h) - msr::rho(a - h)) / (2.0 * h);
        if (std::abs(msr::rho_prime(a) - fd) >= 1e-7) {
            failures.push_back("rho'(" + fmt(a) + ") differs from finite differences");
            break;
        }
    }
}

void criterion8_appendix_suite(std::vector<std::string>& failures) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<msr::CheckOutcome> outcomes;
    for (double c : {0.3, 0.6, 1.0, msr::tau_star_cached().tau_star - 1e-3}) {
        outcomes.push_back(msr::check_lemma1_bounded(c));
        outcomes.push_back(msr::check_lemma9(c));
    }
    for (double a_t : {1.0, 2.0, -1.0})
        outcomes.push_back(msr::check_uninformative_subproblem(a_t));
    for (double ratio : {0.1, 1.0, 10.0}) {
        const msr::ProblemSpec spec{ratio, 1.0};
        outcomes.push_back(msr::check_lemma4_symmetry(spec));
        outcomes.push_back(msr::check_lemma5_global_max(spec));
        outcomes.push_back(msr::check_lemma7_sign_change(spec));
    }
    for (const auto& o : outcomes)
        if (!o.passed)
            failures.push_back(o.name + " failed (worst violation " +
                               fmt(o.worst_violation) + ")");
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    expect(failures, elapsed < 300.0, "runtime " + fmt(elapsed) + " s exceeds 5 min");
}

void criterion9_figure_properties(std::vector<std::string>& failures) {
    const double sigma = 1.0;
    const double threshold = msr::mean_regret_step_threshold(sigma);
    struct Entry {
        std::string label;
        bool infinite;
        double k;
    };
    const std::vector<Entry> ks{{"0", false, 0.0},   {"0.5", false, 0.5},
                                {"1.0", false, 1.0}, {"1.2533", false, 1.2533},
                                {"2.0", false, 2.0}, {"inf", true, 0.0}};
    for (const auto& entry : ks) {
        std::vector<double> z_grid, msr_col, mr_col;
        bool mr_is_binary = true;
        for (int i = 0; i < 401; ++i) z_grid.push_back(-4.0 + 8.0 * i / 400.0);
        if (entry.infinite) {
            for (std::size_t i = 0; i < z_grid.size(); ++i) {
                msr_col.push_back(0.5);
                mr_col.push_back(0.5);
            }
            mr_is_binary = false;
        } else {
            const msr::ProblemSpec spec{entry.k, sigma};
            const auto opt = msr::msr_optimal_rule(spec);
            const auto mr = msr::mean_regret_rule(spec);
            for (double z : z_grid) {
                msr_col.push_back(opt.evaluate(z));
                const double f = mr.evaluate(z);
                mr_col.push_back(f);
                if (f != 0.0 && f != 1.0) mr_is_binary = false;
            }
        }
        for (std::size_t i = 0; i + 1 < z_grid.size(); ++i) {
            if (msr_col[i + 1] < msr_col[i] - 1e-15 || mr_col[i + 1] < mr_col[i] - 1e-15) {
                failures.push_back("k = " + entry.label + ": column not monotone");
                break;
            }
        }
        for (std::size_t i = 0; i < z_grid.size(); ++i) {
            const std::size_t mirror = z_grid.size() - 1 - i;
            if (std::abs(msr_col[i] + msr_col[mirror] - 1.0) > 1e-12) {
                failures.push_back("k = " + entry.label + ": msr column asymmetric");
                break;
            }
            if (z_grid[i] != 0.0 && std::abs(mr_col[i] + mr_col[mirror] - 1.0) > 1e-12) {
                failures.push_back("k = " + entry.label + ": mean-regret column asymmetric");
                break;
            }
        }
        for (double f : msr_col) {
            if (!(f > 0.0 && f < 1.0)) {
                failures.push_back("k = " + entry.label + ": msr column not fractional");
                break;
            }
        }
        if (!entry.infinite) {
            const bool expect_binary = entry.k <= threshold;
            if (mr_is_binary != expect_binary)
                failures.push_back("k = " + entry.label +
                                   ": mean-regret column binary = " +
                                   (mr_is_binary ? "true" : "false") + ", expected " +
                                   (expect_binary ? "true" : "false"));
        } else {
            for (std::size_t i = 0; i < z_grid.size(); ++i) {
                if (msr_col[i] != 0.5 || mr_col[i] != 0.5) {
                    failures.push_back("k = inf: columns not constant 1/2");
                    break;
                }
            }
        }
    }
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "calibration constants tau* and tau*^2 rho(tau*)", criterion1_constants},
        {2, "first-order condition residuals across k/sigma", criterion2_foc},
        {3, "monotonicity of a* in k and sigma", criterion3_monotonicity},
        {4, "minimax sandwich and challenger dominance", criterion4_sandwich},
        {5, "point-identified reduction to the KLQ rule", criterion5_point_identified},
        {6, "mean-regret rule family threshold", criterion6_mean_regret_threshold},
        {7, "Monte Carlo and finite-difference oracles", criterion7_oracles},
        {8, "appendix verification suite", criterion8_appendix_suite},
        {9, "figure data properties", criterion9_figure_properties},
    };

    int failed = 0;
    for (const auto& criterion : criteria) {
        std::vector<std::string> failures;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criterion.run(failures);
        } catch (const std::exception& e) {
            failures.push_back(std::string("exception: ") + e.what());
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (failures.empty()) {
            std::printf("[PASS] criterion %d: %s (%.2f s)\n", criterion.id,
                        criterion.title.c_str(), elapsed);
        } else {
            ++failed;
            std::printf("[FAIL] criterion %d: %s (%.2f s)\n", criterion.id,
                        criterion.title.c_str(), elapsed);
            for (const auto& f : failures) std::printf("       - %s\n", f.c_str());
        }
        std::fflush(stdout);
    }
    if (failed > 0) {
        std::printf("%d of %zu criteria failed\n", failed, criteria.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
