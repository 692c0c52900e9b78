#pragma once

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "msr/calibration.hpp"
#include "msr/numerics.hpp"
#include "msr/regret.hpp"
#include "msr/rho.hpp"
#include "msr/rules.hpp"

namespace msr {

/// Result of one numerical check.  Violations are normalized so that a
/// positive worst_violation means the claim failed by that amount; the
/// per-condition tolerances are recorded in details.
struct CheckOutcome {
    std::string name;
    bool passed;
    double worst_violation;
    nlohmann::json details;
};

namespace detail {

inline CheckOutcome finish_check(std::string name, std::vector<double> violations,
                                 nlohmann::json details) {
    double worst = -std::numeric_limits<double>::infinity();
    for (double v : violations) worst = std::max(worst, v);
    CheckOutcome out;
    out.name = std::move(name);
    out.worst_violation = worst;
    out.passed = worst <= 0.0;
    out.details = std::move(details);
    return out;
}

inline std::string spec_tag(const ProblemSpec& spec) {
    return "k=" + std::to_string(spec.k) + ",sigma=" + std::to_string(spec.sigma);
}

}  // namespace detail

/// g_c*(tau) = tau^2 * integral of w_c^2 phi(.-tau) is nondecreasing on
/// [0, c] and attains its maximum c^2 rho(c) at the right endpoint.
inline CheckOutcome check_lemma1_bounded(double c, const QuadratureConfig& qcfg = {}) {
    const double tau_star = tau_star_cached().tau_star;
    if (!(c > 0.0 && c < tau_star))
        throw std::domain_error("check_lemma1_bounded: c must lie in (0, tau*)");
    const int n = 401;
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
        const double t = c * i / (n - 1);
        g[i] = t * t * rho_shifted(c, t, qcfg);
    }
    double mono_violation = -std::numeric_limits<double>::infinity();
    double grid_max = -std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < n; ++i) mono_violation = std::max(mono_violation, g[i] - g[i + 1]);
    for (double v : g) grid_max = std::max(grid_max, v);
    const double endpoint = c * c * rho(c, qcfg);

    std::vector<double> violations{
        mono_violation - 1e-12,                    // nondecreasing
        grid_max - g.back(),                       // maximum at tau = c
        std::abs(g.back() - endpoint) - 1e-8};     // value c^2 rho(c)
    nlohmann::json details{{"c", c},
                           {"grid", {{"lo", 0.0}, {"hi", c}, {"points", n}}},
                           {"monotone_tolerance", 1e-12},
                           {"value_tolerance", 1e-8},
                           {"endpoint_value", endpoint},
                           {"tolerance", 0.0}};
    return detail::finish_check("lemma1_bounded(c=" + std::to_string(c) + ")",
                                std::move(violations), std::move(details));
}

/// Cross-slope comparisons of the shifted objective:
/// g_c*(tau*) > g_tau**(tau*) and g_c*(c) < g_tau**(c) for 0 < c < tau*.
inline CheckOutcome check_lemma9(double c, const QuadratureConfig& qcfg = {}) {
    const double tau_star = tau_star_cached().tau_star;
    if (!(c > 0.0 && c < tau_star))
        throw std::domain_error("check_lemma9: c must lie in (0, tau*)");
    auto g = [&](double slope, double b) { return b * b * rho_shifted(slope, b, qcfg); };
    const double margin_at_tau = g(c, tau_star) - g(tau_star, tau_star);
    const double margin_at_c = g(tau_star, c) - g(c, c);
    std::vector<double> violations{-margin_at_tau, -margin_at_c};
    nlohmann::json details{{"c", c},
                           {"margin_at_tau_star", margin_at_tau},
                           {"margin_at_c", margin_at_c},
                           {"tolerance", 0.0}};
    return detail::finish_check("lemma9(c=" + std::to_string(c) + ")", std::move(violations),
                                std::move(details));
}

/// Interiority 0 < a* < tau*, first-order condition below 1e-6, and a
/// negative second-order value at the calibrated coefficient.
inline CheckOutcome check_lemma3(const ProblemSpec& spec, const OptimizerConfig& ocfg = {},
                                 const QuadratureConfig& qcfg = {}) {
    const CalibrationResult cal = solve_a_star(spec, ocfg, qcfg);
    std::vector<double> violations{
        -cal.a_star,                     // a* > 0
        cal.a_star - cal.tau_star,       // a* < tau*
        cal.foc_residual - 1e-6,
        cal.soc_value};                  // < 0
    nlohmann::json details{{"k", spec.k},
                           {"sigma", spec.sigma},
                           {"a_star", cal.a_star},
                           {"foc_residual", cal.foc_residual},
                           {"soc_value", cal.soc_value},
                           {"foc_tolerance", 1e-6},
                           {"tolerance", 0.0}};
    return detail::finish_check("lemma3(" + detail::spec_tag(spec) + ")", std::move(violations),
                                std::move(details));
}

/// Sign-flip symmetry of the optimal rule's risk over random states.
inline CheckOutcome check_lemma4_symmetry(const ProblemSpec& spec,
                                          const QuadratureConfig& qcfg = {}) {
    spec.validate();
    const TreatmentRule rule = msr_optimal_rule(spec);
    const int n = 1000;
    const std::uint64_t seed = 20260809;
    const double e_range = 2.0 * spec.k + 6.0 * spec.sigma;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u1 = detail::uniform01(detail::splitmix64(seed + 2 * i));
        const double u2 = detail::uniform01(detail::splitmix64(seed + 2 * i + 1));
        const StatePoint theta{(2.0 * u1 - 1.0) * e_range,
                               (2.0 * u1 - 1.0) * e_range + (2.0 * u2 - 1.0) * spec.k};
        const double r = mean_square_regret(rule, theta, spec.sigma, qcfg);
        const double r_flip = mean_square_regret(rule, -theta, spec.sigma, qcfg);
        worst = std::max(worst, std::abs(r - r_flip));
    }
    std::vector<double> violations{worst - 1e-10};
    nlohmann::json details{{"k", spec.k},
                           {"sigma", spec.sigma},
                           {"states", n},
                           {"seed", seed},
                           {"theta_e_range", e_range},
                           {"tolerance", 1e-10},
                           {"worst_asymmetry", worst}};
    return detail::finish_check("lemma4_symmetry(" + detail::spec_tag(spec) + ")",
                                std::move(violations), std::move(details));
}

/// a* is the global maximizer of g*(t) = (t + k/sigma)^2 rho*(t) on
/// [-k/sigma, inf): grid dominance, finite-difference stationarity at a*,
/// and agreement of the two derivative integrals (rho' vs rho*').
inline CheckOutcome check_lemma5_global_max(const ProblemSpec& spec,
                                            const OptimizerConfig& ocfg = {},
                                            const QuadratureConfig& qcfg = {}) {
    const CalibrationResult cal = solve_a_star(spec, ocfg, qcfg);
    const double a = cal.a_star;
    const double K = spec.ratio();
    auto g = [&](double t) {
        const double s = t + K;
        return s * s * rho_shifted(a, t, qcfg);
    };
    const double peak = g(a);

    // Grid dominance over an expanding bracket.
    double grid_max = -std::numeric_limits<double>::infinity();
    double lo = -K;
    double hi = std::max(4.0, a + 4.0);
    int consecutive_low = 0;
    int points = 0;
    int windows = 0;
    while (consecutive_low < 3) {
        double window_max = -std::numeric_limits<double>::infinity();
        const int n = 2001;
        for (int i = 0; i < n; ++i) {
            const double t = lo + (hi - lo) * i / (n - 1);
            window_max = std::max(window_max, g(t));
        }
        points += n;
        ++windows;
        grid_max = std::max(grid_max, window_max);
        if (windows > 1 && window_max < 1e-6 * peak) ++consecutive_low;
        else if (windows > 1) consecutive_low = 0;
        lo = hi;
        hi = 2.0 * hi;
        if (hi > 1e5) break;
    }

    const double h = 1e-5;
    const double stationarity = std::abs(g(a + h) - g(a - h)) / (2.0 * h);
    const double deriv_gap =
        std::abs(rho_prime(a, qcfg) - rho_shifted_center_derivative(a, a, qcfg));

    std::vector<double> violations{grid_max - (peak + 1e-8), stationarity - 1e-6,
                                   deriv_gap - 1e-7};
    nlohmann::json details{{"k", spec.k},
                           {"sigma", spec.sigma},
                           {"a_star", a},
                           {"peak", peak},
                           {"grid_points", points},
                           {"bracket_hi", lo},
                           {"dominance_tolerance", 1e-8},
                           {"stationarity_fd_step", h},
                           {"stationarity_tolerance", 1e-6},
                           {"derivative_match_tolerance", 1e-7},
                           {"tolerance", 0.0}};
    return detail::finish_check("lemma5_global_max(" + detail::spec_tag(spec) + ")",
                                std::move(violations), std::move(details));
}

/// The score function of the shifted objective has a unique sign change
/// from + to - at a*: (a) the pointwise factor is strictly decreasing in y
/// with one sign change; (b) the smoothed score crosses zero exactly once,
/// within grid resolution of a*.
inline CheckOutcome check_lemma7_sign_change(const ProblemSpec& spec,
                                             const OptimizerConfig& ocfg = {},
                                             const QuadratureConfig& qcfg = {}) {
    const CalibrationResult cal = solve_a_star(spec, ocfg, qcfg);
    const double a = cal.a_star;
    const double K = spec.ratio();
    auto fraction = [&](double y) { return stable_logistic(2.0 * a * y); };

    // (a) pointwise factor, in t-statistic units
    auto w_tilde = [&](double y) {
        const double d = fraction(y);
        const double fourasq = 4.0 * a * a;
        return 1.0 / d - 3.0 * d * fourasq + fourasq - 2.0 * a * (K + y);
    };
    const int ny = 2001;
    std::vector<double> wt(ny);
    for (int i = 0; i < ny; ++i) wt[i] = w_tilde(-10.0 + 20.0 * i / (ny - 1));
    double mono_violation = -std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < ny; ++i) mono_violation = std::max(mono_violation, wt[i + 1] - wt[i]);
    const auto wt_changes = sign_changes(wt, 1e-12);
    const bool wt_ok = wt_changes.size() == 1 &&
                       wt_changes[0].direction == SignChangeDirection::PlusToMinus;

    // (b) smoothed score g(t) = 2 * E[w(y) phi(y - t)]
    auto score_integrand = [&](double y) {
        const double w = stable_logistic(-2.0 * a * y);
        const double d = fraction(y);
        const double w2 = w * w;
        const double fourasq = 4.0 * a * a;
        return w2 - 3.0 * fourasq * w2 * d * d + fourasq * w2 * d -
               2.0 * a * (K + y) * w2 * d;
    };
    auto score = [&](double t) {
        return 2.0 * gauss_expectation(score_integrand, t, qcfg);
    };
    const int nt = 601;
    const double t_lo = a - 4.0;
    const double t_hi = a + 6.0;
    std::vector<double> sc(nt);
    for (int i = 0; i < nt; ++i) sc[i] = score(t_lo + (t_hi - t_lo) * i / (nt - 1));
    const auto sc_changes = sign_changes(sc, 1e-12);
    const bool sc_ok = sc_changes.size() == 1 &&
                       sc_changes[0].direction == SignChangeDirection::PlusToMinus;
    const double spacing = (t_hi - t_lo) / (nt - 1);
    double location_gap = std::numeric_limits<double>::infinity();
    if (sc_ok) {
        const double cross_lo = t_lo + spacing * sc_changes[0].from_index;
        const double cross_hi = t_lo + spacing * sc_changes[0].to_index;
        location_gap = std::max(std::max(cross_lo - a, a - cross_hi), 0.0);
    }

    std::vector<double> violations{mono_violation,
                                   wt_ok ? -1.0 : 1.0,
                                   sc_ok ? -1.0 : 1.0,
                                   sc_ok ? location_gap - spacing : 1.0};
    nlohmann::json details{{"k", spec.k},
                           {"sigma", spec.sigma},
                           {"a_star", a},
                           {"y_grid", {{"lo", -10.0}, {"hi", 10.0}, {"points", ny}}},
                           {"score_grid", {{"lo", t_lo}, {"hi", t_hi}, {"points", nt}}},
                           {"score_sign_changes", sc_changes.size()},
                           {"pointwise_sign_changes", wt_changes.size()},
                           {"tolerance", 0.0}};
    return detail::finish_check("lemma7_sign_change(" + detail::spec_tag(spec) + ")",
                                std::move(violations), std::move(details));
}

/// Minimax sandwich: the full two-dimensional worst case of the optimal
/// rule equals the hardest-subproblem value and the two-point Bayes risk,
/// and no challenger rule achieves a lower worst case.
inline CheckOutcome check_theorem1(const ProblemSpec& spec, const OptimizerConfig& ocfg = {},
                                   const QuadratureConfig& qcfg = {}) {
    const CalibrationResult cal = solve_a_star(spec, ocfg, qcfg);
    const double hardest = cal.worst_case_msr;
    const TreatmentRule optimal = msr_optimal_rule(spec, ocfg);
    const double wc_opt = worst_case_msr(optimal, spec, qcfg, ocfg).value;
    const double bayes = bayes_msr_two_point(
        optimal, spec, {cal.a_star * spec.sigma, cal.a_star * spec.sigma + spec.k}, qcfg);

    std::vector<double> violations{std::abs(wc_opt - hardest) - 1e-4 * hardest,
                                   std::abs(bayes - hardest) - 1e-8};

    std::vector<TreatmentRule> challengers;
    std::vector<std::string> names;
    for (double factor : {0.25, 0.5, 0.75, 1.25, 1.5}) {
        challengers.emplace_back(CustomLogistic{factor * cal.a_star / spec.sigma});
        names.push_back("logistic(" + std::to_string(factor) + "*a*)");
    }
    if (std::abs(cal.tau_star - cal.a_star) > 1e-9) {
        challengers.emplace_back(CustomLogistic{cal.tau_star / spec.sigma});
        names.push_back("logistic(tau*)");
    }
    challengers.emplace_back(CustomLogistic{2.0 / spec.sigma});
    names.push_back("logistic(2.0)");
    challengers.emplace_back(CustomLogistic{3.0 / spec.sigma});
    names.push_back("logistic(3.0)");
    challengers.emplace_back(mean_regret_rule(spec));
    names.push_back("mean-regret");
    challengers.emplace_back(MeanRegretStep{});
    names.push_back("step");
    challengers.emplace_back(ConstantHalf{});
    names.push_back("constant-half");

    nlohmann::json challenger_report = nlohmann::json::array();
    for (std::size_t i = 0; i < challengers.size(); ++i) {
        double wc;
        bool diverged = false;
        try {
            wc = worst_case_msr(challengers[i], spec, qcfg, ocfg).value;
        } catch (const DivergenceError&) {
            wc = std::numeric_limits<double>::infinity();
            diverged = true;
        }
        violations.push_back(diverged ? -1.0 : (wc_opt - 1e-8) - wc);
        challenger_report.push_back({{"rule", names[i]},
                                     {"worst_case", diverged ? -1.0 : wc},
                                     {"diverged", diverged}});
    }

    nlohmann::json details{{"k", spec.k},
                           {"sigma", spec.sigma},
                           {"a_star", cal.a_star},
                           {"worst_case_2d", wc_opt},
                           {"hardest_subproblem", hardest},
                           {"bayes_two_point", bayes},
                           {"sandwich_rel_tolerance", 1e-4},
                           {"bayes_tolerance", 1e-8},
                           {"challenger_slack", 1e-8},
                           {"challengers", challenger_report},
                           {"tolerance", 0.0}};
    return detail::finish_check("theorem1(" + detail::spec_tag(spec) + ")",
                                std::move(violations), std::move(details));
}

/// For the uninformative subproblem the objective
/// a_t^2 [max((1-mu)^2, mu^2) + V] over (mu, V) in [0,1] x [0, 1/4] is
/// minimized at mu = 1/2, V = 0 with value a_t^2/4.
inline CheckOutcome check_uninformative_subproblem(double a_t) {
    if (a_t == 0.0 || !std::isfinite(a_t))
        throw std::domain_error("check_uninformative_subproblem: a_t must be nonzero");
    const int n_mu = 101;
    const int n_v = 51;
    double min_value = std::numeric_limits<double>::infinity();
    double argmin_mu = 0.0, argmin_v = 0.0;
    for (int i = 0; i < n_mu; ++i) {
        const double mu = static_cast<double>(i) / (n_mu - 1);
        for (int j = 0; j < n_v; ++j) {
            const double v = 0.25 * j / (n_v - 1);
            const double value =
                a_t * a_t * (std::max((1.0 - mu) * (1.0 - mu), mu * mu) + v);
            if (value < min_value) {
                min_value = value;
                argmin_mu = mu;
                argmin_v = v;
            }
        }
    }
    const double expected = a_t * a_t / 4.0;
    std::vector<double> violations{std::abs(min_value - expected) - 1e-12,
                                   std::abs(argmin_mu - 0.5) - 1e-12,
                                   std::abs(argmin_v) - 1e-12};
    nlohmann::json details{{"a_t", a_t},
                           {"grid", {{"mu_points", n_mu}, {"v_points", n_v}}},
                           {"min_value", min_value},
                           {"expected", expected},
                           {"tolerance", 1e-12}};
    return detail::finish_check("uninformative_subproblem(a_t=" + std::to_string(a_t) + ")",
                                std::move(violations), std::move(details));
}

// ---------------------------------------------------------------------------
// Suite driver
// ---------------------------------------------------------------------------

struct SuiteConfig {
    std::vector<double> c_values = {0.1, 0.3, 0.6, 0.9, 1.1};
    std::vector<double> a_t_values = {1.0, 2.0, -1.0};
    bool boundary_stress_c = true;  // additionally test c = tau* - 1e-3
    bool include_theorem1 = true;
};

/// Runs every check: the spec-independent ones once, the spec-dependent
/// ones per entry of spec_list.
inline std::vector<CheckOutcome> run_suite(std::span<const ProblemSpec> spec_list,
                                           const SuiteConfig& suite = {}) {
    std::vector<CheckOutcome> out;
    std::vector<double> cs = suite.c_values;
    if (suite.boundary_stress_c) cs.push_back(tau_star_cached().tau_star - 1e-3);
    for (double c : cs) {
        out.push_back(check_lemma1_bounded(c));
        out.push_back(check_lemma9(c));
    }
    for (double a_t : suite.a_t_values) out.push_back(check_uninformative_subproblem(a_t));
    for (const ProblemSpec& spec : spec_list) {
        out.push_back(check_lemma3(spec));
        out.push_back(check_lemma4_symmetry(spec));
        out.push_back(check_lemma5_global_max(spec));
        out.push_back(check_lemma7_sign_change(spec));
        if (suite.include_theorem1) out.push_back(check_theorem1(spec));
    }
    return out;
}

inline bool all_passed(std::span<const CheckOutcome> outcomes) {
    for (const auto& o : outcomes)
        if (!o.passed) return false;
    return true;
}

inline void to_json(nlohmann::json& j, const CheckOutcome& o) {
    j = nlohmann::json{{"name", o.name},
                       {"passed", o.passed},
                       {"worst_violation", o.worst_violation},
                       {"details", o.details}};
}

inline void render_report(std::ostream& os, std::span<const CheckOutcome> outcomes) {
    for (const auto& o : outcomes) {
        os << (o.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(48) << o.name
           << "  worst violation " << std::scientific << std::setprecision(3)
           << o.worst_violation << "\n";
        os.unsetf(std::ios::floatfield);
    }
    std::size_t failed = 0;
    for (const auto& o : outcomes)
        if (!o.passed) ++failed;
    os << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed")
       << " (" << outcomes.size() << " total)\n";
}

}  // namespace msr
