#pragma once

#include <cmath>
#include <stdexcept>

#include "msr/numerics.hpp"
#include "msr/rho.hpp"

namespace msr {

/// The known environment: half-width k of the identified set
/// [theta_e - k, theta_e + k] and standard deviation sigma of the
/// experimental estimate.  Both in welfare units.
struct ProblemSpec {
    double k = 0.0;
    double sigma = 1.0;

    void validate() const {
        if (!std::isfinite(k) || k < 0.0)
            throw std::domain_error("ProblemSpec: k must be finite and >= 0");
        if (!std::isfinite(sigma) || sigma <= 0.0)
            throw std::domain_error("ProblemSpec: sigma must be finite and > 0");
    }

    double ratio() const { return k / sigma; }
};

struct TauStarResult {
    double tau_star;
    double value;  // tau_star^2 * rho(tau_star)
};

struct CalibrationResult {
    double tau_star;
    double a_star;
    double worst_case_msr;  // sigma^2 (a* + k/sigma)^2 rho(a*), squared-welfare units
    double foc_residual;    // |2 rho(a*) + (a* + k/sigma) rho'(a*)|
    double soc_value;       // 3 rho'(a*) + (a* + k/sigma) rho''(a*), expected negative
    int grid_points_used;
    bool tie_detected;      // grid maximizer was not unique within 1e-12
};

/// First-order-condition residual of the calibration objective
/// (a + k/sigma)^2 rho(a):  2 rho(a) + (a + k/sigma) rho'(a).
inline double foc_residual(double a, const ProblemSpec& spec,
                           const QuadratureConfig& qcfg = {}) {
    spec.validate();
    if (!std::isfinite(a) || a < 0.0)
        throw std::domain_error("foc_residual: a must be finite and >= 0");
    return 2.0 * rho(a, qcfg) + (a + spec.ratio()) * rho_prime(a, qcfg);
}

namespace detail {

// rho is even in its argument, so rho' extends to an odd function; this
// keeps central differences valid near zero.
inline double rho_prime_extended(double a, const QuadratureConfig& qcfg) {
    return a < 0.0 ? -rho_prime(-a, qcfg) : rho_prime(a, qcfg);
}

inline double rho_second(double a, const QuadratureConfig& qcfg, double h = 1e-4) {
    return (rho_prime_extended(a + h, qcfg) - rho_prime_extended(a - h, qcfg)) / (2.0 * h);
}

// Newton iterations on the FOC, started from a grid+golden-section estimate.
// The raw maximization resolves the argmax only to ~sqrt(noise/curvature);
// polishing against the analytic first-order condition brings the residual
// down to quadrature accuracy.
inline double polish_stationary_point(double a0, double ratio, double lo, double hi,
                                      const QuadratureConfig& qcfg) {
    double a = a0;
    for (int iter = 0; iter < 12; ++iter) {
        const double r = 2.0 * rho(a, qcfg) + (a + ratio) * rho_prime(a, qcfg);
        const double rp = 3.0 * rho_prime(a, qcfg) + (a + ratio) * rho_second(a, qcfg);
        if (!std::isfinite(r) || !std::isfinite(rp) || rp >= 0.0) break;
        const double step = r / rp;
        const double next = a - step;
        if (!(next > lo && next < hi)) break;
        a = next;
        if (std::abs(step) < 1e-13) break;
    }
    return a;
}

}  // namespace detail

/// Maximizes tau^2 rho(tau).  The search bracket [0, 6] truncates the
/// half-line; the objective at 6 is verified to sit below 10% of the
/// interior maximum.
inline TauStarResult solve_tau_star(const OptimizerConfig& cfg = {},
                                    const QuadratureConfig& qcfg = {}) {
    auto objective = [&](double t) { return t * t * rho(t, qcfg); };
    const ScalarMaximum m = maximize_scalar(objective, 0.0, 6.0, cfg);
    const double tau = detail::polish_stationary_point(m.argmax, 0.0, 0.5, 6.0, qcfg);
    const double value = objective(tau);
    if (!(objective(6.0) < 0.1 * value))
        throw std::logic_error("solve_tau_star: objective not decayed at bracket end");
    return {tau, value};
}

/// tau* computed once per process with the default configuration.
inline const TauStarResult& tau_star_cached() {
    static const TauStarResult cached = solve_tau_star();
    return cached;
}

/// Solves the constrained calibration (3): maximize (a + k/sigma)^2 rho(a)
/// over [0, tau*].  k = 0 short-circuits to the boundary maximizer a* = tau*.
inline CalibrationResult solve_a_star(const ProblemSpec& spec, const OptimizerConfig& cfg = {},
                                      const QuadratureConfig& qcfg = {}) {
    spec.validate();
    cfg.validate();
    const TauStarResult tau = tau_star_cached();
    const double ratio = spec.ratio();

    double a;
    bool tie = false;
    if (spec.k == 0.0) {
        a = tau.tau_star;
    } else {
        auto objective = [&](double x) {
            const double shifted = x + ratio;
            return shifted * shifted * rho(x, qcfg);
        };
        const ScalarMaximum m = maximize_scalar(objective, 0.0, tau.tau_star, cfg);
        tie = m.tie_detected;
        const double spacing = tau.tau_star / (cfg.grid_points - 1);
        const double polished =
            detail::polish_stationary_point(m.argmax, ratio, 0.0, tau.tau_star, qcfg);
        // Keep the polished root only if it stayed inside the grid bracket.
        a = (std::abs(polished - m.argmax) <= 2.0 * spacing) ? polished : m.argmax;
    }

    const double rho_a = rho(a, qcfg);
    const double rho_p = rho_prime(a, qcfg);
    const double shifted = a + ratio;
    CalibrationResult out;
    out.tau_star = tau.tau_star;
    out.a_star = a;
    out.worst_case_msr = spec.sigma * spec.sigma * shifted * shifted * rho_a;
    out.foc_residual = std::abs(2.0 * rho_a + shifted * rho_p);
    out.soc_value = 3.0 * rho_p + shifted * detail::rho_second(a, qcfg);
    out.grid_points_used = cfg.grid_points;
    out.tie_detected = tie;
    return out;
}

}  // namespace msr
