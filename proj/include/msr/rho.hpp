#pragma once

#include <cmath>
#include <stdexcept>

#include "msr/numerics.hpp"

namespace msr {

/// logistic(t) = 1/(1+exp(-t)), evaluated without overflow for any t.
inline double stable_logistic(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

/// w(y) = 1/(1+exp(2*slope*y)).  The complement 1 - w is the logistic
/// treatment fraction; w(0) = 1/2 and w(y) + w(-y) = 1.
struct LogisticWeight {
    double slope;

    explicit LogisticWeight(double s) : slope(s) {
        if (!std::isfinite(s) || s < 0.0)
            throw std::domain_error("LogisticWeight: slope must be finite and >= 0");
    }

    double operator()(double y) const { return stable_logistic(-2.0 * slope * y); }
};

/// Expected squared logistic weight under an arbitrary unit-variance
/// Gaussian center: integral of (1/(1+exp(2*slope*y)))^2 phi(y - center) dy.
inline double rho_shifted(double slope, double center, const QuadratureConfig& cfg = {}) {
    if (!std::isfinite(center))
        throw std::domain_error("rho_shifted: center must be finite");
    const LogisticWeight w{slope};  // validates slope
    return gauss_expectation([&](double y) {
        const double v = w(y);
        return v * v;
    }, center, cfg);
}

/// rho(a) = E[(1/(1+exp(2*a*Y)))^2] with Y ~ N(a, 1).  Lies in (0, 1/4],
/// with rho(0) = 1/4.
inline double rho(double a, const QuadratureConfig& cfg = {}) {
    return rho_shifted(a, a, cfg);
}

/// Analytic derivative of rho.  The integrand combines the weight-slope
/// term and the density-shift term of d/da rho(a):
///   -4 * d(x) * w(x)^2 * x + w(x)^2 * (x - a),  d = 1 - w.
inline double rho_prime(double a, const QuadratureConfig& cfg = {}) {
    const LogisticWeight w{a};
    return gauss_expectation([&](double x) {
        const double wv = w(x);
        const double dv = 1.0 - wv;
        return -4.0 * dv * wv * wv * x + wv * wv * (x - a);
    }, a, cfg);
}

/// d/dcenter rho_shifted(slope, center); used to test stationarity of the
/// shifted objective at the calibrated coefficient.
inline double rho_shifted_center_derivative(double slope, double center,
                                            const QuadratureConfig& cfg = {}) {
    if (!std::isfinite(center))
        throw std::domain_error("rho_shifted_center_derivative: center must be finite");
    const LogisticWeight w{slope};
    return gauss_expectation([&](double y) {
        const double v = w(y);
        return v * v * (y - center);
    }, center, cfg);
}

}  // namespace msr
