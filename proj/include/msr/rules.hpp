#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <variant>

#include "msr/calibration.hpp"
#include "msr/numerics.hpp"
#include "msr/rho.hpp"

namespace msr {

// ---------------------------------------------------------------------------
// Rule variants.  Every rule maps the raw observation (welfare units) to a
// treatment fraction in [0, 1].
// ---------------------------------------------------------------------------

/// logistic(2 a observation / sigma), the calibrated minimax rule.
struct MsrOptimal {
    double a_coeff;
    double sigma;
};

/// logistic(2 tau* observation / sigma), optimal in the point-identified case.
struct PointIdLogistic {
    double tau_star;
    double sigma;
};

/// 1{observation >= 0}; the boundary observation 0 is treated.
struct MeanRegretStep {};

/// Phi(observation / scale).
struct MeanRegretGaussian {
    double scale;
};

struct ConstantHalf {};

/// logistic(2 * slope_over_sigma * observation).  The coefficient applies to
/// the raw observation; a negative value flips the rule for subproblems with
/// a negative target effect.
struct CustomLogistic {
    double slope_over_sigma;
};

class TreatmentRule {
public:
    using Variant = std::variant<MsrOptimal, PointIdLogistic, MeanRegretStep,
                                 MeanRegretGaussian, ConstantHalf, CustomLogistic>;

    explicit TreatmentRule(Variant v) : variant_(std::move(v)) { validate(); }
    TreatmentRule(MsrOptimal v) : TreatmentRule(Variant{v}) {}
    TreatmentRule(PointIdLogistic v) : TreatmentRule(Variant{v}) {}
    TreatmentRule(MeanRegretStep v) : TreatmentRule(Variant{v}) {}
    TreatmentRule(MeanRegretGaussian v) : TreatmentRule(Variant{v}) {}
    TreatmentRule(ConstantHalf v) : TreatmentRule(Variant{v}) {}
    TreatmentRule(CustomLogistic v) : TreatmentRule(Variant{v}) {}

    const Variant& variant() const { return variant_; }

    std::string_view variant_name() const {
        struct Namer {
            std::string_view operator()(const MsrOptimal&) const { return "msr-optimal"; }
            std::string_view operator()(const PointIdLogistic&) const { return "point-id-logistic"; }
            std::string_view operator()(const MeanRegretStep&) const { return "mean-regret-step"; }
            std::string_view operator()(const MeanRegretGaussian&) const { return "mean-regret-gaussian"; }
            std::string_view operator()(const ConstantHalf&) const { return "constant-half"; }
            std::string_view operator()(const CustomLogistic&) const { return "custom-logistic"; }
        };
        return std::visit(Namer{}, variant_);
    }

    /// Treatment fraction for a finite observation.
    double evaluate(double observation) const {
        if (!std::isfinite(observation))
            throw std::domain_error("TreatmentRule::evaluate: observation must be finite");
        struct Eval {
            double x;
            double operator()(const MsrOptimal& r) const {
                return stable_logistic(2.0 * r.a_coeff * x / r.sigma);
            }
            double operator()(const PointIdLogistic& r) const {
                return stable_logistic(2.0 * r.tau_star * x / r.sigma);
            }
            double operator()(const MeanRegretStep&) const { return x >= 0.0 ? 1.0 : 0.0; }
            double operator()(const MeanRegretGaussian& r) const {
                return normal_cdf(x / r.scale);
            }
            double operator()(const ConstantHalf&) const { return 0.5; }
            double operator()(const CustomLogistic& r) const {
                return stable_logistic(2.0 * r.slope_over_sigma * x);
            }
        };
        return std::visit(Eval{observation}, variant_);
    }

    /// Observation at which the rule jumps, if any.
    std::optional<double> discontinuity() const {
        if (std::holds_alternative<MeanRegretStep>(variant_)) return 0.0;
        return std::nullopt;
    }

    /// For rules of the form logistic(2 b observation): the coefficient b.
    /// Enables the one-dimensional worst-case reduction.
    std::optional<double> observation_logistic_coeff() const {
        if (const auto* r = std::get_if<MsrOptimal>(&variant_)) return r->a_coeff / r->sigma;
        if (const auto* r = std::get_if<PointIdLogistic>(&variant_)) return r->tau_star / r->sigma;
        if (const auto* r = std::get_if<CustomLogistic>(&variant_)) return r->slope_over_sigma;
        return std::nullopt;
    }

private:
    void validate() const {
        struct Check {
            void operator()(const MsrOptimal& r) const {
                if (!std::isfinite(r.a_coeff) || r.a_coeff <= 0.0)
                    throw std::domain_error("MsrOptimal: a_coeff must be > 0");
                if (!std::isfinite(r.sigma) || r.sigma <= 0.0)
                    throw std::domain_error("MsrOptimal: sigma must be > 0");
            }
            void operator()(const PointIdLogistic& r) const {
                if (!std::isfinite(r.tau_star) || r.tau_star <= 0.0)
                    throw std::domain_error("PointIdLogistic: tau_star must be > 0");
                if (!std::isfinite(r.sigma) || r.sigma <= 0.0)
                    throw std::domain_error("PointIdLogistic: sigma must be > 0");
            }
            void operator()(const MeanRegretStep&) const {}
            void operator()(const MeanRegretGaussian& r) const {
                if (!std::isfinite(r.scale) || r.scale <= 0.0)
                    throw std::domain_error("MeanRegretGaussian: scale must be > 0");
            }
            void operator()(const ConstantHalf&) const {}
            void operator()(const CustomLogistic& r) const {
                if (!std::isfinite(r.slope_over_sigma))
                    throw std::domain_error("CustomLogistic: slope must be finite");
            }
        };
        std::visit(Check{}, variant_);
    }

    Variant variant_;
};

inline double evaluate(const TreatmentRule& rule, double observation) {
    return rule.evaluate(observation);
}

// ---------------------------------------------------------------------------
// Rule constructors
// ---------------------------------------------------------------------------

/// The minimax mean-square-regret optimal rule for the given environment.
/// At k = 0 the coefficient equals tau*, the point-identified rule.
inline TreatmentRule msr_optimal_rule(const ProblemSpec& spec, const OptimizerConfig& cfg = {}) {
    const CalibrationResult cal = solve_a_star(spec, cfg);
    return TreatmentRule(MsrOptimal{cal.a_star, spec.sigma});
}

/// Threshold below which the empirical success rule is minimax optimal
/// under mean regret.
inline double mean_regret_step_threshold(double sigma) {
    return sigma * std::sqrt(std::numbers::pi / 2.0);
}

/// The minimax optimal rule under the mean (not squared) regret criterion:
/// the empirical success rule for k <= sqrt(pi/2) sigma, otherwise the
/// Gaussian-CDF rule with scale sqrt(2 k^2/pi - sigma^2).
inline TreatmentRule mean_regret_rule(const ProblemSpec& spec) {
    spec.validate();
    if (spec.k <= mean_regret_step_threshold(spec.sigma))
        return TreatmentRule(MeanRegretStep{});
    const double scale =
        std::sqrt(2.0 * spec.k * spec.k / std::numbers::pi - spec.sigma * spec.sigma);
    return TreatmentRule(MeanRegretGaussian{scale});
}

// ---------------------------------------------------------------------------
// One-dimensional subproblems
// ---------------------------------------------------------------------------

/// The segment {s*(a_e, a_t) : s in [-1, 1]} of the parameter space.
struct SubproblemSpec {
    double a_e;
    double a_t;

    void validate(const ProblemSpec& spec) const {
        spec.validate();
        if (!std::isfinite(a_e) || a_e < 0.0)
            throw std::domain_error("SubproblemSpec: a_e must be finite and >= 0");
        if (!std::isfinite(a_t))
            throw std::domain_error("SubproblemSpec: a_t must be finite");
        const double slack = 1e-12 * std::max(1.0, spec.k);
        if (std::abs(a_t - a_e) > spec.k + slack)
            throw std::domain_error("SubproblemSpec: a_t outside the identified set of a_e");
    }
};

struct SubproblemRuleResult {
    TreatmentRule rule;
    // a_t = 0 makes every rule minimax optimal; ConstantHalf is returned
    // with this flag set.
    bool any_rule_optimal;
};

/// Minimax optimal rule of the one-dimensional subproblem: a logistic
/// transformation of the t-statistic with slope min(a_e/sigma, tau*),
/// oriented by the sign of a_t.  Uninformative subproblems (a_e = 0)
/// ignore the data and treat half the population.
inline SubproblemRuleResult subproblem_rule(const SubproblemSpec& sub, const ProblemSpec& spec) {
    sub.validate(spec);
    if (sub.a_t == 0.0) return {TreatmentRule(ConstantHalf{}), true};
    if (sub.a_e == 0.0) return {TreatmentRule(ConstantHalf{}), false};
    const double slope_t = std::min(sub.a_e / spec.sigma, tau_star_cached().tau_star);
    const double sign = sub.a_t > 0.0 ? 1.0 : -1.0;
    return {TreatmentRule(CustomLogistic{slope_t * sign / spec.sigma}), false};
}

}  // namespace msr
