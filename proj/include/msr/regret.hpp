#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "msr/calibration.hpp"
#include "msr/numerics.hpp"
#include "msr/rho.hpp"
#include "msr/rules.hpp"

namespace msr {

/// One parameter point theta = (theta_e, theta_t).
struct StatePoint {
    double theta_e;
    double theta_t;

    StatePoint operator-() const { return {-theta_e, -theta_t}; }
};

inline bool in_parameter_space(const StatePoint& state, const ProblemSpec& spec,
                               double tol = 1e-12) {
    return std::isfinite(state.theta_e) && std::isfinite(state.theta_t) &&
           std::abs(state.theta_t - state.theta_e) <= spec.k + tol * std::max(1.0, spec.k);
}

/// The worst-case search grew past its divergence cap with the incumbent
/// still increasing; the rule's worst-case mean square regret is unbounded
/// over the parameter space.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double bound_reached, double incumbent)
        : std::runtime_error(what), bound_reached_(bound_reached), incumbent_(incumbent) {}

    double bound_reached() const { return bound_reached_; }
    double incumbent() const { return incumbent_; }

private:
    double bound_reached_;
    double incumbent_;
};

namespace detail {

// E[(1{treat} - delta(X))^2] with X ~ N(theta_e, sigma^2).  Step rules
// declare their jump so the quadrature can split there.
inline double expected_sq_deviation(const TreatmentRule& rule, double theta_e, double sigma,
                                    bool treat, const QuadratureConfig& cfg = {}) {
    const double target = treat ? 1.0 : 0.0;
    std::array<double, 1> breaks{};
    std::span<const double> span_breaks{};
    if (auto d = rule.discontinuity()) {
        breaks[0] = *d / sigma;
        span_breaks = breaks;
    }
    return gauss_expectation(
        [&](double y) {
            const double dev = target - rule.evaluate(sigma * y);
            return dev * dev;
        },
        theta_e / sigma, cfg, span_breaks);
}

inline double expected_fraction(const TreatmentRule& rule, double theta_e, double sigma,
                                const QuadratureConfig& cfg = {}) {
    std::array<double, 1> breaks{};
    std::span<const double> span_breaks{};
    if (auto d = rule.discontinuity()) {
        breaks[0] = *d / sigma;
        span_breaks = breaks;
    }
    return gauss_expectation([&](double y) { return rule.evaluate(sigma * y); },
                             theta_e / sigma, cfg, span_breaks);
}

inline void validate_state(const StatePoint& state, double sigma) {
    if (!std::isfinite(state.theta_e) || !std::isfinite(state.theta_t))
        throw std::domain_error("StatePoint: coordinates must be finite");
    if (!std::isfinite(sigma) || sigma <= 0.0)
        throw std::domain_error("sigma must be finite and > 0");
}

}  // namespace detail

/// Mean square regret theta_t^2 E[(1{theta_t >= 0} - delta(X))^2],
/// X ~ N(theta_e, sigma^2), by quadrature.
inline double mean_square_regret(const TreatmentRule& rule, const StatePoint& state, double sigma,
                                 const QuadratureConfig& cfg = {}) {
    detail::validate_state(state, sigma);
    const double c =
        detail::expected_sq_deviation(rule, state.theta_e, sigma, state.theta_t >= 0.0, cfg);
    return state.theta_t * state.theta_t * c;
}

/// Mean regret theta_t (1{theta_t >= 0} - E[delta(X)]); nonnegative for
/// every rule.
inline double mean_regret(const TreatmentRule& rule, const StatePoint& state, double sigma,
                          const QuadratureConfig& cfg = {}) {
    detail::validate_state(state, sigma);
    const double frac = detail::expected_fraction(rule, state.theta_e, sigma, cfg);
    return state.theta_t >= 0.0 ? state.theta_t * (1.0 - frac) : -state.theta_t * frac;
}

// ---------------------------------------------------------------------------
// Monte Carlo regret distribution
// ---------------------------------------------------------------------------

enum class RiskMethod { Quadrature, MonteCarlo };

struct RiskReport {
    double mean_regret;
    double mean_square_regret;
    double regret_variance;
    RiskMethod method;
    std::optional<std::int64_t> mc_draws;
    std::optional<double> mc_std_error;  // standard error of the MSR estimate
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline double uniform01(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Counter-based standard normal draw: the stream depends only on
// (seed, index), so draws are reproducible under any parallel schedule.
inline double normal_draw(std::uint64_t seed, std::uint64_t index) {
    const std::uint64_t base = splitmix64(seed);
    const double u1 = uniform01(splitmix64(base + 2 * index));
    const double u2 = uniform01(splitmix64(base + 2 * index + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace detail

/// Monte Carlo estimate of the regret distribution's mean, second moment
/// and variance.  Deterministic for a fixed seed.
inline RiskReport regret_distribution(const TreatmentRule& rule, const StatePoint& state,
                                      double sigma, std::int64_t draws, std::uint64_t seed) {
    detail::validate_state(state, sigma);
    if (draws < 1) throw std::domain_error("regret_distribution: draws must be >= 1");

    const double ind = state.theta_t >= 0.0 ? 1.0 : 0.0;
    double sum_r = 0.0, sum_r2 = 0.0, sum_r4 = 0.0;
    for (std::int64_t i = 0; i < draws; ++i) {
        const double x = state.theta_e + sigma * detail::normal_draw(seed, static_cast<std::uint64_t>(i));
        const double r = state.theta_t * (ind - rule.evaluate(x));
        sum_r += r;
        sum_r2 += r * r;
        sum_r4 += r * r * r * r;
    }
    const double n = static_cast<double>(draws);
    const double mean = sum_r / n;
    const double msr = sum_r2 / n;

    RiskReport out;
    out.mean_regret = mean;
    out.mean_square_regret = msr;
    out.method = RiskMethod::MonteCarlo;
    out.mc_draws = draws;
    if (draws > 1) {
        out.regret_variance = std::max(0.0, (sum_r2 - n * mean * mean) / (n - 1.0));
        const double var_r2 = std::max(0.0, (sum_r4 - n * msr * msr) / (n - 1.0));
        out.mc_std_error = std::sqrt(var_r2 / n);
    } else {
        out.regret_variance = 0.0;
        out.mc_std_error = std::nullopt;  // single draw: no dispersion estimate
    }
    return out;
}

/// Quadrature-based risk summary at one state.
inline RiskReport risk_report_quadrature(const TreatmentRule& rule, const StatePoint& state,
                                         double sigma, const QuadratureConfig& cfg = {}) {
    RiskReport out;
    out.mean_regret = mean_regret(rule, state, sigma, cfg);
    out.mean_square_regret = mean_square_regret(rule, state, sigma, cfg);
    out.regret_variance = std::max(0.0, out.mean_square_regret - out.mean_regret * out.mean_regret);
    out.method = RiskMethod::Quadrature;
    return out;
}

// ---------------------------------------------------------------------------
// Worst-case searches
// ---------------------------------------------------------------------------

struct GridDescription {
    double theta_e_min;
    double theta_e_max;
    int theta_e_points;  // columns evaluated across all expansions
    int theta_t_points;  // per column
    int expansions;
    bool symmetric_fold;
    std::optional<double> reduction_value;  // one-dimensional path, logistic rules only
};

struct WorstCaseResult {
    double value;
    StatePoint argmax;
    GridDescription search_grid;
    bool refined;
};

namespace detail {

// sup over theta_tilde in [-k/sigma, inf) of
//   sigma^2 (theta_tilde + k/sigma)^2 rho_shifted(weight_slope, theta_tilde),
// expanding the bracket until the objective stays below 1e-6 of the
// incumbent for three consecutive doublings.
inline double logistic_worst_case_reduction(double weight_slope, const ProblemSpec& spec,
                                            const QuadratureConfig& qcfg,
                                            const OptimizerConfig& ocfg) {
    const double K = spec.ratio();
    const double s2 = spec.sigma * spec.sigma;
    auto objective = [&](double t) {
        const double shifted = t + K;
        return s2 * shifted * shifted * rho_shifted(weight_slope, t, qcfg);
    };
    const double cap = 1e3 * std::max(1.0, K);
    double hi = 4.0;
    ScalarMaximum best = maximize_scalar(objective, -K, hi, ocfg);
    int consecutive_low = 0;
    while (consecutive_low < 3) {
        if (hi > cap)
            throw DivergenceError("worst-case reduction diverges", hi * spec.sigma,
                                  best.max_value);
        const double next = 2.0 * hi;
        const ScalarMaximum seg = maximize_scalar(objective, hi, next, ocfg);
        if (seg.max_value > best.max_value) {
            best = seg;
            consecutive_low = 0;
        } else if (seg.max_value < 1e-6 * best.max_value) {
            ++consecutive_low;
        } else {
            consecutive_low = 0;
        }
        hi = next;
    }
    return best.max_value;
}

struct GridBest {
    double value = -std::numeric_limits<double>::infinity();
    double theta_e = 0.0;
    double theta_t = 0.0;
    double spacing = 0.0;  // column spacing of the segment that produced this value
};

// Scan columns theta_e in [lo, hi] at the given spacing over the folded
// region theta_t in [max(0, theta_e - k), theta_e + k].
inline void scan_columns(const TreatmentRule& rule, const ProblemSpec& spec, double lo, double hi,
                         double spacing, int theta_t_points, const QuadratureConfig& qcfg,
                         GridBest& best, double& segment_max, int& columns) {
    const int n = std::max(2, static_cast<int>(std::ceil((hi - lo) / spacing)) + 1);
    segment_max = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double te = lo + (hi - lo) * i / (n - 1);
        const double t_lo = std::max(0.0, te - spec.k);
        const double t_hi = te + spec.k;
        if (t_hi < t_lo) continue;
        const double c = expected_sq_deviation(rule, te, spec.sigma, true, qcfg);
        ++columns;
        const int m = t_hi > t_lo ? theta_t_points : 1;
        for (int j = 0; j < m; ++j) {
            const double tt = m == 1 ? t_lo : t_lo + (t_hi - t_lo) * j / (m - 1);
            const double v = tt * tt * c;
            segment_max = std::max(segment_max, v);
            if (v > best.value) best = {v, te, tt, (hi - lo) / (n - 1)};
        }
    }
}

}  // namespace detail

/// Worst-case mean square regret over the parameter space.  All rule
/// variants are symmetric (R(theta) = R(-theta)), so the search runs over
/// the theta_t >= 0 half.  The grid over theta_e expands until the tail
/// contribution stays below 1e-6 of the incumbent for three consecutive
/// doublings, then the argmax cell is refined by nested zooming.  Rules of
/// logistic form additionally run the one-dimensional boundary reduction,
/// and the two paths must agree.
inline WorstCaseResult worst_case_msr(const TreatmentRule& rule, const ProblemSpec& spec,
                                      const QuadratureConfig& qcfg = {},
                                      const OptimizerConfig& ocfg = {}) {
    spec.validate();
    const double sigma = spec.sigma;
    const double k = spec.k;

    std::optional<double> reduction;
    if (auto b = rule.observation_logistic_coeff(); b && *b > 0.0)
        reduction = detail::logistic_worst_case_reduction(*b * sigma, spec, qcfg, ocfg);

    const double cap = 1e3 * std::max(sigma, std::max(k, 1.0));
    const int theta_t_points = 41;
    double spacing = sigma / 16.0;
    double B = k + 8.0 * sigma;

    detail::GridBest best;
    int columns = 0;
    int expansions = 0;
    double seg_max = 0.0;
    detail::scan_columns(rule, spec, -k, B, spacing, theta_t_points, qcfg, best, seg_max, columns);

    int consecutive_low = 0;
    while (consecutive_low < 3) {
        if (B > cap)
            throw DivergenceError("worst-case search diverges: incumbent still growing at cap",
                                  B, best.value);
        const double next = 2.0 * B;
        const double seg_spacing = std::max(spacing, (next - B) / 256.0);
        detail::scan_columns(rule, spec, B, next, seg_spacing, theta_t_points, qcfg, best,
                             seg_max, columns);
        ++expansions;
        if (seg_max >= best.value) {
            consecutive_low = 0;  // argmax sits in the newest segment
        } else if (seg_max < 1e-6 * best.value) {
            ++consecutive_low;
        } else {
            consecutive_low = 0;
        }
        B = next;
    }

    // Nested zoom around the argmax cell.  theta_t is parametrized by its
    // position u in the column's feasible interval so the window follows
    // the moving boundary (and collapses cleanly when k = 0).
    double he = best.spacing;
    double hu = 1.0 / (theta_t_points - 1);
    auto u_of = [&](double te, double tt) {
        const double t_lo = std::max(0.0, te - k);
        const double width = te + k - t_lo;
        return width > 0.0 ? (tt - t_lo) / width : 1.0;
    };
    double best_u = u_of(best.theta_e, best.theta_t);
    for (int round = 0; round < 60 && he > 1e-11 * std::max(1.0, std::abs(best.theta_e)); ++round) {
        const detail::GridBest prev = best;
        const double prev_u = best_u;
        for (int i = 0; i < 9; ++i) {
            const double te = std::max(-k, prev.theta_e - he + 2.0 * he * i / 8.0);
            const double t_lo = std::max(0.0, te - k);
            const double t_hi = te + k;
            if (t_hi < t_lo) continue;
            const double c = detail::expected_sq_deviation(rule, te, sigma, true, qcfg);
            for (int j = 0; j < 9; ++j) {
                const double u = std::clamp(prev_u - hu + 2.0 * hu * j / 8.0, 0.0, 1.0);
                const double tt = t_lo + (t_hi - t_lo) * u;
                const double v = tt * tt * c;
                if (v > best.value) {
                    best = {v, te, tt, prev.spacing};
                    best_u = u;
                }
            }
        }
        he *= 0.3;
        hu *= 0.3;
    }

    if (reduction) {
        const double scale = std::max(*reduction, 1e-12);
        if (std::abs(best.value - *reduction) > 1e-6 * scale + 1e-12)
            throw std::runtime_error(
                "worst_case_msr: 1-D reduction and 2-D grid disagree beyond tolerance");
    }

    WorstCaseResult out;
    out.value = best.value;
    out.argmax = {best.theta_e, best.theta_t};
    out.search_grid = {-k, B, columns, theta_t_points, expansions, true, reduction};
    out.refined = true;
    return out;
}

/// Bayes mean square regret under the symmetric two-point prior at
/// +/- support_point.
inline double bayes_msr_two_point(const TreatmentRule& rule, const ProblemSpec& spec,
                                  const StatePoint& support_point,
                                  const QuadratureConfig& cfg = {}) {
    spec.validate();
    if (!in_parameter_space(support_point, spec))
        throw std::domain_error("bayes_msr_two_point: support point outside parameter space");
    return 0.5 * mean_square_regret(rule, support_point, spec.sigma, cfg) +
           0.5 * mean_square_regret(rule, -support_point, spec.sigma, cfg);
}

/// Closed-form worst-case mean square regret of the subproblem's minimax
/// rule over the segment {s (a_e, a_t) : s in [-1, 1]}.
inline double subproblem_worst_case(const SubproblemSpec& sub, const ProblemSpec& spec,
                                    const QuadratureConfig& cfg = {}) {
    sub.validate(spec);
    const TauStarResult tau = tau_star_cached();
    const double t = sub.a_e / spec.sigma;
    if (t >= tau.tau_star) {
        const double ratio = sub.a_t * spec.sigma / sub.a_e;
        return ratio * ratio * tau.value;
    }
    return sub.a_t * sub.a_t * rho(t, cfg);
}

// ---------------------------------------------------------------------------
// Regret surfaces
// ---------------------------------------------------------------------------

struct SurfaceRow {
    double theta_e;
    double theta_t;
    double msr;
    double mean_regret;
};

/// Risk surface on a grid over theta_e, with theta_t clipped to the
/// identified set of each column.
inline std::vector<SurfaceRow> compute_surface(const TreatmentRule& rule, const ProblemSpec& spec,
                                               double theta_e_min, double theta_e_max,
                                               int theta_e_points, int theta_t_points,
                                               const QuadratureConfig& cfg = {}) {
    spec.validate();
    if (!(theta_e_min <= theta_e_max) || theta_e_points < 1 || theta_t_points < 1)
        throw std::invalid_argument("compute_surface: bad grid");
    std::vector<SurfaceRow> rows;
    for (int i = 0; i < theta_e_points; ++i) {
        const double te = theta_e_points == 1
                              ? theta_e_min
                              : theta_e_min + (theta_e_max - theta_e_min) * i / (theta_e_points - 1);
        const double c_treat = detail::expected_sq_deviation(rule, te, spec.sigma, true, cfg);
        const double c_skip = detail::expected_sq_deviation(rule, te, spec.sigma, false, cfg);
        const double frac = detail::expected_fraction(rule, te, spec.sigma, cfg);
        const int m = spec.k > 0.0 ? theta_t_points : 1;
        for (int j = 0; j < m; ++j) {
            const double tt = m == 1 ? te : te - spec.k + 2.0 * spec.k * j / (m - 1);
            SurfaceRow row;
            row.theta_e = te;
            row.theta_t = tt;
            row.msr = tt * tt * (tt >= 0.0 ? c_treat : c_skip);
            row.mean_regret = tt >= 0.0 ? tt * (1.0 - frac) : -tt * frac;
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace msr
