#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace msr {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
inline constexpr double kInvSqrt2 = 0.7071067811865475244008444;

/// Density of the standard normal distribution.
inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

/// CDF of the standard normal distribution, accurate to ~1e-16 via erfc.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

// ---------------------------------------------------------------------------
// Error types
// ---------------------------------------------------------------------------

/// An integrand or objective returned a non-finite value.
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(const std::string& what, double abscissa)
        : std::runtime_error(what + " at x = " + std::to_string(abscissa)),
          abscissa_(abscissa) {}

    double abscissa() const { return abscissa_; }

private:
    double abscissa_;
};

/// The subdivision budget ran out before the requested tolerance was met.
/// Carries the best estimate obtained so far.
class ToleranceError : public std::runtime_error {
public:
    ToleranceError(const std::string& what, double best_estimate, double error_estimate)
        : std::runtime_error(what),
          best_estimate_(best_estimate),
          error_estimate_(error_estimate) {}

    double best_estimate() const { return best_estimate_; }
    double error_estimate() const { return error_estimate_; }

private:
    double best_estimate_;
    double error_estimate_;
};

class BracketError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct QuadratureConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double truncation_radius = 12.0;  // in standard deviations
    int max_subdivisions = 60;

    void validate() const {
        if (!(abs_tol > 0.0) || !std::isfinite(abs_tol))
            throw std::invalid_argument("QuadratureConfig: abs_tol must be positive");
        if (!(rel_tol > 0.0) || !std::isfinite(rel_tol))
            throw std::invalid_argument("QuadratureConfig: rel_tol must be positive");
        if (!(truncation_radius >= 6.0) || !std::isfinite(truncation_radius))
            throw std::invalid_argument("QuadratureConfig: truncation_radius must be >= 6");
        if (max_subdivisions < 1)
            throw std::invalid_argument("QuadratureConfig: max_subdivisions must be positive");
    }
};

struct OptimizerConfig {
    double x_tol = 1e-10;
    int grid_points = 2001;
    int max_iter = 200;

    void validate() const {
        if (!(x_tol > 0.0) || !std::isfinite(x_tol))
            throw std::invalid_argument("OptimizerConfig: x_tol must be positive");
        if (grid_points < 3)
            throw std::invalid_argument("OptimizerConfig: grid_points must be >= 3");
        if (max_iter < 1)
            throw std::invalid_argument("OptimizerConfig: max_iter must be positive");
    }
};

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod quadrature
// ---------------------------------------------------------------------------

namespace detail {

struct PanelEstimate {
    double value;
    double error;
    double resabs;
};

// 7-point Gauss / 15-point Kronrod pair on [a, b].  Abscissae and weights
// from QUADPACK dqk15.
template <class F>
PanelEstimate gk15_panel(F&& f, double a, double b) {
    static constexpr double xgk[8] = {
        0.9914553711208126392068547, 0.9491079123427585245261897,
        0.8648644233597690727897128, 0.7415311855993944398638648,
        0.5860872354676911302941448, 0.4058451513773971669066064,
        0.2077849550078984676006894, 0.0000000000000000000000000};
    static constexpr double wgk[8] = {
        0.0229353220105292249637320, 0.0630920926299785532907007,
        0.1047900103222501838398763, 0.1406532597155259187451896,
        0.1690047266392679028265834, 0.1903505780647854099132564,
        0.2044329400752988924141620, 0.2094821410847278772750334};
    static constexpr double wg[4] = {
        0.1294849661688696932706114, 0.2797053914892766679014678,
        0.3818300505051189449503698, 0.4179591836734693877551020};

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    auto eval = [&](double x) {
        const double v = f(x);
        if (!std::isfinite(v)) throw EvaluationError("non-finite integrand value", x);
        return v;
    };

    double fv1[7];
    double fv2[7];
    const double fc = eval(center);
    double resg = fc * wg[3];
    double resk = fc * wgk[7];
    double resabs = std::abs(resk);
    for (int j = 0; j < 3; ++j) {
        const int jtw = 2 * j + 1;
        const double absc = half * xgk[jtw];
        const double f1 = eval(center - absc);
        const double f2 = eval(center + absc);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        const double fsum = f1 + f2;
        resg += wg[j] * fsum;
        resk += wgk[jtw] * fsum;
        resabs += wgk[jtw] * (std::abs(f1) + std::abs(f2));
    }
    for (int j = 0; j < 4; ++j) {
        const int jtwm1 = 2 * j;
        const double absc = half * xgk[jtwm1];
        const double f1 = eval(center - absc);
        const double f2 = eval(center + absc);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        const double fsum = f1 + f2;
        resk += wgk[jtwm1] * fsum;
        resabs += wgk[jtwm1] * (std::abs(f1) + std::abs(f2));
    }

    const double reskh = resk * 0.5;
    double resasc = wgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j)
        resasc += wgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));

    const double value = resk * half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);

    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    const double uflow = std::numeric_limits<double>::min();
    if (resabs > uflow / (50.0 * eps)) err = std::max(eps * 50.0 * resabs, err);

    return {value, err, resabs};
}

struct Panel {
    double a;
    double b;
    double value;
    double error;
    std::uint64_t id;  // insertion order, used as a deterministic tie-break
};

struct PanelWorse {
    // max-heap on error; ties resolved by insertion order
    bool operator()(const Panel& x, const Panel& y) const {
        if (x.error != y.error) return x.error < y.error;
        return x.id > y.id;
    }
};

}  // namespace detail

/// Adaptive quadrature of f over [lo, hi] with optional interior split
/// points (declared discontinuities or kinks of f).  Globally adaptive:
/// the panel with the largest error estimate is bisected until the summed
/// error is below abs_tol + rel_tol*|integral|.
template <class F>
double integrate(F&& f, double lo, double hi, const QuadratureConfig& cfg = {},
                 std::span<const double> interior_breaks = {}) {
    cfg.validate();
    if (!(std::isfinite(lo) && std::isfinite(hi)))
        throw BracketError("integrate: bounds must be finite");
    if (lo > hi) throw BracketError("integrate: lo must not exceed hi");
    if (lo == hi) return 0.0;

    // Seed panels: split at declared breakpoints, then chop every chunk so
    // that no initial panel is wider than (hi-lo)/8.
    std::vector<double> cuts;
    cuts.push_back(lo);
    for (double b : interior_breaks)
        if (b > lo && b < hi) cuts.push_back(b);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());

    std::vector<detail::Panel> heap;
    std::uint64_t next_id = 0;
    const double max_width = (hi - lo) / 8.0;
    double total = 0.0;
    double total_err = 0.0;
    auto push_panel = [&](double a, double b) {
        const auto est = detail::gk15_panel(f, a, b);
        heap.push_back({a, b, est.value, est.error, next_id++});
        std::push_heap(heap.begin(), heap.end(), detail::PanelWorse{});
        total += est.value;
        total_err += est.error;
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (a == b) continue;
        const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / max_width)));
        for (int p = 0; p < pieces; ++p)
            push_panel(a + (b - a) * p / pieces, a + (b - a) * (p + 1) / pieces);
    }

    int subdivisions = 0;
    while (total_err > cfg.abs_tol + cfg.rel_tol * std::abs(total)) {
        if (subdivisions >= cfg.max_subdivisions)
            throw ToleranceError("integrate: subdivision budget exhausted", total, total_err);
        std::pop_heap(heap.begin(), heap.end(), detail::PanelWorse{});
        const detail::Panel worst = heap.back();
        heap.pop_back();
        total -= worst.value;
        total_err -= worst.error;
        const double mid = 0.5 * (worst.a + worst.b);
        push_panel(worst.a, mid);
        push_panel(mid, worst.b);
        ++subdivisions;
    }

    // Re-sum in spatial order so the result does not depend on the heap history.
    std::sort(heap.begin(), heap.end(),
              [](const detail::Panel& x, const detail::Panel& y) { return x.a < y.a; });
    double result = 0.0;
    for (const auto& p : heap) result += p.value;
    return result;
}

/// E[f(Y)] for Y ~ N(mean, 1), computed on the truncated support
/// [mean - truncation_radius, mean + truncation_radius].
template <class F>
double gauss_expectation(F&& f, double mean, const QuadratureConfig& cfg = {},
                         std::span<const double> breakpoints = {}) {
    if (!std::isfinite(mean)) throw std::domain_error("gauss_expectation: mean must be finite");
    const double lo = mean - cfg.truncation_radius;
    const double hi = mean + cfg.truncation_radius;
    return integrate([&](double y) { return f(y) * normal_pdf(y - mean); }, lo, hi, cfg,
                     breakpoints);
}

// ---------------------------------------------------------------------------
// Bracketed scalar maximization
// ---------------------------------------------------------------------------

struct ScalarMaximum {
    double argmax;
    double max_value;
    bool tie_detected;  // several grid values within 1e-12 of the maximum
};

/// Two-stage maximization of g over [lo, hi]: dense grid scan followed by
/// golden-section refinement in the bracketing cell of the grid maximizer.
/// Ties on the grid (within 1e-12) resolve to the smallest abscissa.
template <class G>
ScalarMaximum maximize_scalar(G&& g, double lo, double hi, const OptimizerConfig& cfg = {}) {
    cfg.validate();
    if (!(lo < hi)) throw BracketError("maximize_scalar: requires lo < hi");
    if (!(std::isfinite(lo) && std::isfinite(hi)))
        throw BracketError("maximize_scalar: bounds must be finite");

    auto eval = [&](double x) {
        const double v = g(x);
        if (!std::isfinite(v)) throw EvaluationError("non-finite objective value", x);
        return v;
    };

    const int n = cfg.grid_points;
    auto grid_x = [&](int i) { return lo + (hi - lo) * i / (n - 1); };

    constexpr double tie_tol = 1e-12;
    std::vector<double> values(n);
    double best_value = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        values[i] = eval(grid_x(i));
        best_value = std::max(best_value, values[i]);
    }
    int best_i = 0;
    while (values[best_i] < best_value - tie_tol) ++best_i;
    bool tie = false;
    for (int i = best_i + 1; i < n; ++i)
        if (values[i] >= best_value - tie_tol) { tie = true; break; }

    double a = grid_x(std::max(0, best_i - 1));
    double b = grid_x(std::min(n - 1, best_i + 1));

    // Golden-section refinement.  On ties the left half is kept, so a
    // plateau resolves to its smallest abscissa.
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = eval(c);
    double fd = eval(d);
    for (int iter = 0; iter < cfg.max_iter && (b - a) > cfg.x_tol; ++iter) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = eval(d);
        }
    }

    // Pick the best candidate seen; ties resolve to the smallest abscissa.
    double arg = grid_x(best_i);
    double val = values[best_i];
    for (double x : {a, 0.5 * (a + b), b}) {
        const double v = eval(x);
        if (v > val + tie_tol || (v >= val - tie_tol && x < arg)) {
            arg = x;
            val = std::max(val, v);
        }
    }
    return {arg, val, tie};
}

// ---------------------------------------------------------------------------
// Sign-change detection
// ---------------------------------------------------------------------------

enum class SignChangeDirection { PlusToMinus, MinusToPlus };

struct SignChange {
    std::size_t from_index;  // last index of the preceding sign run
    std::size_t to_index;    // first index of the new sign
    SignChangeDirection direction;
};

/// Strict +/- transitions in an ordered list; |v| <= zero_tol counts as zero
/// and runs of zeros collapse into a single transition.
inline std::vector<SignChange> sign_changes(std::span<const double> values, double zero_tol) {
    if (values.size() < 2)
        throw std::invalid_argument("sign_changes: need at least two values");
    std::vector<SignChange> out;
    int last_sign = 0;
    std::size_t last_idx = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        const int s = (std::abs(v) <= zero_tol) ? 0 : (v > 0.0 ? 1 : -1);
        if (s == 0) continue;
        if (last_sign != 0 && s != last_sign) {
            out.push_back({last_idx, i,
                           last_sign > 0 ? SignChangeDirection::PlusToMinus
                                         : SignChangeDirection::MinusToPlus});
        }
        last_sign = s;
        last_idx = i;
    }
    return out;
}

}  // namespace msr
