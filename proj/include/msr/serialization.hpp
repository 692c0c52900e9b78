#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <span>
#include <string>

#include "json.hpp"
#include "msr/calibration.hpp"
#include "msr/regret.hpp"
#include "msr/rules.hpp"

namespace msr {

/// Shortest round-trip decimal representation; keeps CSV output bit-stable
/// across platforms.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_double(double v, int significant_digits) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[48];
    const auto res =
        std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, significant_digits);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// JSON bindings
// ---------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const ProblemSpec& s) {
    j = nlohmann::json{{"k", s.k}, {"sigma", s.sigma}};
}

inline void from_json(const nlohmann::json& j, ProblemSpec& s) {
    j.at("k").get_to(s.k);
    j.at("sigma").get_to(s.sigma);
    s.validate();
}

inline void to_json(nlohmann::json& j, const StatePoint& s) {
    j = nlohmann::json{{"theta_e", s.theta_e}, {"theta_t", s.theta_t}};
}

inline void from_json(const nlohmann::json& j, StatePoint& s) {
    j.at("theta_e").get_to(s.theta_e);
    j.at("theta_t").get_to(s.theta_t);
}

inline void to_json(nlohmann::json& j, const TreatmentRule& rule) {
    j = nlohmann::json{{"variant", std::string(rule.variant_name())}};
    struct Fields {
        nlohmann::json& j;
        void operator()(const MsrOptimal& r) const {
            j["a_coeff"] = r.a_coeff;
            j["sigma"] = r.sigma;
        }
        void operator()(const PointIdLogistic& r) const {
            j["tau_star"] = r.tau_star;
            j["sigma"] = r.sigma;
        }
        void operator()(const MeanRegretStep&) const {}
        void operator()(const MeanRegretGaussian& r) const { j["scale"] = r.scale; }
        void operator()(const ConstantHalf&) const {}
        void operator()(const CustomLogistic& r) const {
            j["slope_over_sigma"] = r.slope_over_sigma;
        }
    };
    std::visit(Fields{j}, rule.variant());
}

inline TreatmentRule treatment_rule_from_json(const nlohmann::json& j) {
    const std::string variant = j.at("variant").get<std::string>();
    if (variant == "msr-optimal")
        return TreatmentRule(MsrOptimal{j.at("a_coeff").get<double>(), j.at("sigma").get<double>()});
    if (variant == "point-id-logistic")
        return TreatmentRule(
            PointIdLogistic{j.at("tau_star").get<double>(), j.at("sigma").get<double>()});
    if (variant == "mean-regret-step") return TreatmentRule(MeanRegretStep{});
    if (variant == "mean-regret-gaussian")
        return TreatmentRule(MeanRegretGaussian{j.at("scale").get<double>()});
    if (variant == "constant-half") return TreatmentRule(ConstantHalf{});
    if (variant == "custom-logistic")
        return TreatmentRule(CustomLogistic{j.at("slope_over_sigma").get<double>()});
    throw std::invalid_argument("unknown rule variant: " + variant);
}

inline void to_json(nlohmann::json& j, const CalibrationResult& c) {
    j = nlohmann::json{{"tau_star", c.tau_star},
                       {"a_star", c.a_star},
                       {"worst_case_msr", c.worst_case_msr},
                       {"foc_residual", c.foc_residual},
                       {"soc_value", c.soc_value},
                       {"grid_points_used", c.grid_points_used},
                       {"tie_detected", c.tie_detected}};
}

inline void from_json(const nlohmann::json& j, CalibrationResult& c) {
    j.at("tau_star").get_to(c.tau_star);
    j.at("a_star").get_to(c.a_star);
    j.at("worst_case_msr").get_to(c.worst_case_msr);
    j.at("foc_residual").get_to(c.foc_residual);
    j.at("soc_value").get_to(c.soc_value);
    j.at("grid_points_used").get_to(c.grid_points_used);
    j.at("tie_detected").get_to(c.tie_detected);
}

inline void to_json(nlohmann::json& j, const RiskReport& r) {
    j = nlohmann::json{
        {"mean_regret", r.mean_regret},
        {"mean_square_regret", r.mean_square_regret},
        {"regret_variance", r.regret_variance},
        {"method", r.method == RiskMethod::Quadrature ? "quadrature" : "monte-carlo"}};
    j["mc_draws"] = r.mc_draws ? nlohmann::json(*r.mc_draws) : nlohmann::json(nullptr);
    j["mc_std_error"] = r.mc_std_error ? nlohmann::json(*r.mc_std_error) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, RiskReport& r) {
    j.at("mean_regret").get_to(r.mean_regret);
    j.at("mean_square_regret").get_to(r.mean_square_regret);
    j.at("regret_variance").get_to(r.regret_variance);
    const std::string method = j.at("method").get<std::string>();
    if (method == "quadrature") r.method = RiskMethod::Quadrature;
    else if (method == "monte-carlo") r.method = RiskMethod::MonteCarlo;
    else throw std::invalid_argument("unknown risk method: " + method);
    r.mc_draws = j.at("mc_draws").is_null()
                     ? std::nullopt
                     : std::optional<std::int64_t>(j.at("mc_draws").get<std::int64_t>());
    r.mc_std_error = j.at("mc_std_error").is_null()
                         ? std::nullopt
                         : std::optional<double>(j.at("mc_std_error").get<double>());
}

inline void to_json(nlohmann::json& j, const GridDescription& g) {
    j = nlohmann::json{{"theta_e_min", g.theta_e_min},
                       {"theta_e_max", g.theta_e_max},
                       {"theta_e_points", g.theta_e_points},
                       {"theta_t_points", g.theta_t_points},
                       {"expansions", g.expansions},
                       {"symmetric_fold", g.symmetric_fold}};
    j["reduction_value"] =
        g.reduction_value ? nlohmann::json(*g.reduction_value) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, GridDescription& g) {
    j.at("theta_e_min").get_to(g.theta_e_min);
    j.at("theta_e_max").get_to(g.theta_e_max);
    j.at("theta_e_points").get_to(g.theta_e_points);
    j.at("theta_t_points").get_to(g.theta_t_points);
    j.at("expansions").get_to(g.expansions);
    j.at("symmetric_fold").get_to(g.symmetric_fold);
    g.reduction_value = j.at("reduction_value").is_null()
                            ? std::nullopt
                            : std::optional<double>(j.at("reduction_value").get<double>());
}

inline void to_json(nlohmann::json& j, const WorstCaseResult& w) {
    j = nlohmann::json{{"value", w.value},
                       {"argmax", w.argmax},
                       {"search_grid", w.search_grid},
                       {"refined", w.refined}};
}

inline void from_json(const nlohmann::json& j, WorstCaseResult& w) {
    j.at("value").get_to(w.value);
    j.at("argmax").get_to(w.argmax);
    j.at("search_grid").get_to(w.search_grid);
    j.at("refined").get_to(w.refined);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline void write_surface_csv(std::ostream& os, std::span<const SurfaceRow> rows) {
    os << "theta_e,theta_t,msr,mean_regret\n";
    for (const auto& r : rows)
        os << format_double(r.theta_e) << ',' << format_double(r.theta_t) << ','
           << format_double(r.msr) << ',' << format_double(r.mean_regret) << '\n';
}

}  // namespace msr
