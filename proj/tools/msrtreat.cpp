// msrtreat: minimax mean-square-regret treatment rules under
// interval-identified welfare.  Subcommands cover calibration, rule
// evaluation, regret surfaces, worst-case searches, Monte Carlo regret
// summaries, figure data emission and the numerical verification suite.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "msr/msr.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct KValue {
    bool infinite = false;
    double value = 0.0;
};

KValue parse_k(const std::string& text) {
    if (text == "inf" || text == "Inf" || text == "INF") return {true, 0.0};
    KValue out;
    try {
        std::size_t pos = 0;
        out.value = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
        throw CLI::ValidationError("--k", "expected a nonnegative number or 'inf'");
    }
    if (!(out.value >= 0.0) || !std::isfinite(out.value))
        throw CLI::ValidationError("--k", "expected a nonnegative number or 'inf'");
    return out;
}

std::vector<KValue> parse_k_list(const std::string& text) {
    std::vector<KValue> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(parse_k(item));
    }
    if (out.empty()) throw CLI::ValidationError("--k-list", "expected a comma-separated list");
    return out;
}

nlohmann::json units_metadata() {
    return {{"units",
             {{"k", "welfare"},
              {"sigma", "welfare"},
              {"observation", "welfare"},
              {"theta_e", "welfare"},
              {"theta_t", "welfare"},
              {"mean_regret", "welfare"},
              {"msr", "squared-welfare"}}}};
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream file(out_path, std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open output file: " + out_path);
    file << text;
}

msr::TreatmentRule make_rule(const std::string& name, const msr::ProblemSpec& spec) {
    if (name == "msr") return msr::msr_optimal_rule(spec);
    if (name == "mean-regret") return msr::mean_regret_rule(spec);
    if (name == "point-id")
        return msr::TreatmentRule(
            msr::PointIdLogistic{msr::tau_star_cached().tau_star, spec.sigma});
    if (name == "half") return msr::TreatmentRule(msr::ConstantHalf{});
    throw CLI::ValidationError("--rule", "expected one of msr|mean-regret|point-id|half");
}

std::string k_label(const KValue& k) {
    return k.infinite ? std::string("inf") : msr::format_double(k.value);
}

// ---------------------------------------------------------------------------

int cmd_calibrate(const KValue& k, double sigma, const std::string& format,
                  const std::string& out_path) {
    std::ostringstream os;
    if (k.infinite) {
        if (format == "csv") {
            os << "k,sigma,tau_star,a_star,rule\n";
            os << "inf," << msr::format_double(sigma) << ','
               << msr::format_double(msr::tau_star_cached().tau_star) << ",0,constant-half\n";
        } else {
            nlohmann::json j{{"k", "inf"},
                             {"sigma", sigma},
                             {"tau_star", msr::tau_star_cached().tau_star},
                             {"a_star", 0.0},
                             {"rule", "constant-half"},
                             {"note", "unbounded identified set: treat half the population "
                                      "regardless of the observation"},
                             {"metadata", units_metadata()}};
            os << j.dump(2) << '\n';
        }
        emit(os.str(), out_path);
        return kExitOk;
    }

    const msr::ProblemSpec spec{k.value, sigma};
    const msr::CalibrationResult cal = msr::solve_a_star(spec);
    if (format == "csv") {
        os << "k,sigma,tau_star,a_star,worst_case_msr,foc_residual,soc_value,grid_points_used\n";
        os << msr::format_double(spec.k) << ',' << msr::format_double(spec.sigma) << ','
           << msr::format_double(cal.tau_star) << ',' << msr::format_double(cal.a_star) << ','
           << msr::format_double(cal.worst_case_msr) << ','
           << msr::format_double(cal.foc_residual) << ',' << msr::format_double(cal.soc_value)
           << ',' << cal.grid_points_used << '\n';
    } else {
        nlohmann::json j = cal;
        j["k"] = spec.k;
        j["sigma"] = spec.sigma;
        j["metadata"] = units_metadata();
        os << j.dump(2) << '\n';
    }
    emit(os.str(), out_path);
    return kExitOk;
}

int cmd_rule(const KValue& k, double sigma, const std::string& rule_name, double obs,
             const std::string& format, const std::string& out_path) {
    double fraction;
    if (k.infinite) {
        fraction = rule_name == "point-id"
                       ? msr::TreatmentRule(
                             msr::PointIdLogistic{msr::tau_star_cached().tau_star, sigma})
                             .evaluate(obs)
                       : 0.5;
    } else {
        const msr::ProblemSpec spec{k.value, sigma};
        fraction = make_rule(rule_name, spec).evaluate(obs);
    }
    std::ostringstream os;
    if (format == "json") {
        nlohmann::json j{{"k", k_label(k)},     {"sigma", sigma},
                         {"rule", rule_name},   {"observation", obs},
                         {"fraction", fraction}, {"metadata", units_metadata()}};
        os << j.dump(2) << '\n';
    } else {
        os << msr::format_double(fraction, 12) << '\n';
    }
    emit(os.str(), out_path);
    return kExitOk;
}

int cmd_surface(const KValue& k, double sigma, const std::string& rule_name, double grid_min,
                double grid_max, int grid_points, int tt_points, const std::string& format,
                const std::string& out_path) {
    if (k.infinite)
        throw CLI::ValidationError("--k", "surface requires a finite identified-set width");
    const msr::ProblemSpec spec{k.value, sigma};
    const msr::TreatmentRule rule = make_rule(rule_name, spec);
    const auto rows =
        msr::compute_surface(rule, spec, grid_min, grid_max, grid_points, tt_points);
    std::ostringstream os;
    if (format == "json") {
        nlohmann::json jrows = nlohmann::json::array();
        for (const auto& r : rows)
            jrows.push_back({{"theta_e", r.theta_e},
                             {"theta_t", r.theta_t},
                             {"msr", r.msr},
                             {"mean_regret", r.mean_regret}});
        nlohmann::json j{{"k", spec.k},
                         {"sigma", spec.sigma},
                         {"rule", rule_name},
                         {"rows", jrows},
                         {"metadata", units_metadata()}};
        os << j.dump(2) << '\n';
    } else {
        msr::write_surface_csv(os, rows);
    }
    emit(os.str(), out_path);
    return kExitOk;
}

int cmd_figure1(const std::vector<KValue>& k_list, double sigma, double z_min, double z_max,
                int z_points, const std::string& format, const std::string& out_path) {
    std::ostringstream os;
    nlohmann::json tables = nlohmann::json::array();
    if (format == "csv") os << "k,z,msr_rule,mean_regret_rule\n";
    for (const KValue& k : k_list) {
        std::optional<msr::TreatmentRule> msr_rule;
        std::optional<msr::TreatmentRule> mr_rule;
        if (!k.infinite) {
            const msr::ProblemSpec spec{k.value, sigma};
            msr_rule = msr::msr_optimal_rule(spec);
            mr_rule = msr::mean_regret_rule(spec);
        }
        nlohmann::json jrows = nlohmann::json::array();
        for (int i = 0; i < z_points; ++i) {
            const double z =
                z_points == 1 ? z_min : z_min + (z_max - z_min) * i / (z_points - 1);
            const double f_msr = k.infinite ? 0.5 : msr_rule->evaluate(z);
            const double f_mr = k.infinite ? 0.5 : mr_rule->evaluate(z);
            if (format == "csv") {
                os << k_label(k) << ',' << msr::format_double(z) << ','
                   << msr::format_double(f_msr) << ',' << msr::format_double(f_mr) << '\n';
            } else {
                jrows.push_back({z, f_msr, f_mr});
            }
        }
        if (format != "csv") tables.push_back({{"k", k_label(k)}, {"rows", jrows}});
    }
    if (format != "csv") {
        nlohmann::json j{{"sigma", sigma},
                         {"columns", {"z", "msr_rule", "mean_regret_rule"}},
                         {"tables", tables},
                         {"metadata", units_metadata()}};
        // The published figure does not state its k values; this list is an
        // artifact default.
        j["metadata"]["k_list_canonical"] = false;
        os << j.dump(2) << '\n';
    }
    emit(os.str(), out_path);
    return kExitOk;
}

int cmd_worst_case(const KValue& k, double sigma, const std::string& rule_name,
                   const std::string& format, const std::string& out_path) {
    if (k.infinite)
        throw CLI::ValidationError("--k", "worst-case requires a finite identified-set width");
    const msr::ProblemSpec spec{k.value, sigma};
    const msr::TreatmentRule rule = make_rule(rule_name, spec);
    const msr::WorstCaseResult wc = msr::worst_case_msr(rule, spec);
    std::ostringstream os;
    if (format == "csv") {
        os << "value,theta_e,theta_t,refined\n";
        os << msr::format_double(wc.value) << ',' << msr::format_double(wc.argmax.theta_e) << ','
           << msr::format_double(wc.argmax.theta_t) << ',' << (wc.refined ? 1 : 0) << '\n';
    } else {
        nlohmann::json j = wc;
        j["k"] = spec.k;
        j["sigma"] = spec.sigma;
        j["rule"] = rule_name;
        j["metadata"] = units_metadata();
        os << j.dump(2) << '\n';
    }
    emit(os.str(), out_path);
    return kExitOk;
}

int cmd_mc_regret(const KValue& k, double sigma, const std::string& rule_name, double theta_e,
                  double theta_t, std::int64_t draws, std::uint64_t seed,
                  const std::string& format, const std::string& out_path) {
    if (k.infinite)
        throw CLI::ValidationError("--k", "mc-regret requires a finite identified-set width");
    const msr::ProblemSpec spec{k.value, sigma};
    const msr::TreatmentRule rule = make_rule(rule_name, spec);
    const msr::RiskReport report =
        msr::regret_distribution(rule, {theta_e, theta_t}, sigma, draws, seed);
    std::ostringstream os;
    if (format == "csv") {
        os << "mean_regret,mean_square_regret,regret_variance,mc_draws,mc_std_error\n";
        os << msr::format_double(report.mean_regret) << ','
           << msr::format_double(report.mean_square_regret) << ','
           << msr::format_double(report.regret_variance) << ',' << *report.mc_draws << ','
           << (report.mc_std_error ? msr::format_double(*report.mc_std_error) : "") << '\n';
    } else {
        nlohmann::json j = report;
        j["k"] = spec.k;
        j["sigma"] = spec.sigma;
        j["rule"] = rule_name;
        j["theta_e"] = theta_e;
        j["theta_t"] = theta_t;
        j["seed"] = seed;
        j["metadata"] = units_metadata();
        os << j.dump(2) << '\n';
    }
    emit(os.str(), out_path);
    return kExitOk;
}

int cmd_verify(const std::string& suite, const std::vector<KValue>& k_list, double sigma,
               const std::string& format, const std::string& out_path) {
    std::vector<msr::ProblemSpec> specs;
    for (const KValue& k : k_list) {
        if (k.infinite)
            throw CLI::ValidationError("--k-list", "verify requires finite k values");
        specs.push_back({k.value, sigma});
    }
    msr::SuiteConfig cfg;
    if (suite == "appendix") cfg.include_theorem1 = false;
    std::vector<msr::CheckOutcome> outcomes;
    if (suite == "theorem1") {
        for (const auto& spec : specs) outcomes.push_back(msr::check_theorem1(spec));
    } else {
        outcomes = msr::run_suite(specs, cfg);
    }

    std::ostringstream os;
    if (format == "json") {
        nlohmann::json j{{"suite", suite},
                         {"sigma", sigma},
                         {"all_passed", msr::all_passed(outcomes)},
                         {"outcomes", outcomes},
                         {"metadata", units_metadata()}};
        os << j.dump(2) << '\n';
    } else {
        msr::render_report(os, outcomes);
    }
    emit(os.str(), out_path);
    return msr::all_passed(outcomes) ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"minimax mean-square-regret treatment rules under partial identification"};
    app.require_subcommand(1);

    std::string k_text = "1";
    std::string k_list_text;
    double sigma = 1.0;
    double obs = 0.0;
    std::string rule_name = "msr";
    std::string format;
    std::string out_path;
    double grid_min = -3.0, grid_max = 3.0;
    int grid_points = 61;
    int tt_points = 21;
    double fig_min = -4.0, fig_max = 4.0;
    int fig_points = 401;
    std::int64_t draws = 100000;
    std::uint64_t seed = 0;
    double theta_e = 0.0, theta_t = 0.0;
    std::string suite = "all";

    std::map<const CLI::App*, std::string> default_format;
    auto add_common = [&](CLI::App* sub, const char* fmt) {
        sub->add_option("--sigma", sigma, "standard deviation of the estimate (welfare units)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--format", format, std::string("output format (default: ") + fmt + ")")
            ->check(CLI::IsMember({"csv", "json", "table", "text"}));
        sub->add_option("--out", out_path, "output path (default: stdout)");
        default_format[sub] = fmt;
    };

    CLI::App* calibrate = app.add_subcommand("calibrate", "solve tau* and a*(k, sigma)");
    calibrate->add_option("--k", k_text, "identified-set half-width, or 'inf'")->required();
    add_common(calibrate, "json");

    CLI::App* rule = app.add_subcommand("rule", "evaluate a treatment rule at an observation");
    rule->add_option("--k", k_text, "identified-set half-width, or 'inf'")->required();
    rule->add_option("--rule", rule_name, "msr|mean-regret|point-id|half");
    rule->add_option("--obs", obs, "observed estimate (welfare units)")->required();
    add_common(rule, "text");

    CLI::App* surface = app.add_subcommand("surface", "regret surface over the parameter space");
    surface->add_option("--k", k_text)->required();
    surface->add_option("--rule", rule_name, "msr|mean-regret|point-id|half");
    surface->add_option("--grid-min", grid_min, "theta_e lower bound");
    surface->add_option("--grid-max", grid_max, "theta_e upper bound");
    surface->add_option("--grid-points", grid_points, "theta_e grid size")
        ->check(CLI::PositiveNumber);
    surface->add_option("--tt-points", tt_points, "theta_t points per column")
        ->check(CLI::PositiveNumber);
    add_common(surface, "csv");

    CLI::App* figure1 = app.add_subcommand(
        "figure1", "treatment fractions of both rule families over a z-grid, per k");
    figure1->add_option("--k-list", k_list_text, "comma-separated k values ('inf' allowed)");
    figure1->add_option("--grid-min", fig_min, "z lower bound");
    figure1->add_option("--grid-max", fig_max, "z upper bound");
    figure1->add_option("--grid-points", fig_points, "z grid size")->check(CLI::PositiveNumber);
    add_common(figure1, "csv");

    CLI::App* worst = app.add_subcommand("worst-case", "worst-case mean square regret of a rule");
    worst->add_option("--k", k_text)->required();
    worst->add_option("--rule", rule_name, "msr|mean-regret|point-id|half");
    add_common(worst, "json");

    CLI::App* mc = app.add_subcommand("mc-regret", "Monte Carlo regret distribution at a state");
    mc->add_option("--k", k_text)->required();
    mc->add_option("--rule", rule_name, "msr|mean-regret|point-id|half");
    mc->add_option("--theta-e", theta_e, "experimental effect (welfare units)")->required();
    mc->add_option("--theta-t", theta_t, "target effect (welfare units)")->required();
    mc->add_option("--draws", draws, "Monte Carlo draws")->check(CLI::PositiveNumber);
    mc->add_option("--seed", seed, "RNG seed")->required();
    add_common(mc, "json");

    CLI::App* verify = app.add_subcommand("verify", "run the numerical verification suite");
    verify->add_option("--suite", suite, "all|appendix|theorem1")
        ->check(CLI::IsMember({"all", "appendix", "theorem1"}));
    verify->add_option("--k-list", k_list_text, "comma-separated finite k values");
    add_common(verify, "table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    const CLI::App* active = app.get_subcommands().front();
    if (format.empty()) format = default_format[active];

    try {
        if (calibrate->parsed())
            return cmd_calibrate(parse_k(k_text), sigma, format, out_path);
        if (rule->parsed())
            return cmd_rule(parse_k(k_text), sigma, rule_name, obs, format, out_path);
        if (surface->parsed())
            return cmd_surface(parse_k(k_text), sigma, rule_name, grid_min, grid_max,
                               grid_points, tt_points, format, out_path);
        if (figure1->parsed()) {
            if (k_list_text.empty()) k_list_text = "0,0.5,1.0,1.2533,2.0,inf";
            return cmd_figure1(parse_k_list(k_list_text), sigma, fig_min, fig_max, fig_points,
                               format, out_path);
        }
        if (worst->parsed())
            return cmd_worst_case(parse_k(k_text), sigma, rule_name, format, out_path);
        if (mc->parsed())
            return cmd_mc_regret(parse_k(k_text), sigma, rule_name, theta_e, theta_t, draws,
                                 seed, format, out_path);
        if (verify->parsed()) {
            if (k_list_text.empty()) k_list_text = "0.1,1,10";
            return cmd_verify(suite, parse_k_list(k_list_text), sigma, format, out_path);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const msr::DivergenceError& e) {
        std::cerr << "numerical failure: " << e.what() << " (bound reached "
                  << msr::format_double(e.bound_reached()) << ", incumbent "
                  << msr::format_double(e.incumbent()) << ")\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitUsage;
}
