#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "msr/verification.hpp"

using namespace msr;
using Catch::Matchers::WithinAbs;

TEST_CASE("lemma 1 bounded-slope check passes across the slope range") {
    for (double c : {0.5, 1.0, tau_star_cached().tau_star - 1e-3}) {
        const auto outcome = check_lemma1_bounded(c);
        INFO(outcome.name);
        CHECK(outcome.passed);
    }
    CHECK_THROWS_AS(check_lemma1_bounded(0.0), std::domain_error);
    CHECK_THROWS_AS(check_lemma1_bounded(1.3), std::domain_error);
}

TEST_CASE("lemma 1 endpoint value matches rho") {
    const auto outcome = check_lemma1_bounded(1.0);
    CHECK(outcome.passed);
    CHECK_THAT(outcome.details.at("endpoint_value").get<double>(), WithinAbs(rho(1.0), 1e-8));
}

TEST_CASE("lemma 9 inequalities hold with shrinking margins near tau*") {
    const auto mid = check_lemma9(0.6);
    const auto low = check_lemma9(0.1);
    CHECK(mid.passed);
    CHECK(low.passed);
    const auto near = check_lemma9(tau_star_cached().tau_star - 1e-4);
    CHECK(near.passed);
    const double m_near = near.details.at("margin_at_tau_star").get<double>();
    const double m_mid = mid.details.at("margin_at_tau_star").get<double>();
    CHECK(m_near > 0.0);
    CHECK(m_near < m_mid);
}

TEST_CASE("lemma 3 check across ratios") {
    for (double ratio : {0.1, 1.0, 10.0}) {
        const auto outcome = check_lemma3(ProblemSpec{ratio, 1.0});
        INFO(outcome.name);
        CHECK(outcome.passed);
    }
}

TEST_CASE("lemma 4 symmetry check across environments") {
    for (const auto& spec :
         {ProblemSpec{1.0, 1.0}, ProblemSpec{0.01, 1.0}, ProblemSpec{5.0, 0.5}}) {
        const auto outcome = check_lemma4_symmetry(spec);
        INFO(outcome.name);
        CHECK(outcome.passed);
    }
}

TEST_CASE("lemma 5 global maximum check across ratios") {
    for (double ratio : {0.25, 1.0, 4.0}) {
        const auto outcome = check_lemma5_global_max(ProblemSpec{ratio, 1.0});
        INFO(outcome.name);
        CHECK(outcome.passed);
    }
}

TEST_CASE("lemma 7 sign-change check across ratios") {
    for (double ratio : {0.1, 1.0, 20.0}) {
        const auto outcome = check_lemma7_sign_change(ProblemSpec{ratio, 1.0});
        INFO(outcome.name);
        CHECK(outcome.passed);
        CHECK(outcome.details.at("score_sign_changes").get<int>() == 1);
    }
}

TEST_CASE("theorem 1 sandwich check") {
    const auto outcome = check_theorem1(ProblemSpec{1.0, 1.0});
    INFO(outcome.details.dump(2));
    CHECK(outcome.passed);
    CHECK(outcome.details.at("challengers").size() >= 10);
}

TEST_CASE("uninformative subproblem objective") {
    const auto one = check_uninformative_subproblem(1.0);
    CHECK(one.passed);
    CHECK_THAT(one.details.at("min_value").get<double>(), WithinAbs(0.25, 1e-12));
    const auto two = check_uninformative_subproblem(2.0);
    CHECK(two.passed);
    CHECK_THAT(two.details.at("min_value").get<double>(), WithinAbs(1.0, 1e-12));
    const auto neg = check_uninformative_subproblem(-1.0);
    CHECK(neg.passed);
    CHECK_THAT(neg.details.at("min_value").get<double>(), WithinAbs(0.25, 1e-12));
    CHECK_THROWS_AS(check_uninformative_subproblem(0.0), std::domain_error);
}

TEST_CASE("outcomes are bit-reproducible") {
    const ProblemSpec spec{0.5, 1.0};
    const auto a = check_lemma5_global_max(spec);
    const auto b = check_lemma5_global_max(spec);
    CHECK(a.worst_violation == b.worst_violation);
    const auto s1 = check_lemma4_symmetry(spec);
    const auto s2 = check_lemma4_symmetry(spec);
    CHECK(s1.worst_violation == s2.worst_violation);
}

TEST_CASE("outcome invariant: passed iff worst violation within tolerance") {
    std::vector<ProblemSpec> specs{{0.5, 1.0}};
    SuiteConfig cfg;
    cfg.c_values = {0.5};
    cfg.a_t_values = {1.0};
    cfg.boundary_stress_c = false;
    cfg.include_theorem1 = false;
    const auto outcomes = run_suite(specs, cfg);
    REQUIRE(!outcomes.empty());
    for (const auto& o : outcomes) {
        INFO(o.name);
        CHECK(o.passed == (o.worst_violation <= 0.0));
    }
    CHECK(all_passed(outcomes));
}

TEST_CASE("suite report renders one line per check") {
    std::vector<ProblemSpec> specs{{1.0, 1.0}};
    SuiteConfig cfg;
    cfg.c_values = {0.5};
    cfg.a_t_values = {1.0};
    cfg.boundary_stress_c = false;
    cfg.include_theorem1 = false;
    const auto outcomes = run_suite(specs, cfg);
    std::ostringstream os;
    render_report(os, outcomes);
    const std::string text = os.str();
    CHECK(text.find("PASS") != std::string::npos);
    CHECK(text.find("all checks passed") != std::string::npos);

    const nlohmann::json j = outcomes;
    CHECK(j.is_array());
    CHECK(j.size() == outcomes.size());
    CHECK(j[0].contains("name"));
    CHECK(j[0].contains("worst_violation"));
}
