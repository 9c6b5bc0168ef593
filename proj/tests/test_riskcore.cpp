#include <doctest.h>

#include <cmath>
#include <random>

#include "adacos/error.hpp"
#include "adacos/policy.hpp"
#include "adacos/riskcore.hpp"
#include "support.hpp"

using namespace adacos;

namespace {

double phi_approx(double u) {
    return 0.5 * std::erfc(-std::sqrt(M_PI / 8.0) * u / std::sqrt(2.0));
}

bool close(double a, double b, double rel, double abs) {
    return std::abs(a - b) <= std::max(rel * std::abs(b), abs);
}

} // namespace

TEST_CASE("breakpoints and segment layout") {
    const auto pw = build_piecewise_sigmoid(40);
    REQUIRE(pw.breakpoints.size() == 41);
    CHECK(pw.breakpoints.front() == -10.0);
    CHECK(pw.breakpoints.back() == 10.0);
    CHECK(pw.segments() == 42);
    CHECK(pw.breakpoints[20] == 0.0);
    CHECK(pw.slopes.front() == 0.0);
    CHECK(pw.slopes.back() == 0.0);
    CHECK(pw.intercepts.front() == sigmoid(-10.0));
    CHECK(pw.intercepts.back() == sigmoid(10.0));
    CHECK(std::isinf(pw.lower(0)));
    CHECK(std::isinf(pw.upper(41)));
    CHECK_THROWS_AS(build_piecewise_sigmoid(1), InputError);
}

TEST_CASE("approximation passes through every breakpoint") {
    for (int xi : {2, 7, 40, 41}) {
        const auto pw = build_piecewise_sigmoid(xi);
        for (double b : pw.breakpoints) CHECK(pw(b) == doctest::Approx(sigmoid(b)).epsilon(1e-14));
    }
    CHECK(build_piecewise_sigmoid(40)(0.0) == 0.5);
}

TEST_CASE("approximation is monotone, continuous and bounded") {
    const auto pw = build_piecewise_sigmoid(40);
    double prev = pw(-30.0);
    for (int k = 1; k <= 60000; ++k) {
        const double u = -30.0 + k * 1e-3;
        const double v = pw(u);
        CHECK(v >= prev);
        CHECK(v - prev < 1e-3);
        CHECK(v >= sigmoid(-10.0));
        CHECK(v <= sigmoid(10.0));
        prev = v;
    }
}

TEST_CASE("piecewise approximation beats the probit approximation") {
    const auto pw = build_piecewise_sigmoid(40);
    double worst_pw = 0.0, worst_phi = 0.0;
    for (int k = 0; k <= 40000; ++k) {
        const double u = -20.0 + k * 1e-3;
        worst_pw = std::max(worst_pw, std::abs(pw(u) - sigmoid(u)));
        worst_phi = std::max(worst_phi, std::abs(phi_approx(u) - sigmoid(u)));
    }
    CHECK(worst_pw < worst_phi);
}

TEST_CASE("segment expectation limits") {
    const auto pw = build_piecewise_sigmoid(40);
    const double inf = std::numeric_limits<double>::infinity();
    for (double s2 : {1e-6, 0.3, 4.0, 400.0}) CHECK(std::abs(segment_gaussian_expectation(pw, 0.0, s2, -inf, inf) - 0.5) < 1e-9);
    for (double mu : {-12.0, -3.3, 0.25, 1.7, 9.99})
        CHECK(std::abs(segment_gaussian_expectation(pw, mu, 1e-12, -inf, inf) - pw(mu)) < 1e-6);
    CHECK(segment_gaussian_expectation(pw, 0.0, 1.0, 2.0, 2.0) == 0.0);
    CHECK_THROWS_AS(segment_gaussian_expectation(pw, 0.0, 1.0, 1.0, 0.0), InputError);
    CHECK_THROWS_AS(segment_gaussian_expectation(pw, 0.0, 0.0, -1.0, 1.0), InputError);
}

TEST_CASE("segment expectation matches adaptive quadrature") {
    const auto pw = build_piecewise_sigmoid(40);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> mu_d(-15.0, 15.0), log_s(std::log(0.05), std::log(20.0)), ab(-25.0, 25.0);
    for (int k = 0; k < 100; ++k) {
        const double mu = mu_d(rng);
        const double s = std::exp(log_s(rng));
        double a = ab(rng), b = ab(rng);
        if (a > b) std::swap(a, b);
        const double got = segment_gaussian_expectation(pw, mu, s * s, a, b);
        const double want = testing_support::quadrature_expectation(pw, mu, s * s, a, b);
        CHECK(close(got, want, 1e-8, 1e-15));
        CHECK(got >= 0.0);
        CHECK(got <= 1.0);
    }
}

TEST_CASE("Bayes risk special cases") {
    const auto pw = build_piecewise_sigmoid(40);
    CHECK(conditional_bayes_risk(make_risk_query(0.3, 0.1, 2.0, 0.0, 0.0), pw) == 0.0);
    // all mass far below the threshold: classify 0 and pay fn on p(y=1)
    const double u = std::log(0.8 / 0.2);
    const auto q = make_risk_query(u, 0.0, 1e-12, 100.0, 1.0);
    CHECK(conditional_bayes_risk(q, pw) == doctest::Approx(pw(u)).epsilon(1e-9));
    CHECK(std::abs(conditional_bayes_risk(q, pw) - 0.8) < 5e-3);
    // zero fp cost: always classify 1 and never pay
    CHECK(conditional_bayes_risk(make_risk_query(0.0, -2.0, 1.0, 0.0, 5.0), pw) == 0.0);
    // zero fn cost: always classify 0 and never pay
    CHECK(conditional_bayes_risk(make_risk_query(0.0, 2.0, 1.0, 5.0, 0.0), pw) == 0.0);
    CHECK_THROWS_AS(conditional_bayes_risk(make_risk_query(0.0, 0.0, 1.0, -1.0, 1.0), pw), InputError);
}

TEST_CASE("Bayes risk shrinks as the outcome gets more certain") {
    const auto pw = build_piecewise_sigmoid(40);
    double prev = conditional_bayes_risk(make_risk_query(0.0, 0.0, 1.0, 1.0, 1.0), pw);
    for (double mu : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double r = conditional_bayes_risk(make_risk_query(0.0, mu, 1.0, 1.0, 1.0), pw);
        CHECK(r < prev);
        prev = r;
    }
}

TEST_CASE("immediate cost") {
    const auto costs = testing_support::uniform_costs(1, 0.0, 10.0, 30.0, -2.0);
    // shifted fp 12, fn 32
    CHECK(immediate_cost(0.1, costs) == doctest::Approx(-2.0 + 0.1 * 32.0));
    CHECK(immediate_cost(0.9, costs) == doctest::Approx(-2.0 + 0.1 * 12.0));
}

TEST_SUITE("properties") {
TEST_CASE("segment expectation is monotone in the mean") {
    const auto pw = build_piecewise_sigmoid(40);
    const double inf = std::numeric_limits<double>::infinity();
    for (double s2 : {0.01, 1.0, 25.0}) {
        double prev = 0.0;
        for (int k = 0; k <= 400; ++k) {
            const double v = segment_gaussian_expectation(pw, -20.0 + 0.1 * k, s2, -inf, inf);
            CHECK(v >= prev - 1e-15);
            prev = v;
        }
    }
}

TEST_CASE("Bayes risk matches Monte-Carlo on the same integrand") {
    const auto pw = build_piecewise_sigmoid(40);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> off(-3.0, 3.0), mu(-4.0, 4.0), ls(std::log(0.1), std::log(3.0)),
        lc(std::log(0.1), std::log(10.0));
    for (int k = 0; k < 10; ++k) {
        const double s = std::exp(ls(rng));
        const auto q = make_risk_query(off(rng), mu(rng), s * s, std::exp(lc(rng)), std::exp(lc(rng)));
        const double mc = testing_support::mc_bayes_risk(q, [&](double u) { return pw(u); }, 200000, 100 + k);
        CHECK(close(conditional_bayes_risk(q, pw), mc, 5e-3, 1e-4));
    }
}

TEST_CASE("relabeling classes and mirroring the Gaussian keeps the risk") {
    const auto pw = build_piecewise_sigmoid(40);
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> off(-3.0, 3.0), mu(-4.0, 4.0), sd(0.1, 3.0), c(0.1, 10.0);
    for (int k = 0; k < 200; ++k) {
        const double o = off(rng), m = mu(rng), s = sd(rng), fp = c(rng), fn = c(rng);
        const double r = conditional_bayes_risk(make_risk_query(o, m, s * s, fp, fn), pw);
        const auto mirrored = make_risk_query(-o, -m, s * s, fn, fp);
        CHECK(close(conditional_bayes_risk(mirrored, pw), r, 1e-9, 1e-13));
        if (k < 5) {
            const double mc = testing_support::mc_bayes_risk(mirrored, [&](double u) { return pw(u); }, 100000, 300 + k);
            CHECK(close(mc, r, 5e-3, 1e-4));
        }
    }
}

TEST_CASE("three forms of the Bayes decision agree") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> eta_d(-8.0, 8.0), off(-3.0, 3.0), c(0.01, 50.0);
    for (int k = 0; k < 2000; ++k) {
        const double eta = eta_d(rng);
        const double offset = off(rng);
        auto costs = testing_support::uniform_costs(1, 0.0, c(rng), c(rng));
        const double p = sigmoid(eta);
        const auto q = make_risk_query(offset, 0.0, 1.0, costs.fp_cost, *costs.fn_cost);
        const bool by_z = eta - offset >= q.z_star;
        const bool by_ratio = p >= costs.fp_cost / (costs.fp_cost + *costs.fn_cost);
        const bool by_rule = bayes_classify(p, costs) == 1;
        // only disagree within rounding of the boundary
        if (std::abs(eta - std::log(costs.fp_cost / *costs.fn_cost)) > 1e-9) {
            CHECK(by_z == by_ratio);
            CHECK(by_rule == by_ratio);
        }
    }
}

TEST_CASE("future cost identities") {
    const Dataset d = testing_support::two_view_data(400, 37, 1.0);
    CovariateSequence seq;
    seq.sets = {{0}, {0, 1}};
    const auto features = SplineFeatures::build(d, 6);
    const auto design = DesignMatrix::build(features, d.samples);
    refit_models(seq, design, features, d.labels, GamPenalty{1.0, kRidgeFloor});
    const CovariateSet a{0}, s{1};
    const auto cond = fit_conditional(d, a, s, seq.per_set_models[1]);
    const auto pw = build_piecewise_sigmoid(40);

    const auto free_costs = testing_support::uniform_costs(2, 0.0, 3.0, 5.0);
    auto dear = free_costs;
    dear.covariate_costs = {1e6, 1e6};
    auto charged = free_costs;
    charged.covariate_costs = {0.0, 0.75};
    for (int i = 0; i < 40; ++i) {
        const auto x = d.row(i);
        const double p1 = seq.per_set_models[0].predict_prob(x);
        CHECK(future_cost_now(seq, x, 0, free_costs) == doctest::Approx(std::min(p1 * 5.0, (1.0 - p1) * 3.0)));
        const double risk_only = future_cost(seq, cond, x, 0, 1, free_costs, pw);
        CHECK(future_cost(seq, cond, x, 0, 1, charged, pw) == doctest::Approx(risk_only + 0.75));
        CHECK(future_cost(seq, cond, x, 0, 1, dear, pw) > future_cost_now(seq, x, 0, dear));
    }
    CHECK_THROWS_AS(future_cost(seq, cond, d.row(0), 1, 1, free_costs, pw), InputError);
    CHECK_THROWS_AS(future_cost(seq, cond, d.row(0), 1, 0, free_costs, pw), InputError);

    auto shifted = free_costs;
    shifted.correct_cost = -1.0;
    shifted.fp_cost = 2.0;
    shifted.fn_cost = 4.0;
    // shifting both error costs and the correct cost by k moves F by k
    CHECK(future_cost(seq, cond, d.row(3), 0, 1, shifted, pw) ==
          doctest::Approx(future_cost(seq, cond, d.row(3), 0, 1, free_costs, pw) - 1.0));
}
}
