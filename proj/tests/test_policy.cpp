#include <doctest.h>

#include <cmath>
#include <random>

#include "adacos/error.hpp"
#include "adacos/policy.hpp"
#include "support.hpp"

using namespace adacos;
using testing_support::uniform_costs;

namespace {

struct TwoStage {
    Dataset data;
    SplineFeatures features;
    DesignMatrix design;
    AdacosBundle bundle;

    explicit TwoStage(int n = 2000, std::uint64_t seed = 41)
        : data(testing_support::two_view_data(n, seed, 1.0)), features(SplineFeatures::build(data)),
          design(DesignMatrix::build(features, data.samples)) {
        bundle.sequence.sets = {{0}, {0, 1}};
        refit_models(bundle.sequence, design, features, data.labels, GamPenalty{1.0, kRidgeFloor});
        bundle.conditionals = fit_all_conditionals(bundle.sequence, data.samples);
        bundle.sigmoid = build_piecewise_sigmoid();
    }
};

// Expected Bayes risk of the two-covariate model after drawing x1 from the
// true conditional given x0, plus the price of x1.
double mc_future_cost(const TwoStage& t, double x0, const CostModel& costs, int draws, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    const double p_pos = testing_support::logistic(2.0 * x0);
    const double fp = costs.shifted_fp(), fn = costs.shifted_fn();
    double total = 0.0;
    for (int k = 0; k < draws; ++k) {
        const double mean = unif(rng) < p_pos ? 1.0 : -1.0;
        const std::vector<double> x{x0, mean + normal(rng)};
        const double p = t.bundle.sequence.per_set_models[1].predict_prob(x);
        total += std::min(p * fn, (1.0 - p) * fp);
    }
    return costs.correct_cost + total / draws + costs.covariate_costs[1];
}

} // namespace

TEST_CASE("Bayes classification examples") {
    const auto costs = uniform_costs(1, 0.0, 10.0, 100.0);
    CHECK(bayes_classify(0.3, costs) == 1);
    CHECK(bayes_classify(0.05, costs) == 0);
    CHECK(bayes_classify(0.5, uniform_costs(1, 0.0, 3.0, 3.0)) == 1);
    CHECK(bayes_classify(0.49, uniform_costs(1, 0.0, 3.0, 3.0)) == 0);
    // exactly at the threshold c01 / (c10 + c01)
    CHECK(bayes_classify(0.25, uniform_costs(1, 0.0, 1.0, 3.0)) == 1);
    // correct-classification costs shift both sides
    CHECK(bayes_classify(0.3, uniform_costs(1, 0.0, 10.0, 100.0, -50.0)) == 1);
}

TEST_CASE("single-stage sequences classify immediately") {
    TwoStage t(400);
    AdacosBundle single;
    single.sequence.sets = {{0, 1}};
    refit_models(single.sequence, t.design, t.features, t.data.labels, GamPenalty{1.0, kRidgeFloor});
    single.sigmoid = build_piecewise_sigmoid();
    const auto costs = uniform_costs(2, 0.7, 1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const auto trace = adacos_classify(single, t.data.row(i), costs, i);
        CHECK(trace.stage == 0);
        CHECK(trace.evaluations.empty());
        CHECK(trace.covariate_cost == doctest::Approx(1.4));
        CHECK(trace.label == bayes_classify(single.sequence.per_set_models[0].predict_prob(t.data.row(i)), costs));
    }
}

TEST_CASE("prohibitive covariate costs stop at the first stage") {
    const TwoStage t(400);
    const auto costs = uniform_costs(2, 1e6, 5.0, 5.0);
    for (int i = 0; i < 50; ++i) {
        const auto trace = adacos_classify(t.bundle, t.data.row(i), costs, i);
        CHECK(trace.stage == 0);
        CHECK(trace.covariate_cost == 1e6);
    }
}

TEST_CASE("second covariate is bought only near the decision boundary") {
    const TwoStage t;
    auto costs = uniform_costs(2, 0.0, 1.0, 1.0);
    costs.covariate_costs[1] = 0.05;
    int checked = 0;
    for (double x0 = -3.0; x0 <= 3.0; x0 += 0.25) {
        const std::vector<double> x{x0, 0.0};
        const auto trace = adacos_classify(t.bundle, x, costs);
        REQUIRE_FALSE(trace.evaluations.empty());
        const auto& evals = trace.evaluations.front();
        REQUIRE(evals.size() == 2);
        const double now = evals[0].value;
        const double later = evals[1].value;
        const double p1 = t.bundle.sequence.per_set_models[0].predict_prob(x);
        CHECK(now == doctest::Approx(std::min(p1, 1.0 - p1)));
        const double oracle = mc_future_cost(t, x0, costs, 20000, 7);
        // the Gaussian stand-in for a two-component mixture costs some accuracy
        CHECK(std::abs(later - oracle) <= 0.04 + 0.15 * oracle);
        // decisions agree wherever the oracle gap is clear
        if (std::abs(oracle - now) > 0.03) {
            CHECK((trace.stage == 1) == (oracle < now));
            ++checked;
        }
        if (std::abs(x0) >= 2.5) CHECK(trace.stage == 0);
        if (std::abs(x0) <= 0.25) CHECK(trace.stage == 1);
    }
    CHECK(checked >= 10);
}

TEST_CASE("policy only reads covariates it acquired") {
    const TwoStage t(400);
    auto costs = uniform_costs(2, 0.0, 1.0, 1.0);
    costs.covariate_costs[1] = 0.05;
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x(t.data.row(i).begin(), t.data.row(i).end());
        const auto trace = adacos_classify(t.bundle, x, costs, i);
        if (trace.stage == 0) {
            x[1] = NAN;
            const auto masked = adacos_classify(t.bundle, x, costs, i);
            CHECK(masked.label == trace.label);
            CHECK(masked.stage == 0);
        } else {
            x[1] = NAN;
            CHECK_THROWS_AS(adacos_classify(t.bundle, x, costs, i), InputError);
        }
    }
}

TEST_CASE("COS set choice") {
    TwoStage t(300);
    const FoldAssignment folds = make_folds(t.data.rows(), 10, 5);
    const TrainingView view{t.design, t.features, t.data.labels, folds, GamPenalty{1.0, kRidgeFloor}};

    // an expensive second covariate is never worth it
    auto costs = uniform_costs(2, 0.0, 1.0, 1.0);
    costs.covariate_costs[1] = 2.0;
    std::vector<double> est;
    CHECK(cos_select(view, t.bundle.sequence, costs, &est) == 0);
    REQUIRE(est.size() == 2);
    CHECK(est[1] > est[0]);
    for (int k = 0; k < 2; ++k)
        CHECK(est[static_cast<std::size_t>(k)] ==
              doctest::Approx(cv_expected_cost(view, t.bundle.sequence.sets[static_cast<std::size_t>(k)], costs)));

    CovariateSequence one;
    one.sets = {{1}};
    CHECK(cos_select(view, one, costs) == 0);
    CHECK_THROWS_AS(cos_select(view, CovariateSequence{}, costs), InputError);
}

TEST_CASE("full model pays for every covariate") {
    const Dataset pima = impute_missing(load_dataset(testing_support::data_path("pima.csv"), "diabetes"));
    const CovariateSet all{0, 1, 2, 3, 4, 5, 6, 7};
    const GamModel m = fit_gam(pima, all, 1.0, kRidgeFloor);
    const auto costs = uniform_costs(8, 1.0, 400.0, 400.0, -50.0);
    for (int i = 0; i < 40; ++i) {
        auto trace = full_model_classify(m, pima.row(i), costs, i);
        CHECK(trace.covariate_cost == 8.0);
        CHECK(trace.covariate_count() == 8);
        CHECK(trace.label == bayes_classify(m.predict_prob(pima.row(i)), costs));
    }
    const CovariateSet some{1, 5};
    const GamModel partial = fit_gam(pima, some, 1.0, kRidgeFloor);
    CHECK_THROWS_AS(full_model_classify(partial, pima.row(0), costs), InputError);
    CHECK(fixed_set_classify(partial, pima.row(0), costs).covariate_cost == 2.0);
}

TEST_SUITE("properties") {
TEST_CASE("trace accounting adds up and acquisitions form a prefix") {
    const TwoStage t(600, 43);
    auto costs = uniform_costs(2, 0.0, 2.0, 6.0, -1.0);
    costs.covariate_costs = {0.3, 0.08};
    for (int i = 0; i < 200; ++i) {
        auto trace = adacos_classify(t.bundle, t.data.row(i), costs, i);
        const int y = t.data.labels[static_cast<std::size_t>(i)];
        record_outcome(trace, y, costs);
        const double mis = y == trace.label ? -1.0 : (y == 1 ? 6.0 : 2.0);
        double paid = 0.0;
        for (int c : trace.observed()) paid += costs.covariate_costs[static_cast<std::size_t>(c)];
        CHECK(trace.total_cost() == doctest::Approx(mis + paid));
        CHECK(trace.observed() == t.bundle.sequence.sets[static_cast<std::size_t>(trace.stage)]);
        CHECK(static_cast<int>(trace.acquired.size()) == trace.stage + 1);
        for (int s = 0; s <= trace.stage; ++s)
            CHECK(trace.acquired[static_cast<std::size_t>(s)] ==
                  (s == 0 ? t.bundle.sequence.sets[0] : t.bundle.sequence.difference(s - 1, s)));
    }
}

TEST_CASE("COS estimate never exceeds the full set's estimate when covariates are free") {
    const Dataset d = impute_missing(load_dataset(testing_support::data_path("breast_cancer.csv"), "malignant"));
    const auto features = SplineFeatures::build(d);
    const auto design = DesignMatrix::build(features, d.samples);
    const FoldAssignment folds = make_folds(d.rows(), 5, 9);
    const TrainingView view{design, features, d.labels, folds, GamPenalty{1.0, kRidgeFloor}};
    CovariateSequence seq;
    seq.sets = {{1}, {1, 5}, {0, 1, 2, 3, 4, 5, 6, 7, 8}};
    const auto costs = uniform_costs(9, 0.0, 1.0, 5.0);
    std::vector<double> est;
    const int best = cos_select(view, seq, costs, &est);
    CHECK(est[static_cast<std::size_t>(best)] <= est.back() + 1e-12);
    for (double e : est) CHECK(est[static_cast<std::size_t>(best)] <= e);
}

TEST_CASE("classification is deterministic") {
    const TwoStage t(300, 47);
    const auto costs = uniform_costs(2, 0.01, 1.0, 2.0);
    for (int i = 0; i < 30; ++i) {
        const auto a = adacos_classify(t.bundle, t.data.row(i), costs, i);
        const auto b = adacos_classify(t.bundle, t.data.row(i), costs, i);
        CHECK(a.label == b.label);
        CHECK(a.stage == b.stage);
        CHECK(a.evaluations.front()[1].value == b.evaluations.front()[1].value);
    }
}
}
