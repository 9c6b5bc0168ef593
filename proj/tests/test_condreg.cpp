#include <doctest.h>

#include <cmath>
#include <random>

#include "adacos/condreg.hpp"
#include "adacos/error.hpp"
#include "support.hpp"

using namespace adacos;

namespace {

// x1 = h(x0) + noise * e; labels are arbitrary.
Dataset linked(int n, std::uint64_t seed, double noise) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Dataset d;
    d.samples.resize(n, 3);
    d.covariate_names = {"x0", "x1", "x2"};
    for (int i = 0; i < n; ++i) {
        const double x0 = normal(rng);
        d.samples(i, 0) = x0;
        d.samples(i, 1) = std::sin(x0) + 0.3 * x0 + noise * normal(rng);
        d.samples(i, 2) = normal(rng);
        d.labels.push_back(normal(rng) > 0.0 ? 1 : 0);
    }
    return d;
}

GamModel target_model(const Dataset& d, const CovariateSet& active) {
    // a fixed-coefficient model so z is known without any fitting
    GamModel m;
    m.active_set = active;
    for (int c : active) {
        std::vector<double> col(static_cast<std::size_t>(d.rows()));
        for (int i = 0; i < d.rows(); ++i) col[static_cast<std::size_t>(i)] = d.samples(i, c);
        m.bases[c] = build_basis(col);
        Eigen::VectorXd beta(m.bases[c].size());
        for (Eigen::Index k = 0; k < beta.size(); ++k) beta(k) = 0.3 * std::cos(1.0 + c + 0.7 * static_cast<double>(k));
        m.coefficients[c] = beta;
    }
    return m;
}

} // namespace

TEST_CASE("empty observed set predicts the sample mean") {
    Dataset d;
    d.samples.resize(3, 1);
    d.samples << 0.0, 1.0, 2.0;
    d.labels = {0, 1, 0};
    d.covariate_names = {"a"};
    GamModel m;
    m.active_set = {0};
    // basis trained on a wider column so the three rows can carry a nonzero mean
    m.bases[0] = build_basis(std::vector<double>{0.0, 1.0, 2.0, 3.0});
    // pick beta so that z takes the values 1, 2, 3
    const Eigen::VectorXd f0 = m.bases[0].transform(0.0);
    const Eigen::VectorXd f2 = m.bases[0].transform(2.0);
    Eigen::MatrixXd f(3, f0.size());
    f.row(0) = f0;
    f.row(1) = m.bases[0].transform(1.0);
    f.row(2) = f2;
    const Eigen::Vector3d z(1.0, 2.0, 3.0);
    m.coefficients[0] = f.completeOrthogonalDecomposition().solve(z);
    REQUIRE((f * m.coefficients[0] - z).norm() < 1e-9);

    const CovariateSet none, s{0};
    const auto c = fit_conditional(d, none, s, m);
    for (double x : {-5.0, 0.0, 7.0}) {
        const std::vector<double> row{x};
        const auto pred = predict_conditional(c, row);
        CHECK(pred.mean == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(pred.variance > 0.0);
    }
    // intercept-only predictive: nu_n/(nu_n-2) s_n^2 (1 + 1/n)
    const double nu = 3.0 + 3.0 - 1.0;
    const double s2 = (3.0 * 1.0 + 2.0) / nu;
    CHECK(predict_conditional(c, std::vector<double>{0.0}).variance == doctest::Approx(nu / (nu - 2.0) * s2 * (4.0 / 3.0)));
}

TEST_CASE("noiseless linear target is recovered") {
    Dataset d = linked(1000, 3, 0.0);
    // x1 copies x0 so z is an exact linear function of the features of x0
    d.samples.col(1) = d.samples.col(0);
    const GamModel m = target_model(d, {1});
    const CovariateSet a{0}, s{1};
    const auto c = fit_conditional(d, a, s, m);
    for (int i = 0; i < 50; ++i) {
        const auto pred = predict_conditional(c, d.row(i));
        CHECK(std::abs(pred.mean - m.partial_predictor(d.row(i), s)) < 1e-3);
        CHECK(pred.variance < 1e-2);
    }
}

TEST_CASE("predictive variance covers the noise and is affine in the mean") {
    const Dataset d = linked(400, 5, 0.4);
    const GamModel m = target_model(d, {0, 1, 2});
    const CovariateSet a{0}, s{1, 2};
    const auto c = fit_conditional(d, a, s, m);
    CHECK(c.nu_n == doctest::Approx(3.0 + 400.0 - 1.0));
    for (int i = 0; i < 30; ++i) {
        const auto x = d.row(i);
        const auto pred = predict_conditional(c, x);
        CHECK(pred.variance >= c.posterior_noise_mean());
        const Eigen::VectorXd phi = c.features(x);
        CHECK(phi(0) == 1.0);
        CHECK(pred.mean == doctest::Approx(phi.dot(c.weights)).epsilon(1e-14));
        const auto again = predict_conditional(c, x);
        CHECK(again.mean == pred.mean);
        CHECK(again.variance == pred.variance);
    }
    // unobserved covariates may be NaN
    std::vector<double> partial(d.row(0).begin(), d.row(0).end());
    partial[1] = partial[2] = NAN;
    CHECK(predict_conditional(c, partial).mean == predict_conditional(c, d.row(0)).mean);
    partial[0] = NAN;
    CHECK_THROWS_AS(predict_conditional(c, partial), InputError);
}

TEST_CASE("conditional fit errors") {
    const Dataset d = linked(50, 6, 0.3);
    const GamModel m = target_model(d, {0, 1});
    const CovariateSet a{0}, s{0, 1}, other{2};
    CHECK_THROWS_AS(fit_conditional(d, a, s, m), InputError);
    CHECK_THROWS_AS(fit_conditional(d, a, other, m), InputError);
    CHECK_THROWS_AS(fit_conditional(SampleMatrix(0, 3), a, CovariateSet{1}, m), InputError);
    Dataset holes = d;
    holes.samples(2, 0) = NAN;
    CHECK_THROWS_AS(fit_conditional(holes, a, CovariateSet{1}, m), InputError);
}

TEST_SUITE("properties") {
TEST_CASE("fitting never reads labels") {
    Dataset d = linked(300, 7, 0.5);
    const GamModel m = target_model(d, {1, 2});
    const CovariateSet a{0}, s{1, 2};
    const auto c1 = fit_conditional(d, a, s, m);
    for (auto& y : d.labels) y = 1 - y;
    const auto c2 = fit_conditional(d, a, s, m);
    CHECK((c1.weights - c2.weights).norm() == 0.0);
    CHECK(c1.s2_n == c2.s2_n);
}

TEST_CASE("predictive variance does not grow with more noiseless data") {
    Dataset d = linked(1600, 8, 0.0);
    d.samples.col(1) = d.samples.col(0);
    const GamModel m = target_model(d, {0, 1});
    const CovariateSet a{0}, s{1};
    std::vector<double> prev(10, std::numeric_limits<double>::infinity());
    for (int n : {100, 200, 400, 800, 1600}) {
        const SampleMatrix subset = d.samples.topRows(n);
        const auto c = fit_conditional(subset, a, s, m);
        for (int probe = 0; probe < 10; ++probe) {
            const double v = predict_conditional(c, d.row(probe * 7)).variance;
            CHECK(v <= prev[static_cast<std::size_t>(probe)]);
            prev[static_cast<std::size_t>(probe)] = v;
        }
    }
}

TEST_CASE("predictive distribution is calibrated on held-out rows") {
    const Dataset train = linked(2000, 9, 0.5);
    const Dataset held = linked(20000, 10, 0.5);
    const GamModel m = target_model(train, {0, 1});
    const CovariateSet a{0}, s{1};
    const auto c = fit_conditional(train, a, s, m);
    int probes = 0, covered = 0;
    for (double centre = -1.8; centre <= 1.8; centre += 0.2) {
        double sum = 0.0;
        int count = 0;
        for (int i = 0; i < held.rows(); ++i) {
            if (std::abs(held.samples(i, 0) - centre) > 0.02) continue;
            sum += m.partial_predictor(held.row(i), s);
            ++count;
        }
        if (count < 20) continue;
        std::vector<double> x{centre, NAN, NAN};
        const auto pred = predict_conditional(c, x);
        ++probes;
        covered += std::abs(sum / count - pred.mean) <= 3.0 * std::sqrt(pred.variance);
    }
    REQUIRE(probes >= 15);
    CHECK(covered >= 0.95 * probes);
}
}
