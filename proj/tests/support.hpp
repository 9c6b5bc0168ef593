#pragma once

// Shared fixtures and independent numerical oracles for the test binaries.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "adacos/dataset.hpp"
#include "adacos/gam.hpp"
#include "adacos/oracle.hpp"
#include "adacos/riskcore.hpp"

namespace testing_support {

using namespace adacos;

inline std::string data_path(const std::string& name) {
    return std::string(ADACOS_DATA_DIR) + "/" + name;
}

inline double logistic(double u) {
    return 1.0 / (1.0 + std::exp(-u));
}

// Samples x_j ~ N(0,1) and y ~ Bernoulli(g(intercept + sum_j effects[j](x_j))).
inline adacos::Dataset additive_data(int n, std::uint64_t seed, double intercept,
                                     const std::vector<std::function<double(double)>>& effects) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    adacos::Dataset d;
    const int p = static_cast<int>(effects.size());
    d.samples.resize(n, p);
    for (int j = 0; j < p; ++j) d.covariate_names.push_back("x" + std::to_string(j));
    for (int i = 0; i < n; ++i) {
        double eta = intercept;
        for (int j = 0; j < p; ++j) {
            d.samples(i, j) = normal(rng);
            eta += effects[static_cast<std::size_t>(j)](d.samples(i, j));
        }
        d.labels.push_back(unif(rng) < logistic(eta) ? 1 : 0);
    }
    return d;
}

// Two covariates that are conditionally independent given a balanced label:
// x_j | y ~ N(+-shift, 1).
inline adacos::Dataset two_view_data(int n, std::uint64_t seed, double shift) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    adacos::Dataset d;
    d.samples.resize(n, 2);
    d.covariate_names = {"x0", "x1"};
    for (int i = 0; i < n; ++i) {
        const int y = i % 2;
        const double m = y == 1 ? shift : -shift;
        d.samples(i, 0) = m + normal(rng);
        d.samples(i, 1) = m + normal(rng);
        d.labels.push_back(y);
    }
    return d;
}

inline adacos::CostModel uniform_costs(int p, double c, double fp, double fn, double correct = 0.0) {
    adacos::CostModel m;
    m.covariate_costs.assign(static_cast<std::size_t>(p), c);
    m.fp_cost = fp;
    m.fn_cost = fn;
    m.correct_cost = correct;
    return m;
}

// Adaptive Gauss-Kronrod integral of approx(u) N(u; mu, sigma2) over [a, b],
// split at every breakpoint and at mu + k sigma so each piece is smooth.
inline double quadrature_expectation(const adacos::PiecewiseSigmoid& pw, double mu, double sigma2, double a, double b) {
    const double sigma = std::sqrt(sigma2);
    const double lo = std::max(a, mu - 40.0 * sigma);
    const double hi = std::min(b, mu + 40.0 * sigma);
    if (!(lo < hi)) return 0.0;
    std::vector<double> cuts{lo, hi};
    for (double bp : pw.breakpoints)
        if (bp > lo && bp < hi) cuts.push_back(bp);
    for (int k = -39; k <= 39; ++k) {
        const double c = mu + k * sigma;
        if (c > lo && c < hi) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    auto f = [&](double u) {
        const double r = (u - mu) / sigma;
        return pw(u) * std::exp(-0.5 * r * r) / (sigma * std::sqrt(2.0 * M_PI));
    };
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
        total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, cuts[k], cuts[k + 1], 4, 1e-14);
    return total;
}

// Stratified Monte-Carlo estimate of the conditional Bayes risk: one uniform
// draw per stratum of the N(mu, sigma2) quantile scale, the Bayes decision
// z >= z_star per draw, and the expected error cost under prob(u) per draw.
inline double mc_bayes_risk(const adacos::RiskQuery& q, const std::function<double(double)>& prob, int samples,
                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif;
    const boost::math::normal_distribution<double> normal(q.mu_z, std::sqrt(q.sigma2));
    double total = 0.0;
    for (int k = 0; k < samples; ++k) {
        double w = (k + unif(rng)) / samples;
        w = std::clamp(w, 1e-300, 1.0 - 1e-16);
        const double z = boost::math::quantile(normal, w);
        const double p1 = prob(z + q.offset);
        total += z >= q.z_star ? (1.0 - p1) * q.fp_cost : p1 * q.fn_cost;
    }
    return total / samples;
}

// Stationarity residual computed from scratch: gradient of the NLL at the
// solution, then the subgradient condition per group.
inline double independent_kkt(const DesignMatrix& design, std::span<const int> labels,
                              std::span<const double> weights, const PathSolution& s) {
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(design.rows(), s.intercept);
    for (int g = 0; g < design.covariates(); ++g)
        eta += design.values.middleCols(design.offsets[static_cast<std::size_t>(g)], design.widths[static_cast<std::size_t>(g)]) *
               s.groups[static_cast<std::size_t>(g)];
    Eigen::VectorXd resid(design.rows());
    for (int i = 0; i < design.rows(); ++i)
        resid(i) = 1.0 / (1.0 + std::exp(-eta(i))) - labels[static_cast<std::size_t>(i)];
    double worst = std::abs(resid.sum());
    for (int g = 0; g < design.covariates(); ++g) {
        const Eigen::VectorXd grad =
            design.values.middleCols(design.offsets[static_cast<std::size_t>(g)], design.widths[static_cast<std::size_t>(g)]).transpose() * resid;
        const double kappa = s.lambda * weights[static_cast<std::size_t>(g)];
        const Eigen::VectorXd& b = s.groups[static_cast<std::size_t>(g)];
        const double bn = b.norm();
        worst = std::max(worst, bn == 0.0 ? std::max(0.0, grad.norm() - kappa) : (grad + kappa * b / bn).norm());
    }
    return worst;
}

inline DiscreteInstance random_instance(std::mt19937_64& rng, int p, int max_alphabet, double cost_scale) {
    std::uniform_int_distribution<int> alpha(2, max_alphabet);
    std::exponential_distribution<double> weight(1.0);
    std::uniform_real_distribution<double> cost(0.0, cost_scale), mis(1.0, 20.0);
    DiscreteInstance inst;
    for (int i = 0; i < p; ++i) inst.alphabets.push_back(alpha(rng));
    double total = 0.0;
    for (std::size_t k = 0; k < inst.outcomes() * 2; ++k) {
        inst.pmf.push_back(weight(rng));
        total += inst.pmf.back();
    }
    for (auto& v : inst.pmf) v /= total;
    for (int i = 0; i < p; ++i) inst.costs.covariate_costs.push_back(cost(rng));
    inst.costs.fp_cost = mis(rng);
    inst.costs.fn_cost = mis(rng);
    return inst;
}

// A deterministic policy whose action at each state is drawn once at random.
struct RandomPolicy {
    std::shared_ptr<std::map<std::vector<int>, Decision>> table = std::make_shared<std::map<std::vector<int>, Decision>>();
    std::shared_ptr<std::mt19937_64> rng;
    int p;

    Decision operator()(const CovariateSet& observed, std::span<const int> values) const {
        std::vector<int> key(values.begin(), values.end());
        auto it = table->find(key);
        if (it != table->end()) return it->second;
        CovariateSet free;
        for (int i = 0; i < p; ++i)
            if (!std::binary_search(observed.begin(), observed.end(), i)) free.push_back(i);
        std::uniform_int_distribution<int> pick(0, static_cast<int>(free.size()) + 1);
        const int a = pick(*rng);
        Decision d = Decision::classify_as(a & 1);
        if (a >= 2) {
            CovariateSet take{free[static_cast<std::size_t>(a - 2)]};
            // sometimes buy a second covariate in the same step
            if (free.size() > 1 && (*rng)() % 3 == 0) {
                const int other = free[static_cast<std::size_t>((a - 1) % static_cast<int>(free.size()))];
                if (other != take[0]) take.push_back(other);
                std::sort(take.begin(), take.end());
            }
            d = Decision::acquire(take);
        }
        table->emplace(std::move(key), d);
        return d;
    }
};

} // namespace testing_support
