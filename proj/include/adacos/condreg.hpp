#pragma once

#include <map>
#include <span>

#include <Eigen/Dense>

#include "adacos/dataset.hpp"
#include "adacos/gam.hpp"
#include "adacos/splines.hpp"

namespace adacos {

// Conjugate Bayesian linear regression of the unobserved predictor part
// z = sum_{i in S} beta_i^T f_i(x_i) on the spline features of the observed set A.
//
// Prior: flat intercept, slopes ~ N(0, g sigma^2 I), sigma^2 ~ scaled-inv-chi^2(nu0, s0^2)
// with s0^2 the sample variance of z.
struct ConditionalGaussian {
    CovariateSet design_set;                 // A
    CovariateSet target_set;                 // S
    std::map<int, SplineBasis> bases;        // feature maps for A
    Eigen::VectorXd weights;                 // posterior mean, intercept first
    Eigen::MatrixXd scale;                   // V_n: posterior covariance / sigma^2
    double nu_n = 0.0;
    double s2_n = 0.0;
    double prior_g = 0.0;
    double prior_nu = 0.0;
    double prior_s2 = 0.0;

    Eigen::VectorXd features(std::span<const double> x) const;   // 1 followed by phi(x_A)
    double posterior_noise_mean() const;                          // E[sigma^2 | data]
};

struct ConditionalPrediction {
    double mean = 0.0;
    double variance = 0.0;
};

struct ConditionalPrior {
    double g = 100.0;
    double nu0 = 3.0;
};

// Rows are full-length imputed samples; labels are never used.
ConditionalGaussian fit_conditional(const SampleMatrix& samples, std::span<const int> design_set,
                                    std::span<const int> target_set, const GamModel& target_model,
                                    const ConditionalPrior& prior = {});
ConditionalGaussian fit_conditional(const Dataset& d, std::span<const int> design_set,
                                    std::span<const int> target_set, const GamModel& target_model,
                                    const ConditionalPrior& prior = {});

// Student-t predictive collapsed to its mean and variance.
ConditionalPrediction predict_conditional(const ConditionalGaussian& c, std::span<const double> x);

} // namespace adacos
