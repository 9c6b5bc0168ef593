#pragma once

#include <span>
#include <vector>

#include "adacos/condreg.hpp"
#include "adacos/dataset.hpp"
#include "adacos/seqselect.hpp"

namespace adacos {

// Chord interpolation of the logistic function on [-10, 10] with flat tails.
// Segment t (0-based) covers [lower(t), upper(t)); segment 0 and segment
// xi + 1 are the constant tails.
struct PiecewiseSigmoid {
    int xi = 0;
    std::vector<double> breakpoints;   // xi + 1 finite breakpoints, -10 .. 10
    std::vector<double> slopes;        // xi + 2 segments
    std::vector<double> intercepts;

    int segments() const { return static_cast<int>(slopes.size()); }
    double lower(int t) const;
    double upper(int t) const;
    double operator()(double u) const;
};

inline constexpr int kDefaultXi = 40;

PiecewiseSigmoid build_piecewise_sigmoid(int xi = kDefaultXi);

// Integral over [a, b] of approx(u) * N(u; mu, sigma2).
double segment_gaussian_expectation(const PiecewiseSigmoid& pw, double mu, double sigma2, double a, double b);

// Conditional Bayes risk when z ~ N(mu_z, sigma2) is the only unknown part of
// the linear predictor u = z + offset. Costs are the two error costs with
// both correct outcomes costing zero.
struct RiskQuery {
    double z_star = 0.0;   // log(fp/fn) - offset: class 1 is chosen iff z >= z_star
    double offset = 0.0;
    double mu_z = 0.0;
    double sigma2 = 1.0;
    double fp_cost = 0.0;
    double fn_cost = 0.0;
};

RiskQuery make_risk_query(double offset, double mu_z, double sigma2, double fp_cost, double fn_cost);
double conditional_bayes_risk(const RiskQuery& q, const PiecewiseSigmoid& pw);

// Expected remaining cost when classifying now with class-1 probability p1.
double immediate_cost(double p1, const CostModel& costs);

// F_{x_{S_i}}(S_j \ S_i) for 0-based stages i < j. `x` holds the observed
// covariates of S_i (others may be NaN); `cond` regresses S_j \ S_i on S_i.
double future_cost(const CovariateSequence& seq, const ConditionalGaussian& cond, std::span<const double> x, int i,
                   int j, const CostModel& costs, const PiecewiseSigmoid& pw);
// F_{x_{S_i}}(empty set).
double future_cost_now(const CovariateSequence& seq, std::span<const double> x, int i, const CostModel& costs);

} // namespace adacos
