#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "adacos/dataset.hpp"
#include "adacos/splines.hpp"

namespace adacos {

double sigmoid(double u);
// log(1 + exp(u)) without overflow.
double softplus(double u);

// Logistic additive model p(y=1|x) = g(intercept + sum_i beta_i^T f_i(x_i)).
struct GamModel {
    double intercept = 0.0;
    CovariateSet active_set;                       // sorted
    std::map<int, Eigen::VectorXd> coefficients;   // keyed exactly by active_set
    std::map<int, SplineBasis> bases;              // keyed exactly by active_set
    double smooth_penalty = 0.0;
    double ridge = 0.0;

    // Sum of beta_i^T f_i(x_i) over the given covariates (all must be active).
    double partial_predictor(std::span<const double> x, std::span<const int> covariates) const;
    double linear_predictor(std::span<const double> x) const;
    // x is a full-length row; only active covariates are read and they must not be NaN.
    double predict_prob(std::span<const double> x) const;
    bool uses(int covariate) const;
};

struct GamPenalty {
    double smooth = 1.0;   // weight of sum_i ||D2 beta_i||^2
    double ridge = 1e-6;   // weight of ||beta||^2 + intercept^2
};

inline constexpr double kRidgeFloor = 1e-6;

struct FitDiagnostics {
    int iterations = 0;
    double objective = 0.0;
    double gradient_norm = 0.0;
};

// Linear predictor of `model` for the given design rows (bases must match the design).
Eigen::VectorXd design_linear_predictor(const GamModel& model, const DesignMatrix& design, std::span<const int> rows);

// Penalized Newton / IRLS fit of the logistic additive model on covariates S.
// `rows` selects training rows of the design (empty = all rows).
GamModel fit_gam(const DesignMatrix& design, const SplineFeatures& features, std::span<const int> labels,
                 std::span<const int> covariates, const GamPenalty& penalty, std::span<const int> rows = {},
                 FitDiagnostics* diagnostics = nullptr);

// Convenience overload: builds splines on d (which must be imputed).
GamModel fit_gam(const Dataset& d, std::span<const int> covariates, double smooth_penalty, double ridge,
                 int splines = kDefaultSplineCount);

// Second-order difference operator, (s-2) x s (empty when s < 3).
Eigen::MatrixXd second_difference(int s);

// Mean binomial deviance of probabilities against labels.
double mean_deviance(std::span<const double> probs, std::span<const int> labels);

// ---------------------------------------------------------------------------
// Cost-scaled group lasso path:
//   minimize  NLL(intercept, beta) + lambda * sum_i c_i ||beta_i||_2

struct PathSolution {
    double lambda = 0.0;
    double intercept = 0.0;
    std::vector<Eigen::VectorXd> groups;    // one per covariate, zero when inactive
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
    std::vector<double> objective_trace;    // objective after every solver iteration

    bool active(int covariate) const;
};

struct LassoPath {
    std::vector<double> lambdas;            // strictly decreasing
    std::vector<PathSolution> solutions;
    std::vector<double> objective_values;
    std::vector<double> penalty_weights;    // c_i with the zero-cost floor applied
    bool truncated = false;
    std::string message;
};

struct PathOptions {
    int grid_size = 50;
    double min_ratio = 1e-3;
    double tolerance = 1e-7;    // KKT residual target
    int max_iterations = 200;
};

inline constexpr double kPenaltyCostFloor = 1e-6;

// Unpenalized negative log-likelihood over every design column and its
// gradient; theta = (intercept, all groups in design order).
double design_nll(const DesignMatrix& design, std::span<const int> labels, const Eigen::VectorXd& theta);
Eigen::VectorXd design_nll_gradient(const DesignMatrix& design, std::span<const int> labels, const Eigen::VectorXd& theta);

double lambda_max(const DesignMatrix& design, std::span<const int> labels, std::span<const double> weights);

LassoPath fit_group_lasso_path(const DesignMatrix& design, std::span<const int> labels, const CostModel& costs,
                               const PathOptions& options = {});
// Same problem on an explicit decreasing lambda grid.
LassoPath fit_group_lasso_path(const DesignMatrix& design, std::span<const int> labels, const CostModel& costs,
                               std::span<const double> lambdas, const PathOptions& options = {});

// Largest violation of the group-lasso optimality conditions at a solution.
double group_kkt_residual(const DesignMatrix& design, std::span<const int> labels, std::span<const double> weights,
                          const PathSolution& solution);

} // namespace adacos
