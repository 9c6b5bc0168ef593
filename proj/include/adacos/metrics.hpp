#pragma once

#include <span>
#include <vector>

#include "adacos/dataset.hpp"
#include "adacos/policy.hpp"

namespace adacos {

inline constexpr double kPositiveWeight = 10.0;

// Mean of c_{y, yhat} + acquisition cost over the traces.
double avg_total_cost(std::span<const AcquisitionTrace> traces, std::span<const int> labels, const CostModel& costs);
// Mean of (1 - y) yhat c_{0,1} + acquisition cost.
double avg_operation_costs(std::span<const AcquisitionTrace> traces, std::span<const int> labels,
                           const CostModel& costs);
// (10 TP + TN) / (10 positives + negatives).
double weighted_accuracy(std::span<const int> preds, std::span<const int> labels, double weight = kPositiveWeight);
// FP / (FP + TP); 0 when nothing is predicted positive.
double fdr(std::span<const int> preds, std::span<const int> labels);
// TP / positives; 1 when there are no positives.
double recall(std::span<const int> preds, std::span<const int> labels);

struct Metrics {
    double avg_total_cost = 0.0;
    double avg_misclassification_cost = 0.0;
    double avg_covariate_cost = 0.0;
    double avg_num_covariates = 0.0;
    double avg_operation_costs = 0.0;
    double weighted_accuracy = 0.0;
    double fdr = 0.0;
    double recall = 0.0;
};

Metrics compute_metrics(std::span<const AcquisitionTrace> traces, std::span<const int> labels, const CostModel& costs);

struct Summary {
    double mean = 0.0;
    double sd = 0.0;   // sample standard deviation; 0 for a single value
};

Summary summarize(std::span<const double> values);

} // namespace adacos
