#pragma once

#include <span>
#include <string>
#include <vector>

#include "adacos/dataset.hpp"
#include "adacos/seqselect.hpp"

namespace adacos {

struct RecallSolve {
    double target_recall = 0.0;
    double threshold = 0.0;
    double implied_fn_cost = 0.0;
    double cv_recall = 0.0;                              // joint recall of the scores at the threshold
    std::vector<std::vector<double>> positive_scores;    // [set][positive sample]
    std::string warning;
};

// Largest t with (1/n1) #{score >= t} >= r; t is always one of the scores.
double solve_threshold(std::span<const double> positive_scores, double r);

// Fraction of scores >= t.
double empirical_recall(std::span<const double> scores, double t);

// c_{1,0} = (1 - t)/t * c_{0,1}. Thresholds outside [1e-6, 1 - 1e-6] are
// clamped and `warning` (if given) is filled in.
double implicit_fn_cost(double t_star, double fp_cost, std::string* warning = nullptr);

// Shared threshold for every set of the sequence: a positive sample only
// counts when its minimum score over all sets reaches t.
double solve_threshold_adaptive(const std::vector<std::vector<double>>& per_set_scores, double r);

// Per-sample minimum across sets; all sets must score the same samples.
std::vector<double> joint_minimum(const std::vector<std::vector<double>>& per_set_scores);

// Held-out class-1 probabilities of the positive training samples, one vector
// per set, using the same folds for every set.
std::vector<std::vector<double>> cv_positive_scores(const TrainingView& view, const std::vector<CovariateSet>& sets);

// Solves the threshold (adaptive when more than one set is given) and returns
// a cost model whose fn_cost is the implied one. The conversion works on the
// error costs shifted by the correct-classification cost.
RecallSolve solve_recall(const TrainingView& view, const std::vector<CovariateSet>& sets, double r,
                         const CostModel& costs, CostModel& resolved);

} // namespace adacos
