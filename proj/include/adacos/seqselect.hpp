#pragma once

#include <string>
#include <vector>

#include "adacos/dataset.hpp"
#include "adacos/gam.hpp"

namespace adacos {

enum class SequenceOrigin { group_lasso, forward_selection };

std::string to_string(SequenceOrigin origin);
SequenceOrigin parse_origin(const std::string& text);

// Nested covariate sets S_1 < S_2 < ... < S_q and the classifier refit on each.
struct CovariateSequence {
    std::vector<CovariateSet> sets;          // each sorted
    SequenceOrigin origin = SequenceOrigin::group_lasso;
    std::vector<int> order;                  // covariates in the order they join
    std::vector<double> activation_lambdas;  // lasso only, parallel to `order`
    std::vector<GamModel> per_set_models;    // empty until refit_models

    int size() const { return static_cast<int>(sets.size()); }
    // Covariates of sets[j] that are not in sets[i].
    CovariateSet difference(int i, int j) const;
    // Throws unless the sets are strictly nested with valid indices.
    void validate(int p) const;
};

CovariateSequence nested_sets_from_path(const LassoPath& path);

// Training context shared by the CV estimators: design and spline bases are
// built once on the (outer) training data, folds partition its rows.
struct TrainingView {
    const DesignMatrix& design;
    const SplineFeatures& features;
    std::span<const int> labels;
    const FoldAssignment& folds;
    GamPenalty penalty;
};

// Per-fold mean of c_{y, delta(x_S)} on each held-out fold, with the
// classifier fit on the complement. Requires a fully specified cost model.
std::vector<double> cv_fold_misclassification(const TrainingView& view, std::span<const int> covariates,
                                              const CostModel& costs);

// Plain average over folds of the per-fold mean misclassification cost, plus
// the acquisition cost of the set.
double cv_expected_cost(const TrainingView& view, std::span<const int> covariates, const CostModel& costs);

// Greedy forward selection: S_1 = {} and each step adds the covariate with the
// lowest CV expected total cost (ties to the lowest index), up to S_{p+1} = V.
CovariateSequence forward_select(const TrainingView& view, const CostModel& costs);

// Dense refit of one model per set on all training rows.
void refit_models(CovariateSequence& seq, const DesignMatrix& design, const SplineFeatures& features,
                  std::span<const int> labels, const GamPenalty& penalty);

} // namespace adacos
