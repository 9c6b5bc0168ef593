#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "adacos/condreg.hpp"
#include "adacos/dataset.hpp"
#include "adacos/gam.hpp"
#include "adacos/riskcore.hpp"
#include "adacos/seqselect.hpp"

namespace adacos {

struct Decision {
    enum class Kind { classify, acquire };
    Kind kind = Kind::classify;
    int label = 0;                 // classify
    CovariateSet covariates;       // acquire: disjoint from what is already observed

    static Decision classify_as(int label) { return {Kind::classify, label, {}}; }
    static Decision acquire(CovariateSet s) { return {Kind::acquire, 0, std::move(s)}; }
};

// One future-cost evaluation made while deciding at a stage.
struct FutureCostEval {
    int target = 0;        // stage j (0-based); -1 for F(empty)
    double value = 0.0;
};

struct AcquisitionTrace {
    int sample = -1;
    std::vector<CovariateSet> acquired;               // newly acquired covariates per stage
    std::vector<std::vector<FutureCostEval>> evaluations;   // per stage where the stop test ran
    int stage = 0;                                    // 0-based stage that classified
    int label = 0;
    double covariate_cost = 0.0;
    std::optional<int> truth;
    double misclassification_cost = 0.0;              // set by record_outcome

    int covariate_count() const;
    CovariateSet observed() const;
    double total_cost() const { return covariate_cost + misclassification_cost; }
};

void record_outcome(AcquisitionTrace& trace, int truth, const CostModel& costs);

// Returns 1 iff p1 c_{1,0} >= (1 - p1) c_{0,1} (shifted costs).
int bayes_classify(double p1, const CostModel& costs);

// Everything the adaptive policy needs at inference time.
struct AdacosBundle {
    CovariateSequence sequence;                                     // with per_set_models
    std::map<std::pair<int, int>, ConditionalGaussian> conditionals;   // (i, j), i < j
    PiecewiseSigmoid sigmoid;

    const ConditionalGaussian& conditional(int i, int j) const;
};

// Trains one conditional regression for every stage pair i < j.
std::map<std::pair<int, int>, ConditionalGaussian> fit_all_conditionals(const CovariateSequence& seq,
                                                                         const SampleMatrix& samples,
                                                                         const ConditionalPrior& prior = {});

// Walks the sequence on sample `x`, reading only covariates it has acquired.
AcquisitionTrace adacos_classify(const AdacosBundle& bundle, std::span<const double> x, const CostModel& costs,
                                 int sample = -1);

// Index of the set in `seq` minimizing the CV expected total cost (ties to the smaller index).
int cos_select(const TrainingView& view, const CovariateSequence& seq, const CostModel& costs,
               std::vector<double>* estimates = nullptr);

// Acquires every covariate of `model` at once and classifies.
AcquisitionTrace fixed_set_classify(const GamModel& model, std::span<const double> x, const CostModel& costs,
                                    int sample = -1);
AcquisitionTrace full_model_classify(const GamModel& model, std::span<const double> x, const CostModel& costs,
                                     int sample = -1);

} // namespace adacos
