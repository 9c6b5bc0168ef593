#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adacos/dataset.hpp"
#include "adacos/gam.hpp"
#include "adacos/metrics.hpp"
#include "adacos/policy.hpp"
#include "adacos/recall.hpp"
#include "adacos/riskcore.hpp"
#include "adacos/seqselect.hpp"

namespace adacos {

enum class Mode { adacos, cos, full };
enum class Selection { lasso, forward };

std::string to_string(Mode m);
std::string to_string(Selection s);
Mode parse_mode(const std::string& text);
Selection parse_selection(const std::string& text);

struct ExperimentConfig {
    Mode mode = Mode::adacos;
    Selection selection = Selection::lasso;
    CostModel costs;                        // fn_cost unset in recall mode
    std::optional<double> target_recall;
    int xi = kDefaultXi;
    int splines = kDefaultSplineCount;
    int folds = 5;
    int inner_folds = 10;
    std::uint64_t seed = 1;
    std::vector<double> smooth_grid{0.01, 0.1, 1.0, 10.0};
    double ridge = kRidgeFloor;
    PathOptions path;

    // Throws InputError on conflicting or incomplete settings.
    void validate(int p) const;
};

// Everything learned from one training split.
struct TrainedBundle {
    Mode mode = Mode::adacos;
    Selection selection = Selection::lasso;
    std::vector<double> imputation_means;
    SplineFeatures features;
    GamPenalty penalty;
    std::vector<double> smooth_cv_deviance;   // parallel to the configured grid
    AdacosBundle adacos;                      // sequence, per-set models, conditionals
    GamModel full_model;
    int cos_index = 0;
    std::vector<double> cos_estimates;
    CostModel costs;                          // fn_cost resolved
    std::optional<RecallSolve> recall;
    std::string path_message;                 // non-empty when the lasso path was truncated

    const CovariateSequence& sequence() const { return adacos.sequence; }
};

// `train` may contain missing cells; they are imputed with its own column means.
TrainedBundle train_bundle(const Dataset& train, const ExperimentConfig& config, std::uint64_t inner_seed);

// Classifies every row of `data` (imputed with the bundle's means) under the bundle's mode.
std::vector<AcquisitionTrace> classify_all(const TrainedBundle& bundle, const Dataset& data);

struct FoldResult {
    int fold = 0;
    int test_size = 0;
    Metrics metrics;
    std::vector<CovariateSet> sequence;
    int cos_index = 0;
    double smooth_penalty = 0.0;
    double fn_cost = 0.0;
    std::optional<RecallSolve> recall;        // scores dropped
    std::string path_message;
};

struct MetricSummary {
    Summary avg_total_cost, avg_misclassification_cost, avg_covariate_cost, avg_num_covariates,
        avg_operation_costs, weighted_accuracy, fdr, recall;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::string dataset;
    int samples = 0;
    std::vector<FoldResult> folds;
    MetricSummary aggregate;
};

ExperimentReport run_experiment(const Dataset& data, const ExperimentConfig& config, const std::string& name = "");

MetricSummary aggregate(const std::vector<FoldResult>& folds);

std::string report_text(const ExperimentReport& report);
// One header line plus one line per report: configuration and aggregate metrics.
std::string report_csv(const std::vector<ExperimentReport>& reports);

} // namespace adacos
