#include "adacos/experiment.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "adacos/error.hpp"

namespace adacos {

std::string to_string(Mode m) {
    switch (m) {
    case Mode::adacos: return "adacos";
    case Mode::cos: return "cos";
    case Mode::full: return "full";
    }
    return "?";
}

std::string to_string(Selection s) {
    return s == Selection::lasso ? "lasso" : "forward";
}

Mode parse_mode(const std::string& text) {
    if (text == "adacos") return Mode::adacos;
    if (text == "cos") return Mode::cos;
    if (text == "full") return Mode::full;
    throw InputError("unknown mode '" + text + "' (expected adacos, cos or full)");
}

Selection parse_selection(const std::string& text) {
    if (text == "lasso") return Selection::lasso;
    if (text == "forward") return Selection::forward;
    throw InputError("unknown selection '" + text + "' (expected lasso or forward)");
}

void ExperimentConfig::validate(int p) const {
    costs.validate(p);
    if (target_recall && costs.fn_cost) throw InputError("a false-negative cost and a target recall are mutually exclusive");
    if (!target_recall && !costs.fn_cost) throw InputError("either a false-negative cost or a target recall is required");
    if (target_recall && !(*target_recall > 0.0 && *target_recall <= 1.0))
        throw InputError("target recall must lie in (0, 1]");
    if (target_recall && selection == Selection::forward)
        throw InputError("forward selection needs a false-negative cost; use lasso selection with a target recall");
    if (xi < 2) throw InputError("xi must be at least 2");
    if (splines < 1) throw InputError("spline count must be positive");
    if (folds < 2) throw InputError("at least 2 outer folds are required");
    if (inner_folds < 2) throw InputError("at least 2 inner folds are required");
    if (smooth_grid.empty()) throw InputError("smoothness grid is empty");
    for (double s : smooth_grid)
        if (!(s >= 0.0)) throw InputError("smoothness penalties must be nonnegative");
    if (!(ridge >= 0.0)) throw InputError("ridge must be nonnegative");
}

namespace {

CovariateSet all_covariates(int p) {
    CovariateSet s(static_cast<std::size_t>(p));
    std::iota(s.begin(), s.end(), 0);
    return s;
}

// Mean over folds of the held-out mean deviance of the full model.
double cv_deviance(const DesignMatrix& design, const SplineFeatures& features, std::span<const int> labels,
                   const FoldAssignment& folds, const GamPenalty& penalty) {
    const auto all = all_covariates(design.covariates());
    double total = 0.0;
    int used = 0;
    for (int f = 0; f < folds.k; ++f) {
        const auto test = folds.test_indices(f);
        if (test.empty()) continue;
        const GamModel m = fit_gam(design, features, labels, all, penalty, folds.train_indices(f));
        const Eigen::VectorXd eta = design_linear_predictor(m, design, test);
        std::vector<double> probs;
        std::vector<int> truth;
        for (std::size_t r = 0; r < test.size(); ++r) {
            probs.push_back(sigmoid(eta(static_cast<Eigen::Index>(r))));
            truth.push_back(labels[static_cast<std::size_t>(test[r])]);
        }
        total += mean_deviance(probs, truth);
        ++used;
    }
    return total / used;
}

std::uint64_t inner_seed_for(std::uint64_t seed, int fold) {
    return seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(fold + 1));
}

} // namespace

TrainedBundle train_bundle(const Dataset& train, const ExperimentConfig& config, std::uint64_t inner_seed) {
    config.validate(train.cols());
    if (train.positives() == 0 || train.positives() == train.rows())
        throw InputError("training data must contain both classes");

    TrainedBundle b;
    b.mode = config.mode;
    b.selection = config.selection;
    b.imputation_means = observed_column_means(train);
    const Dataset d = impute_with(train, b.imputation_means);
    b.features = SplineFeatures::build(d, config.splines);
    const DesignMatrix design = DesignMatrix::build(b.features, d.samples);
    const FoldAssignment inner = make_folds(d.rows(), config.inner_folds, inner_seed);

    b.penalty = {config.smooth_grid.front(), config.ridge};
    if (config.smooth_grid.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        for (double s : config.smooth_grid) {
            const double dev = cv_deviance(design, b.features, d.labels, inner, {s, config.ridge});
            b.smooth_cv_deviance.push_back(dev);
            if (dev < best) {
                best = dev;
                b.penalty.smooth = s;
            }
        }
    }
    const TrainingView view{design, b.features, d.labels, inner, b.penalty};

    CovariateSequence seq;
    if (config.selection == Selection::lasso) {
        const LassoPath path = fit_group_lasso_path(design, d.labels, config.costs, config.path);
        if (path.truncated) b.path_message = path.message;
        seq = nested_sets_from_path(path);
    } else {
        seq = forward_select(view, config.costs);
    }
    refit_models(seq, design, b.features, d.labels, b.penalty);
    b.full_model = fit_gam(design, b.features, d.labels, all_covariates(d.cols()), b.penalty);

    b.costs = config.costs;
    if (config.target_recall) {
        const std::vector<CovariateSet> sets = config.mode == Mode::full ? std::vector<CovariateSet>{all_covariates(d.cols())} : seq.sets;
        b.recall = solve_recall(view, sets, *config.target_recall, config.costs, b.costs);
    }

    b.adacos.conditionals = fit_all_conditionals(seq, d.samples);
    b.cos_index = cos_select(view, seq, b.costs, &b.cos_estimates);
    b.adacos.sequence = std::move(seq);
    b.adacos.sigmoid = build_piecewise_sigmoid(config.xi);
    return b;
}

std::vector<AcquisitionTrace> classify_all(const TrainedBundle& bundle, const Dataset& data) {
    if (static_cast<int>(bundle.imputation_means.size()) != data.cols())
        throw InputError("data has a different number of covariates than the bundle");
    const Dataset d = impute_with(data, bundle.imputation_means);
    std::vector<AcquisitionTrace> traces;
    traces.reserve(static_cast<std::size_t>(d.rows()));
    for (int i = 0; i < d.rows(); ++i) {
        const auto x = d.row(i);
        switch (bundle.mode) {
        case Mode::adacos: traces.push_back(adacos_classify(bundle.adacos, x, bundle.costs, i)); break;
        case Mode::cos:
            traces.push_back(fixed_set_classify(bundle.sequence().per_set_models.at(static_cast<std::size_t>(bundle.cos_index)), x,
                                                bundle.costs, i));
            break;
        case Mode::full: traces.push_back(full_model_classify(bundle.full_model, x, bundle.costs, i)); break;
        }
        if (!d.labels.empty()) record_outcome(traces.back(), d.labels[static_cast<std::size_t>(i)], bundle.costs);
    }
    return traces;
}

MetricSummary aggregate(const std::vector<FoldResult>& folds) {
    auto pick = [&](double Metrics::*field) {
        std::vector<double> v;
        for (const auto& f : folds) v.push_back(f.metrics.*field);
        return summarize(v);
    };
    MetricSummary s;
    s.avg_total_cost = pick(&Metrics::avg_total_cost);
    s.avg_misclassification_cost = pick(&Metrics::avg_misclassification_cost);
    s.avg_covariate_cost = pick(&Metrics::avg_covariate_cost);
    s.avg_num_covariates = pick(&Metrics::avg_num_covariates);
    s.avg_operation_costs = pick(&Metrics::avg_operation_costs);
    s.weighted_accuracy = pick(&Metrics::weighted_accuracy);
    s.fdr = pick(&Metrics::fdr);
    s.recall = pick(&Metrics::recall);
    return s;
}

ExperimentReport run_experiment(const Dataset& data, const ExperimentConfig& config, const std::string& name) {
    config.validate(data.cols());
    ExperimentReport report;
    report.config = config;
    report.dataset = name;
    report.samples = data.rows();
    const FoldAssignment outer = make_folds(data.rows(), config.folds, config.seed);
    for (int f = 0; f < outer.k; ++f) {
        const auto train_idx = outer.train_indices(f);
        const auto test_idx = outer.test_indices(f);
        const Dataset train = select_rows(data, train_idx);
        const Dataset test = select_rows(data, test_idx);
        const TrainedBundle bundle = train_bundle(train, config, inner_seed_for(config.seed, f));
        const auto traces = classify_all(bundle, test);

        FoldResult r;
        r.fold = f;
        r.test_size = test.rows();
        r.metrics = compute_metrics(traces, test.labels, bundle.costs);
        r.sequence = bundle.sequence().sets;
        r.cos_index = bundle.cos_index;
        r.smooth_penalty = bundle.penalty.smooth;
        r.fn_cost = *bundle.costs.fn_cost;
        r.recall = bundle.recall;
        if (r.recall) r.recall->positive_scores.clear();
        r.path_message = bundle.path_message;
        report.folds.push_back(std::move(r));
    }
    report.aggregate = aggregate(report.folds);
    return report;
}

namespace {

struct Row {
    const char* name;
    Summary MetricSummary::*summary;
    double Metrics::*metric;
};

constexpr Row kRows[] = {
    {"avg_total_cost", &MetricSummary::avg_total_cost, &Metrics::avg_total_cost},
    {"avg_misclassification_cost", &MetricSummary::avg_misclassification_cost, &Metrics::avg_misclassification_cost},
    {"avg_covariate_cost", &MetricSummary::avg_covariate_cost, &Metrics::avg_covariate_cost},
    {"avg_num_covariates", &MetricSummary::avg_num_covariates, &Metrics::avg_num_covariates},
    {"avg_operation_costs", &MetricSummary::avg_operation_costs, &Metrics::avg_operation_costs},
    {"weighted_accuracy", &MetricSummary::weighted_accuracy, &Metrics::weighted_accuracy},
    {"fdr", &MetricSummary::fdr, &Metrics::fdr},
    {"recall", &MetricSummary::recall, &Metrics::recall},
};

std::string set_text(const CovariateSet& s) {
    std::ostringstream out;
    out << '{';
    for (std::size_t k = 0; k < s.size(); ++k) out << (k ? "," : "") << s[k];
    out << '}';
    return out.str();
}

} // namespace

std::string report_text(const ExperimentReport& report) {
    const auto& c = report.config;
    std::ostringstream out;
    out << "dataset      " << (report.dataset.empty() ? "-" : report.dataset) << " (" << report.samples << " samples)\n";
    out << "mode         " << to_string(c.mode) << ", selection " << to_string(c.selection) << "\n";
    out << "costs        fp " << c.costs.fp_cost << ", fn ";
    if (c.costs.fn_cost) out << *c.costs.fn_cost; else out << "(target recall " << *c.target_recall << ")";
    out << ", correct " << c.costs.correct_cost << "\n";
    out << "settings     xi " << c.xi << ", splines " << c.splines << ", folds " << c.folds << ", seed " << c.seed << "\n\n";

    out << std::left << std::setw(28) << "metric" << std::right << std::setw(12) << "mean" << std::setw(12) << "sd";
    for (const auto& f : report.folds) out << std::setw(11) << ("fold" + std::to_string(f.fold));
    out << "\n" << std::fixed;
    for (const auto& row : kRows) {
        const Summary& s = report.aggregate.*row.summary;
        out << std::left << std::setw(28) << row.name << std::right << std::setprecision(4) << std::setw(12) << s.mean
            << std::setw(12) << s.sd;
        for (const auto& f : report.folds) out << std::setw(11) << f.metrics.*row.metric;
        out << "\n";
    }
    out << "\n";
    for (const auto& f : report.folds) {
        out << "fold " << f.fold << ": smooth " << std::setprecision(2) << f.smooth_penalty << ", fn_cost "
            << std::setprecision(4) << f.fn_cost;
        if (f.recall) out << ", threshold " << f.recall->threshold << ", cv recall " << f.recall->cv_recall;
        out << ", sequence";
        for (const auto& s : f.sequence) out << ' ' << set_text(s);
        if (c.mode == Mode::cos) out << ", cos set " << f.cos_index;
        out << "\n";
        if (!f.path_message.empty()) out << "  warning: " << f.path_message << "\n";
        if (f.recall && !f.recall->warning.empty()) out << "  warning: " << f.recall->warning << "\n";
    }
    return out.str();
}

std::string report_csv(const std::vector<ExperimentReport>& reports) {
    std::ostringstream out;
    out << "dataset,mode,selection,fp_cost,fn_cost,target_recall,correct_cost";
    for (const auto& row : kRows) out << ',' << row.name << "_mean," << row.name << "_sd";
    out << "\n" << std::setprecision(10);
    for (const auto& r : reports) {
        const auto& c = r.config;
        double fn = 0.0;
        for (const auto& f : r.folds) fn += f.fn_cost;
        fn /= static_cast<double>(std::max<std::size_t>(r.folds.size(), 1));
        out << r.dataset << ',' << to_string(c.mode) << ',' << to_string(c.selection) << ',' << c.costs.fp_cost << ','
            << fn << ',';
        if (c.target_recall) out << *c.target_recall;
        out << ',' << c.costs.correct_cost;
        for (const auto& row : kRows) {
            const Summary& s = r.aggregate.*row.summary;
            out << ',' << s.mean << ',' << s.sd;
        }
        out << "\n";
    }
    return out.str();
}

} // namespace adacos
