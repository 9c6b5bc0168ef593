#include "adacos/metrics.hpp"

#include <cmath>

#include "adacos/error.hpp"

namespace adacos {

namespace {

void check_sizes(std::size_t a, std::size_t b) {
    if (a != b) throw InputError("metric inputs have different lengths");
    if (a == 0) throw InputError("metric inputs are empty");
}

std::vector<int> predictions(std::span<const AcquisitionTrace> traces) {
    std::vector<int> out;
    out.reserve(traces.size());
    for (const auto& t : traces) out.push_back(t.label);
    return out;
}

} // namespace

double avg_total_cost(std::span<const AcquisitionTrace> traces, std::span<const int> labels, const CostModel& costs) {
    check_sizes(traces.size(), labels.size());
    double total = 0.0;
    for (std::size_t k = 0; k < traces.size(); ++k)
        total += costs.misclassification(labels[k], traces[k].label) + traces[k].covariate_cost;
    return total / static_cast<double>(traces.size());
}

double avg_operation_costs(std::span<const AcquisitionTrace> traces, std::span<const int> labels,
                           const CostModel& costs) {
    check_sizes(traces.size(), labels.size());
    double total = 0.0;
    for (std::size_t k = 0; k < traces.size(); ++k) {
        if (labels[k] == 0 && traces[k].label == 1) total += costs.fp_cost;
        total += traces[k].covariate_cost;
    }
    return total / static_cast<double>(traces.size());
}

double weighted_accuracy(std::span<const int> preds, std::span<const int> labels, double weight) {
    check_sizes(preds.size(), labels.size());
    double hit = 0.0, all = 0.0;
    for (std::size_t k = 0; k < preds.size(); ++k) {
        const double w = labels[k] == 1 ? weight : 1.0;
        all += w;
        if (preds[k] == labels[k]) hit += w;
    }
    return hit / all;
}

double fdr(std::span<const int> preds, std::span<const int> labels) {
    check_sizes(preds.size(), labels.size());
    int tp = 0, fp = 0;
    for (std::size_t k = 0; k < preds.size(); ++k) {
        if (preds[k] != 1) continue;
        if (labels[k] == 1) ++tp; else ++fp;
    }
    return tp + fp == 0 ? 0.0 : static_cast<double>(fp) / (tp + fp);
}

double recall(std::span<const int> preds, std::span<const int> labels) {
    check_sizes(preds.size(), labels.size());
    int tp = 0, pos = 0;
    for (std::size_t k = 0; k < preds.size(); ++k) {
        if (labels[k] != 1) continue;
        ++pos;
        if (preds[k] == 1) ++tp;
    }
    return pos == 0 ? 1.0 : static_cast<double>(tp) / pos;
}

Metrics compute_metrics(std::span<const AcquisitionTrace> traces, std::span<const int> labels, const CostModel& costs) {
    check_sizes(traces.size(), labels.size());
    const auto preds = predictions(traces);
    Metrics m;
    const auto n = static_cast<double>(traces.size());
    for (std::size_t k = 0; k < traces.size(); ++k) {
        m.avg_misclassification_cost += costs.misclassification(labels[k], traces[k].label);
        m.avg_covariate_cost += traces[k].covariate_cost;
        m.avg_num_covariates += traces[k].covariate_count();
    }
    m.avg_misclassification_cost /= n;
    m.avg_covariate_cost /= n;
    m.avg_num_covariates /= n;
    m.avg_total_cost = avg_total_cost(traces, labels, costs);
    m.avg_operation_costs = avg_operation_costs(traces, labels, costs);
    m.weighted_accuracy = weighted_accuracy(preds, labels);
    m.fdr = fdr(preds, labels);
    m.recall = recall(preds, labels);
    return m;
}

Summary summarize(std::span<const double> values) {
    if (values.empty()) throw InputError("cannot summarize an empty series");
    Summary s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

} // namespace adacos
