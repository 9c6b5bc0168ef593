#include "adacos/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adacos/error.hpp"

namespace adacos {

namespace {

std::vector<double> masked(std::size_t p) {
    return std::vector<double>(p, std::numeric_limits<double>::quiet_NaN());
}

void reveal(std::vector<double>& observed, std::span<const double> source, const CovariateSet& covariates) {
    for (int c : covariates) {
        const double v = source[static_cast<std::size_t>(c)];
        if (std::isnan(v)) throw InputError("acquired covariate " + std::to_string(c) + " has no value");
        observed[static_cast<std::size_t>(c)] = v;
    }
}

} // namespace

int AcquisitionTrace::covariate_count() const {
    return static_cast<int>(observed().size());
}

CovariateSet AcquisitionTrace::observed() const {
    CovariateSet all;
    for (const auto& s : acquired) all.insert(all.end(), s.begin(), s.end());
    std::sort(all.begin(), all.end());
    return all;
}

void record_outcome(AcquisitionTrace& trace, int truth, const CostModel& costs) {
    trace.truth = truth;
    trace.misclassification_cost = costs.misclassification(truth, trace.label);
}

int bayes_classify(double p1, const CostModel& costs) {
    return p1 * costs.shifted_fn() >= (1.0 - p1) * costs.shifted_fp() ? 1 : 0;
}

const ConditionalGaussian& AdacosBundle::conditional(int i, int j) const {
    auto it = conditionals.find({i, j});
    if (it == conditionals.end())
        throw InputError("bundle has no conditional model for stages " + std::to_string(i) + "," + std::to_string(j));
    return it->second;
}

std::map<std::pair<int, int>, ConditionalGaussian> fit_all_conditionals(const CovariateSequence& seq,
                                                                         const SampleMatrix& samples,
                                                                         const ConditionalPrior& prior) {
    if (seq.per_set_models.size() != seq.sets.size()) throw InputError("sequence models are not fitted");
    std::map<std::pair<int, int>, ConditionalGaussian> out;
    for (int i = 0; i < seq.size(); ++i)
        for (int j = i + 1; j < seq.size(); ++j)
            out.emplace(std::pair{i, j}, fit_conditional(samples, seq.sets[static_cast<std::size_t>(i)], seq.difference(i, j),
                                                        seq.per_set_models[static_cast<std::size_t>(j)], prior));
    return out;
}

AcquisitionTrace adacos_classify(const AdacosBundle& bundle, std::span<const double> x, const CostModel& costs,
                                 int sample) {
    const auto& seq = bundle.sequence;
    const int q = seq.size();
    if (q < 1 || seq.per_set_models.size() != seq.sets.size()) throw InputError("bundle sequence is not trained");
    if (static_cast<int>(x.size()) < costs.size()) throw InputError("sample is shorter than the cost model");

    AcquisitionTrace trace;
    trace.sample = sample;
    auto observed = masked(x.size());
    trace.acquired.push_back(seq.sets[0]);
    reveal(observed, x, seq.sets[0]);

    int i = 0;
    for (; i < q - 1; ++i) {
        std::vector<FutureCostEval> evals;
        const double now = future_cost_now(seq, observed, i, costs);
        evals.push_back({-1, now});
        bool improves = false;
        for (int j = i + 1; j < q; ++j) {
            const double f = future_cost(seq, bundle.conditional(i, j), observed, i, j, costs, bundle.sigmoid);
            evals.push_back({j, f});
            if (f < now) improves = true;
        }
        trace.evaluations.push_back(std::move(evals));
        if (!improves) break;
        const auto next = seq.difference(i, i + 1);
        trace.acquired.push_back(next);
        reveal(observed, x, next);
    }
    trace.stage = i;
    trace.label = bayes_classify(seq.per_set_models[static_cast<std::size_t>(i)].predict_prob(observed), costs);
    trace.covariate_cost = costs.acquisition_cost(trace.observed());
    return trace;
}

int cos_select(const TrainingView& view, const CovariateSequence& seq, const CostModel& costs,
               std::vector<double>* estimates) {
    if (seq.sets.empty()) throw InputError("cannot select from an empty sequence");
    int best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<double> values;
    for (int k = 0; k < seq.size(); ++k) {
        const double v = cv_expected_cost(view, seq.sets[static_cast<std::size_t>(k)], costs);
        values.push_back(v);
        if (v < best_cost) {
            best_cost = v;
            best = k;
        }
    }
    if (estimates) *estimates = std::move(values);
    return best;
}

AcquisitionTrace fixed_set_classify(const GamModel& model, std::span<const double> x, const CostModel& costs,
                                    int sample) {
    AcquisitionTrace trace;
    trace.sample = sample;
    auto observed = masked(x.size());
    trace.acquired.push_back(model.active_set);
    reveal(observed, x, model.active_set);
    trace.label = bayes_classify(model.predict_prob(observed), costs);
    trace.covariate_cost = costs.acquisition_cost(model.active_set);
    return trace;
}

AcquisitionTrace full_model_classify(const GamModel& model, std::span<const double> x, const CostModel& costs,
                                     int sample) {
    if (static_cast<int>(model.active_set.size()) != costs.size())
        throw InputError("full model must use every covariate");
    return fixed_set_classify(model, x, costs, sample);
}

} // namespace adacos
