#include "adacos/seqselect.hpp"

#include <algorithm>
#include <limits>

#include "adacos/error.hpp"
#include "adacos/policy.hpp"

namespace adacos {

std::string to_string(SequenceOrigin origin) {
    return origin == SequenceOrigin::group_lasso ? "group_lasso" : "forward_selection";
}

SequenceOrigin parse_origin(const std::string& text) {
    if (text == "group_lasso") return SequenceOrigin::group_lasso;
    if (text == "forward_selection") return SequenceOrigin::forward_selection;
    throw InputError("unknown sequence origin '" + text + "'");
}

CovariateSet CovariateSequence::difference(int i, int j) const {
    const auto& small = sets.at(static_cast<std::size_t>(i));
    const auto& big = sets.at(static_cast<std::size_t>(j));
    CovariateSet out;
    std::set_difference(big.begin(), big.end(), small.begin(), small.end(), std::back_inserter(out));
    return out;
}

void CovariateSequence::validate(int p) const {
    if (sets.empty()) throw InputError("covariate sequence is empty");
    for (std::size_t k = 0; k < sets.size(); ++k) {
        const auto& s = sets[k];
        if (!std::is_sorted(s.begin(), s.end()) || std::adjacent_find(s.begin(), s.end()) != s.end())
            throw InputError("sequence set is not a sorted set");
        for (int c : s)
            if (c < 0 || c >= p) throw InputError("sequence refers to covariate " + std::to_string(c) + " out of range");
        if (k > 0) {
            const auto& prev = sets[k - 1];
            if (s.size() <= prev.size() || !std::includes(s.begin(), s.end(), prev.begin(), prev.end()))
                throw InputError("sequence sets are not strictly nested");
        }
    }
    if (!per_set_models.empty() && per_set_models.size() != sets.size())
        throw InputError("sequence has a model count different from its set count");
}

CovariateSequence nested_sets_from_path(const LassoPath& path) {
    if (path.solutions.empty()) throw InputError("lasso path is empty");
    CovariateSequence seq;
    seq.origin = SequenceOrigin::group_lasso;
    const int p = static_cast<int>(path.solutions.front().groups.size());
    std::vector<bool> seen(static_cast<std::size_t>(p), false);
    for (const auto& sol : path.solutions) {
        std::vector<std::pair<double, int>> fresh;
        for (int c = 0; c < p; ++c)
            if (!seen[static_cast<std::size_t>(c)] && sol.active(c))
                fresh.emplace_back(sol.groups[static_cast<std::size_t>(c)].norm(), c);
        std::sort(fresh.begin(), fresh.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        for (const auto& [norm, c] : fresh) {
            seen[static_cast<std::size_t>(c)] = true;
            seq.order.push_back(c);
            seq.activation_lambdas.push_back(sol.lambda);
        }
    }
    if (seq.order.empty()) {
        seq.sets.push_back({});
        return seq;
    }
    CovariateSet current;
    for (int c : seq.order) {
        current.insert(std::upper_bound(current.begin(), current.end(), c), c);
        seq.sets.push_back(current);
    }
    return seq;
}

std::vector<double> cv_fold_misclassification(const TrainingView& view, std::span<const int> covariates,
                                              const CostModel& costs) {
    if (!costs.fn_cost) throw InputError("cross-validated cost needs a false-negative cost");
    std::vector<double> per_fold;
    for (int f = 0; f < view.folds.k; ++f) {
        const auto train = view.folds.train_indices(f);
        const auto test = view.folds.test_indices(f);
        if (test.empty()) continue;
        const GamModel m = fit_gam(view.design, view.features, view.labels, covariates, view.penalty, train);
        const Eigen::VectorXd eta = design_linear_predictor(m, view.design, test);
        double total = 0.0;
        for (std::size_t r = 0; r < test.size(); ++r) {
            const int truth = view.labels[static_cast<std::size_t>(test[r])];
            total += costs.misclassification(truth, bayes_classify(sigmoid(eta(static_cast<Eigen::Index>(r))), costs));
        }
        per_fold.push_back(total / static_cast<double>(test.size()));
    }
    if (per_fold.empty()) throw InputError("no non-empty folds");
    return per_fold;
}

double cv_expected_cost(const TrainingView& view, std::span<const int> covariates, const CostModel& costs) {
    const auto per_fold = cv_fold_misclassification(view, covariates, costs);
    double mean = 0.0;
    for (double v : per_fold) mean += v;
    mean /= static_cast<double>(per_fold.size());
    return mean + costs.acquisition_cost(covariates);
}

CovariateSequence forward_select(const TrainingView& view, const CostModel& costs) {
    if (!costs.fn_cost) throw InputError("forward selection requires fully specified misclassification costs");
    const int p = view.design.covariates();
    CovariateSequence seq;
    seq.origin = SequenceOrigin::forward_selection;
    CovariateSet current;
    seq.sets.push_back(current);
    std::vector<bool> used(static_cast<std::size_t>(p), false);
    for (int step = 0; step < p; ++step) {
        int best = -1;
        double best_cost = std::numeric_limits<double>::infinity();
        for (int j = 0; j < p; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            CovariateSet candidate = current;
            candidate.insert(std::upper_bound(candidate.begin(), candidate.end(), j), j);
            const double cost = cv_expected_cost(view, candidate, costs);
            if (cost < best_cost) {
                best_cost = cost;
                best = j;
            }
        }
        if (best < 0) throw NumericalError("forward selection found no finite candidate cost");
        used[static_cast<std::size_t>(best)] = true;
        current.insert(std::upper_bound(current.begin(), current.end(), best), best);
        seq.order.push_back(best);
        seq.sets.push_back(current);
    }
    return seq;
}

void refit_models(CovariateSequence& seq, const DesignMatrix& design, const SplineFeatures& features,
                  std::span<const int> labels, const GamPenalty& penalty) {
    seq.per_set_models.clear();
    for (const auto& s : seq.sets) seq.per_set_models.push_back(fit_gam(design, features, labels, s, penalty));
}

} // namespace adacos
