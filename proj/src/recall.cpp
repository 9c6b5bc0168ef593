#include "adacos/recall.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "adacos/error.hpp"

namespace adacos {

namespace {

constexpr double kThresholdClamp = 1e-6;

void check_target(double r) {
    if (!(r > 0.0 && r <= 1.0)) throw InputError("target recall must lie in (0, 1]");
}

} // namespace

double solve_threshold(std::span<const double> positive_scores, double r) {
    check_target(r);
    if (positive_scores.empty()) throw InputError("threshold solve needs at least one positive sample");
    std::vector<double> sorted(positive_scores.begin(), positive_scores.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const auto n1 = static_cast<double>(sorted.size());
    // smallest m with m / n1 >= r, guarding against r * n1 landing just above an integer
    auto m = static_cast<std::size_t>(std::ceil(r * n1));
    while (m > 1 && static_cast<double>(m - 1) / n1 >= r) --m;
    while (static_cast<double>(m) / n1 < r && m < sorted.size()) ++m;
    m = std::clamp<std::size_t>(m, 1, sorted.size());
    return sorted[m - 1];
}

double empirical_recall(std::span<const double> scores, double t) {
    if (scores.empty()) throw InputError("recall of an empty score set");
    const auto hits = std::count_if(scores.begin(), scores.end(), [t](double s) { return s >= t; });
    return static_cast<double>(hits) / static_cast<double>(scores.size());
}

double implicit_fn_cost(double t_star, double fp_cost, std::string* warning) {
    double t = t_star;
    if (!(t >= kThresholdClamp && t <= 1.0 - kThresholdClamp)) {
        t = std::clamp(std::isnan(t) ? 0.5 : t, kThresholdClamp, 1.0 - kThresholdClamp);
        if (warning) *warning = "threshold " + std::to_string(t_star) + " clamped to " + std::to_string(t);
    }
    return (1.0 - t) / t * fp_cost;
}

std::vector<double> joint_minimum(const std::vector<std::vector<double>>& per_set_scores) {
    if (per_set_scores.empty()) throw InputError("no score sets given");
    const std::size_t n = per_set_scores.front().size();
    std::vector<double> minima(n, 1.0);
    for (const auto& scores : per_set_scores) {
        if (scores.size() != n) throw InputError("score sets cover different samples");
        for (std::size_t k = 0; k < n; ++k) minima[k] = std::min(minima[k], scores[k]);
    }
    return minima;
}

double solve_threshold_adaptive(const std::vector<std::vector<double>>& per_set_scores, double r) {
    return solve_threshold(joint_minimum(per_set_scores), r);
}

std::vector<std::vector<double>> cv_positive_scores(const TrainingView& view, const std::vector<CovariateSet>& sets) {
    const int n = view.design.rows();
    std::vector<int> positives;
    for (int i = 0; i < n; ++i)
        if (view.labels[static_cast<std::size_t>(i)] == 1) positives.push_back(i);
    if (positives.empty()) throw InputError("no positive training samples for the recall solve");
    std::vector<int> slot(static_cast<std::size_t>(n), -1);
    for (std::size_t k = 0; k < positives.size(); ++k) slot[static_cast<std::size_t>(positives[k])] = static_cast<int>(k);

    std::vector<std::vector<double>> out;
    for (const auto& s : sets) {
        std::vector<double> scores(positives.size(), std::numeric_limits<double>::quiet_NaN());
        for (int f = 0; f < view.folds.k; ++f) {
            std::vector<int> held;
            for (int i : view.folds.test_indices(f))
                if (slot[static_cast<std::size_t>(i)] >= 0) held.push_back(i);
            if (held.empty()) continue;
            const GamModel m = fit_gam(view.design, view.features, view.labels, s, view.penalty, view.folds.train_indices(f));
            const Eigen::VectorXd eta = design_linear_predictor(m, view.design, held);
            for (std::size_t r = 0; r < held.size(); ++r) {
                scores[static_cast<std::size_t>(slot[static_cast<std::size_t>(held[r])])] = sigmoid(eta(static_cast<Eigen::Index>(r)));
            }
        }
        out.push_back(std::move(scores));
    }
    return out;
}

RecallSolve solve_recall(const TrainingView& view, const std::vector<CovariateSet>& sets, double r,
                         const CostModel& costs, CostModel& resolved) {
    check_target(r);
    RecallSolve solve;
    solve.target_recall = r;
    solve.positive_scores = cv_positive_scores(view, sets);
    const auto minima = joint_minimum(solve.positive_scores);
    solve.threshold = solve_threshold(minima, r);
    solve.cv_recall = empirical_recall(minima, solve.threshold);
    const double shifted = implicit_fn_cost(solve.threshold, costs.shifted_fp(), &solve.warning);
    solve.implied_fn_cost = shifted + costs.correct_cost;
    resolved = costs;
    resolved.fn_cost = solve.implied_fn_cost;
    return solve;
}

} // namespace adacos
