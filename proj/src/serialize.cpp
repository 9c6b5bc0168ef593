#include "adacos/serialize.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "adacos/error.hpp"

namespace adacos {

using nlohmann::json;

namespace {

json vec(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vec_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mat(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec(m.row(r).transpose()));
    return rows;
}

Eigen::MatrixXd mat_from(const json& j) {
    const auto n = static_cast<Eigen::Index>(j.size());
    if (n == 0) return {};
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd m(n, cols);
    for (Eigen::Index r = 0; r < n; ++r) {
        if (static_cast<Eigen::Index>(j.at(static_cast<std::size_t>(r)).size()) != cols) throw InputError("ragged matrix in bundle");
        m.row(r) = vec_from(j.at(static_cast<std::size_t>(r))).transpose();
    }
    return m;
}

json summary(const Summary& s) {
    return {{"mean", s.mean}, {"sd", s.sd}};
}

} // namespace

json to_json(const SplineBasis& b) {
    return {{"knots", b.knots}, {"degree", b.degree}, {"kept", b.kept}, {"mean", b.mean},
            {"scale", b.scale}, {"lower", b.lower}, {"upper", b.upper}};
}

SplineBasis spline_from_json(const json& j) {
    SplineBasis b;
    b.knots = j.at("knots").get<std::vector<double>>();
    b.degree = j.at("degree").get<int>();
    b.kept = j.at("kept").get<std::vector<int>>();
    b.mean = j.at("mean").get<std::vector<double>>();
    b.scale = j.at("scale").get<std::vector<double>>();
    b.lower = j.at("lower").get<double>();
    b.upper = j.at("upper").get<double>();
    if (b.mean.size() != b.kept.size() || b.scale.size() != b.kept.size()) throw InputError("inconsistent spline basis");
    for (int k : b.kept)
        if (k < 0 || k >= b.raw_size()) throw InputError("spline basis keeps an invalid column");
    return b;
}

json to_json(const GamModel& m) {
    json groups = json::array();
    for (int c : m.active_set)
        groups.push_back({{"covariate", c}, {"beta", vec(m.coefficients.at(c))}, {"basis", to_json(m.bases.at(c))}});
    return {{"intercept", m.intercept}, {"smooth_penalty", m.smooth_penalty}, {"ridge", m.ridge}, {"groups", groups}};
}

GamModel model_from_json(const json& j) {
    GamModel m;
    m.intercept = j.at("intercept").get<double>();
    m.smooth_penalty = j.value("smooth_penalty", 0.0);
    m.ridge = j.value("ridge", 0.0);
    for (const auto& g : j.at("groups")) {
        const int c = g.at("covariate").get<int>();
        m.active_set.push_back(c);
        m.coefficients[c] = vec_from(g.at("beta"));
        m.bases[c] = spline_from_json(g.at("basis"));
        if (m.coefficients[c].size() != m.bases[c].size()) throw InputError("coefficient/basis size mismatch");
    }
    std::sort(m.active_set.begin(), m.active_set.end());
    return m;
}

json to_json(const CovariateSequence& s) {
    json models = json::array();
    for (const auto& m : s.per_set_models) models.push_back(to_json(m));
    return {{"origin", to_string(s.origin)}, {"sets", s.sets}, {"order", s.order},
            {"activation_lambdas", s.activation_lambdas}, {"models", models}};
}

CovariateSequence sequence_from_json(const json& j) {
    CovariateSequence s;
    s.origin = parse_origin(j.at("origin").get<std::string>());
    s.sets = j.at("sets").get<std::vector<CovariateSet>>();
    s.order = j.value("order", std::vector<int>{});
    s.activation_lambdas = j.value("activation_lambdas", std::vector<double>{});
    for (const auto& m : j.at("models")) s.per_set_models.push_back(model_from_json(m));
    return s;
}

json to_json(const ConditionalGaussian& c) {
    json bases = json::array();
    for (const auto& [cov, b] : c.bases) bases.push_back({{"covariate", cov}, {"basis", to_json(b)}});
    return {{"design_set", c.design_set}, {"target_set", c.target_set}, {"bases", bases},
            {"weights", vec(c.weights)},   {"scale", mat(c.scale)},         {"nu_n", c.nu_n},
            {"s2_n", c.s2_n},              {"prior_g", c.prior_g},          {"prior_nu", c.prior_nu},
            {"prior_s2", c.prior_s2}};
}

ConditionalGaussian conditional_from_json(const json& j) {
    ConditionalGaussian c;
    c.design_set = j.at("design_set").get<CovariateSet>();
    c.target_set = j.at("target_set").get<CovariateSet>();
    for (const auto& b : j.at("bases")) c.bases.emplace(b.at("covariate").get<int>(), spline_from_json(b.at("basis")));
    c.weights = vec_from(j.at("weights"));
    c.scale = mat_from(j.at("scale"));
    c.nu_n = j.at("nu_n").get<double>();
    c.s2_n = j.at("s2_n").get<double>();
    c.prior_g = j.value("prior_g", 0.0);
    c.prior_nu = j.value("prior_nu", 0.0);
    c.prior_s2 = j.value("prior_s2", 0.0);
    if (c.scale.rows() != c.weights.size() || c.scale.cols() != c.weights.size())
        throw InputError("conditional model has inconsistent dimensions");
    return c;
}

json to_json(const CostModel& c) {
    json j = {{"covariate_costs", c.covariate_costs}, {"fp_cost", c.fp_cost}, {"correct_cost", c.correct_cost}};
    j["fn_cost"] = c.fn_cost ? json(*c.fn_cost) : json(nullptr);
    return j;
}

CostModel costs_from_json(const json& j) {
    CostModel c;
    c.covariate_costs = j.at("covariate_costs").get<std::vector<double>>();
    c.fp_cost = j.at("fp_cost").get<double>();
    if (j.contains("fn_cost") && !j.at("fn_cost").is_null()) c.fn_cost = j.at("fn_cost").get<double>();
    c.correct_cost = j.value("correct_cost", 0.0);
    return c;
}

json to_json(const Metrics& m) {
    return {{"avg_total_cost", m.avg_total_cost},
            {"avg_misclassification_cost", m.avg_misclassification_cost},
            {"avg_covariate_cost", m.avg_covariate_cost},
            {"avg_num_covariates", m.avg_num_covariates},
            {"avg_operation_costs", m.avg_operation_costs},
            {"weighted_accuracy", m.weighted_accuracy},
            {"fdr", m.fdr},
            {"recall", m.recall}};
}

namespace {

json recall_json(const RecallSolve& r) {
    json j = {{"target_recall", r.target_recall}, {"threshold", r.threshold}, {"implied_fn_cost", r.implied_fn_cost},
              {"cv_recall", r.cv_recall}};
    if (!r.warning.empty()) j["warning"] = r.warning;
    return j;
}

} // namespace

json to_json(const TrainedBundle& b) {
    json conditionals = json::array();
    for (const auto& [key, c] : b.adacos.conditionals) {
        json item = to_json(c);
        item["i"] = key.first;
        item["j"] = key.second;
        conditionals.push_back(std::move(item));
    }
    json bases = json::array();
    for (const auto& basis : b.features.bases) bases.push_back(to_json(basis));
    json j = {{"format_version", kBundleFormatVersion},
              {"mode", to_string(b.mode)},
              {"selection", to_string(b.selection)},
              {"xi", b.adacos.sigmoid.xi},
              {"imputation_means", b.imputation_means},
              {"features", bases},
              {"smooth_penalty", b.penalty.smooth},
              {"ridge", b.penalty.ridge},
              {"smooth_cv_deviance", b.smooth_cv_deviance},
              {"costs", to_json(b.costs)},
              {"sequence", to_json(b.adacos.sequence)},
              {"conditionals", conditionals},
              {"full_model", to_json(b.full_model)},
              {"cos_index", b.cos_index},
              {"cos_estimates", b.cos_estimates}};
    if (b.recall) j["recall"] = recall_json(*b.recall);
    if (!b.path_message.empty()) j["path_message"] = b.path_message;
    return j;
}

TrainedBundle bundle_from_json(const json& j) {
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kBundleFormatVersion)
            throw InputError("unsupported bundle format version " + std::to_string(version));
        TrainedBundle b;
        b.mode = parse_mode(j.at("mode").get<std::string>());
        b.selection = parse_selection(j.at("selection").get<std::string>());
        b.adacos.sigmoid = build_piecewise_sigmoid(j.at("xi").get<int>());
        b.imputation_means = j.at("imputation_means").get<std::vector<double>>();
        for (const auto& basis : j.at("features")) b.features.bases.push_back(spline_from_json(basis));
        b.penalty = {j.at("smooth_penalty").get<double>(), j.at("ridge").get<double>()};
        b.smooth_cv_deviance = j.value("smooth_cv_deviance", std::vector<double>{});
        b.costs = costs_from_json(j.at("costs"));
        b.adacos.sequence = sequence_from_json(j.at("sequence"));
        for (const auto& c : j.at("conditionals"))
            b.adacos.conditionals.emplace(std::pair{c.at("i").get<int>(), c.at("j").get<int>()}, conditional_from_json(c));
        b.full_model = model_from_json(j.at("full_model"));
        b.cos_index = j.at("cos_index").get<int>();
        b.cos_estimates = j.value("cos_estimates", std::vector<double>{});
        if (j.contains("recall")) {
            const auto& r = j.at("recall");
            RecallSolve solve;
            solve.target_recall = r.at("target_recall").get<double>();
            solve.threshold = r.at("threshold").get<double>();
            solve.implied_fn_cost = r.at("implied_fn_cost").get<double>();
            solve.cv_recall = r.at("cv_recall").get<double>();
            solve.warning = r.value("warning", std::string{});
            b.recall = solve;
        }
        b.path_message = j.value("path_message", std::string{});

        const int p = static_cast<int>(b.imputation_means.size());
        b.costs.validate(p);
        if (!b.costs.fn_cost) throw InputError("bundle has no false-negative cost");
        b.adacos.sequence.validate(p);
        if (b.adacos.sequence.per_set_models.size() != b.adacos.sequence.sets.size())
            throw InputError("bundle sequence lacks per-set models");
        if (b.cos_index < 0 || b.cos_index >= b.adacos.sequence.size()) throw InputError("bundle COS index out of range");
        const int q = b.adacos.sequence.size();
        if (static_cast<int>(b.adacos.conditionals.size()) != q * (q - 1) / 2)
            throw InputError("bundle is missing conditional models");
        return b;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed model bundle: ") + e.what());
    }
}

json to_json(const ExperimentConfig& c) {
    json j = {{"mode", to_string(c.mode)},   {"selection", to_string(c.selection)}, {"costs", to_json(c.costs)},
              {"xi", c.xi},                  {"splines", c.splines},                {"folds", c.folds},
              {"inner_folds", c.inner_folds}, {"seed", c.seed},                    {"smooth_grid", c.smooth_grid},
              {"ridge", c.ridge}};
    j["target_recall"] = c.target_recall ? json(*c.target_recall) : json(nullptr);
    return j;
}

json to_json(const ExperimentReport& r) {
    json folds = json::array();
    for (const auto& f : r.folds) {
        json item = {{"fold", f.fold},
                     {"test_size", f.test_size},
                     {"metrics", to_json(f.metrics)},
                     {"sequence", f.sequence},
                     {"cos_index", f.cos_index},
                     {"smooth_penalty", f.smooth_penalty},
                     {"fn_cost", f.fn_cost}};
        if (f.recall) item["recall"] = recall_json(*f.recall);
        if (!f.path_message.empty()) item["path_message"] = f.path_message;
        folds.push_back(std::move(item));
    }
    const auto& a = r.aggregate;
    json agg = {{"avg_total_cost", summary(a.avg_total_cost)},
                {"avg_misclassification_cost", summary(a.avg_misclassification_cost)},
                {"avg_covariate_cost", summary(a.avg_covariate_cost)},
                {"avg_num_covariates", summary(a.avg_num_covariates)},
                {"avg_operation_costs", summary(a.avg_operation_costs)},
                {"weighted_accuracy", summary(a.weighted_accuracy)},
                {"fdr", summary(a.fdr)},
                {"recall", summary(a.recall)}};
    return {{"dataset", r.dataset}, {"samples", r.samples}, {"config", to_json(r.config)}, {"folds", folds},
            {"aggregate", agg}};
}

json to_json(const AcquisitionTrace& t) {
    json evals = json::array();
    for (const auto& stage : t.evaluations) {
        json s = json::array();
        for (const auto& e : stage) s.push_back({{"target", e.target}, {"value", e.value}});
        evals.push_back(std::move(s));
    }
    json j = {{"sample", t.sample},   {"acquired", t.acquired},         {"stage", t.stage},
              {"label", t.label},     {"covariate_cost", t.covariate_cost}, {"evaluations", evals}};
    if (t.truth) {
        j["truth"] = *t.truth;
        j["misclassification_cost"] = t.misclassification_cost;
    }
    return j;
}

void save_bundle(const TrainedBundle& b, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write bundle to " + path.string());
    out << std::setw(1) << to_json(b) << "\n";
}

TrainedBundle load_bundle(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open bundle " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw InputError(std::string("bundle is not valid JSON: ") + e.what());
    }
    return bundle_from_json(j);
}

} // namespace adacos
