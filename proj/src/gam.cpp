#include "adacos/gam.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "adacos/error.hpp"

namespace adacos {

namespace {

constexpr int kMaxNewtonIterations = 500;
constexpr double kRelativeObjectiveTol = 1e-8;

CovariateSet normalized(std::span<const int> covariates, int p) {
    CovariateSet s(covariates.begin(), covariates.end());
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw InputError("covariate set has duplicates");
    for (int c : s)
        if (c < 0 || c >= p) throw InputError("covariate index " + std::to_string(c) + " out of range");
    return s;
}

double logistic_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& theta,
                          const Eigen::MatrixXd& penalty, Eigen::VectorXd* eta_out = nullptr) {
    Eigen::VectorXd eta = (x * theta.tail(theta.size() - 1)).array() + theta(0);
    double nll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) nll += softplus(eta(i)) - y(i) * eta(i);
    if (eta_out) *eta_out = std::move(eta);
    return nll + theta.dot(penalty * theta);
}

} // namespace

double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

double softplus(double u) {
    return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u)));
}

Eigen::MatrixXd second_difference(int s) {
    if (s < 3) return Eigen::MatrixXd(0, std::max(s, 0));
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(s - 2, s);
    for (int r = 0; r < s - 2; ++r) {
        d(r, r) = 1.0;
        d(r, r + 1) = -2.0;
        d(r, r + 2) = 1.0;
    }
    return d;
}

bool GamModel::uses(int covariate) const {
    return coefficients.count(covariate) > 0;
}

double GamModel::partial_predictor(std::span<const double> x, std::span<const int> covariates) const {
    double total = 0.0;
    for (int c : covariates) {
        auto coef = coefficients.find(c);
        if (coef == coefficients.end())
            throw InputError("covariate " + std::to_string(c) + " is not part of the model");
        const double v = x[static_cast<std::size_t>(c)];
        if (std::isnan(v)) throw InputError("missing required covariate " + std::to_string(c));
        total += coef->second.dot(bases.at(c).transform(v));
    }
    return total;
}

double GamModel::linear_predictor(std::span<const double> x) const {
    return intercept + partial_predictor(x, active_set);
}

double GamModel::predict_prob(std::span<const double> x) const {
    // keep the output strictly inside (0,1)
    constexpr double kEdge = 1e-300;
    return std::clamp(sigmoid(linear_predictor(x)), kEdge, 1.0 - 1e-16);
}

Eigen::VectorXd design_linear_predictor(const GamModel& model, const DesignMatrix& design, std::span<const int> rows) {
    const Eigen::MatrixXd x = design.columns(model.active_set, rows);
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(x.rows(), model.intercept);
    int col = 0;
    for (int c : model.active_set) {
        const auto& beta = model.coefficients.at(c);
        eta += x.middleCols(col, beta.size()) * beta;
        col += static_cast<int>(beta.size());
    }
    return eta;
}

GamModel fit_gam(const DesignMatrix& design, const SplineFeatures& features, std::span<const int> labels,
                 std::span<const int> covariates, const GamPenalty& penalty, std::span<const int> rows,
                 FitDiagnostics* diagnostics) {
    if (penalty.smooth < 0.0 || penalty.ridge < 0.0) throw InputError("penalties must be nonnegative");
    const CovariateSet active = normalized(covariates, design.covariates());

    const Eigen::MatrixXd x = rows.empty() ? design.columns(active) : design.columns(active, rows);
    const Eigen::Index n = x.rows();
    if (n == 0) throw InputError("cannot fit a model on zero rows");
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int row = rows.empty() ? static_cast<int>(i) : rows[static_cast<std::size_t>(i)];
        y(i) = labels[static_cast<std::size_t>(row)];
    }
    const Eigen::Index d = x.cols();

    // penalty quadratic form over (intercept, beta)
    Eigen::MatrixXd pen = Eigen::MatrixXd::Zero(d + 1, d + 1);
    pen(0, 0) = penalty.ridge;
    int col = 1;
    for (int c : active) {
        const int w = design.widths[static_cast<std::size_t>(c)];
        const Eigen::MatrixXd d2 = second_difference(w);
        pen.block(col, col, w, w) = penalty.smooth * (d2.transpose() * d2);
        pen.block(col, col, w, w).diagonal().array() += penalty.ridge;
        col += w;
    }

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
    const double base_rate = std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
    theta(0) = std::log(base_rate / (1.0 - base_rate));

    Eigen::VectorXd eta;
    double objective = logistic_objective(x, y, theta, pen, &eta);
    bool converged = false;
    int iter = 0;
    double grad_norm = 0.0;
    Eigen::MatrixXd xt(n, d + 1);
    xt.col(0).setOnes();
    xt.rightCols(d) = x;
    for (; iter < kMaxNewtonIterations && !converged; ++iter) {
        Eigen::VectorXd p(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            p(i) = sigmoid(eta(i));
            w(i) = std::max(p(i) * (1.0 - p(i)), 1e-12);
        }
        const Eigen::VectorXd grad = xt.transpose() * (p - y) + 2.0 * pen * theta;
        grad_norm = grad.norm();
        const Eigen::MatrixXd weighted = xt.array().colwise() * w.array().sqrt();
        Eigen::MatrixXd hess = 2.0 * pen;
        hess.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
        hess = hess.selfadjointView<Eigen::Lower>();
        const Eigen::VectorXd step = hess.ldlt().solve(-grad);
        if (!step.allFinite()) throw NumericalError("Newton step is not finite");

        double t = 1.0;
        Eigen::VectorXd candidate_eta;
        double candidate = logistic_objective(x, y, theta + step, pen, &candidate_eta);
        while (!(candidate <= objective) && t > 1e-10) {
            t *= 0.5;
            candidate = logistic_objective(x, y, theta + t * step, pen, &candidate_eta);
        }
        if (!(candidate <= objective)) {
            converged = true;   // no further decrease representable
            break;
        }
        theta += t * step;
        eta = std::move(candidate_eta);
        const double change = objective - candidate;
        objective = candidate;
        if (change <= kRelativeObjectiveTol * std::max(1.0, std::abs(objective))) converged = true;
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "logistic GAM fit did not converge in " << kMaxNewtonIterations << " iterations (gradient norm "
            << grad_norm << ")";
        throw NumericalError(msg.str());
    }
    if (diagnostics) *diagnostics = {iter, objective, grad_norm};

    GamModel model;
    model.intercept = theta(0);
    model.active_set = active;
    model.smooth_penalty = penalty.smooth;
    model.ridge = penalty.ridge;
    col = 1;
    for (int c : active) {
        const int w = design.widths[static_cast<std::size_t>(c)];
        model.coefficients[c] = theta.segment(col, w);
        model.bases[c] = features.bases[static_cast<std::size_t>(c)];
        col += w;
    }
    return model;
}

GamModel fit_gam(const Dataset& d, std::span<const int> covariates, double smooth_penalty, double ridge,
                 int splines) {
    if (d.has_missing()) throw InputError("fit_gam requires an imputed dataset");
    const auto features = SplineFeatures::build(d, splines);
    const auto design = DesignMatrix::build(features, d.samples);
    return fit_gam(design, features, d.labels, covariates, {smooth_penalty, ridge});
}

double mean_deviance(std::span<const double> probs, std::span<const int> labels) {
    if (probs.size() != labels.size() || probs.empty()) throw InputError("deviance: size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = std::clamp(probs[i], 1e-15, 1.0 - 1e-15);
        total += labels[i] == 1 ? -std::log(p) : -std::log1p(-p);
    }
    return 2.0 * total / static_cast<double>(probs.size());
}

} // namespace adacos
