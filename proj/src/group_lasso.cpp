#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "adacos/error.hpp"
#include "adacos/gam.hpp"

// Cost-scaled group lasso for the logistic additive model.
//
// Each lambda is solved by proximal Newton: the negative log-likelihood is
// replaced by its second-order expansion and the resulting penalized
// quadratic is minimized by block coordinate descent, where each block
// update is the exact proximal step for that group (zero whenever the group
// soft-threshold condition ||g_i|| <= lambda c_i holds). A backtracking line
// search on the true objective keeps the iterates monotone.

namespace adacos {

namespace {

constexpr int kMaxSweeps = 2000;
constexpr double kArmijo = 1e-4;

struct BlockEigen {
    Eigen::MatrixXd vectors;
    Eigen::VectorXd values;
};

// argmin_b 0.5 b^T H b + g^T b + kappa ||b||, for H = V diag(values) V^T (PSD).
Eigen::VectorXd solve_block(const BlockEigen& h, const Eigen::VectorXd& g, double kappa) {
    const double gnorm = g.norm();
    if (gnorm <= kappa) return Eigen::VectorXd::Zero(g.size());

    const Eigen::VectorXd gh = h.vectors.transpose() * g;
    const Eigen::VectorXd d = h.values.cwiseMax(0.0);
    // The minimizer has norm eta solving sum_k gh_k^2 / (d_k eta + kappa)^2 = 1.
    // residual(eta) = F(eta)^(-1/2) - 1 is increasing with residual(0) < 0.
    auto eval = [&](double eta, double& slope) {
        double f = 0.0, df = 0.0;
        for (Eigen::Index k = 0; k < gh.size(); ++k) {
            const double den = d(k) * eta + kappa;
            const double t = gh(k) * gh(k) / (den * den);
            f += t;
            df += -2.0 * t * d(k) / den;
        }
        slope = -0.5 * std::pow(f, -1.5) * df;
        return 1.0 / std::sqrt(f) - 1.0;
    };

    double slope = 0.0;
    double lo = 0.0;
    double hi = 1.0;
    int guard = 0;
    while (eval(hi, slope) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 2000) throw NumericalError("group update is unbounded (degenerate block)");
    }
    double eta = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double r = eval(eta, slope);
        if (r == 0.0) break;
        if (r < 0.0) lo = eta; else hi = eta;
        double next = eta - r / slope;
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
        if (std::abs(next - eta) <= 1e-16 * std::max(1.0, eta)) {
            eta = next;
            break;
        }
        eta = next;
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
    }

    Eigen::VectorXd coords(gh.size());
    for (Eigen::Index k = 0; k < gh.size(); ++k) coords(k) = -gh(k) * eta / (d(k) * eta + kappa);
    return h.vectors * coords;
}

class GroupLassoProblem {
public:
    GroupLassoProblem(const DesignMatrix& design, std::span<const int> labels, std::span<const double> weights)
        : design_(design), weights_(weights.begin(), weights.end()) {
        const Eigen::Index n = design.rows();
        xt_.resize(n, design.values.cols() + 1);
        xt_.col(0).setOnes();
        xt_.rightCols(design.values.cols()) = design.values;
        y_.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) y_(i) = labels[static_cast<std::size_t>(i)];
    }

    int groups() const { return design_.covariates(); }
    Eigen::Index dim() const { return xt_.cols(); }
    Eigen::Index offset(int g) const { return 1 + design_.offsets[static_cast<std::size_t>(g)]; }
    Eigen::Index width(int g) const { return design_.widths[static_cast<std::size_t>(g)]; }

    double penalty(const Eigen::VectorXd& theta, double lambda) const {
        double total = 0.0;
        for (int g = 0; g < groups(); ++g) total += weights_[static_cast<std::size_t>(g)] * theta.segment(offset(g), width(g)).norm();
        return lambda * total;
    }

    double nll(const Eigen::VectorXd& theta) const {
        const Eigen::VectorXd eta = xt_ * theta;
        double total = 0.0;
        for (Eigen::Index i = 0; i < eta.size(); ++i) total += softplus(eta(i)) - y_(i) * eta(i);
        return total;
    }

    double objective(const Eigen::VectorXd& theta, double lambda) const { return nll(theta) + penalty(theta, lambda); }

    Eigen::VectorXd gradient(const Eigen::VectorXd& theta, Eigen::VectorXd* w_out = nullptr) const {
        const Eigen::VectorXd eta = xt_ * theta;
        Eigen::VectorXd resid(eta.size());
        if (w_out) w_out->resize(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            const double p = sigmoid(eta(i));
            resid(i) = p - y_(i);
            if (w_out) (*w_out)(i) = std::max(p * (1.0 - p), 1e-12);
        }
        return xt_.transpose() * resid;
    }

    double kkt(const Eigen::VectorXd& grad, const Eigen::VectorXd& theta, double lambda) const {
        double worst = std::abs(grad(0));
        for (int g = 0; g < groups(); ++g) {
            const auto beta = theta.segment(offset(g), width(g));
            const auto gg = grad.segment(offset(g), width(g));
            const double kappa = lambda * weights_[static_cast<std::size_t>(g)];
            const double bnorm = beta.norm();
            const double v = bnorm == 0.0 ? std::max(0.0, gg.norm() - kappa) : (gg + kappa * beta / bnorm).norm();
            worst = std::max(worst, v);
        }
        return worst;
    }

    // Returns false when the iteration limit is hit before the KKT target.
    bool solve(double lambda, Eigen::VectorXd& theta, const PathOptions& options, PathSolution& out) const {
        double f = objective(theta, lambda);
        out.objective_trace.assign(1, f);
        bool ok = false;
        int it = 0;
        for (; it < options.max_iterations; ++it) {
            Eigen::VectorXd w;
            const Eigen::VectorXd grad = gradient(theta, &w);
            out.kkt_residual = kkt(grad, theta, lambda);
            if (out.kkt_residual <= options.tolerance) {
                ok = true;
                break;
            }
            const Eigen::MatrixXd weighted = xt_.array().colwise() * w.array().sqrt();
            Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim(), dim());
            hess.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
            hess = hess.selfadjointView<Eigen::Lower>();

            std::vector<BlockEigen> blocks(static_cast<std::size_t>(groups()));
            for (int g = 0; g < groups(); ++g) {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess.block(offset(g), offset(g), width(g), width(g)));
                blocks[static_cast<std::size_t>(g)] = {es.eigenvectors(), es.eigenvalues()};
            }

            // block coordinate descent on the quadratic model around theta
            Eigen::VectorXd next = theta;
            Eigen::VectorXd r = grad;   // model gradient at `next`
            for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
                double max_delta = 0.0;
                const double d0 = -r(0) / hess(0, 0);
                next(0) += d0;
                r += hess.col(0) * d0;
                max_delta = std::abs(d0);
                for (int g = 0; g < groups(); ++g) {
                    const Eigen::Index off = offset(g), wd = width(g);
                    const Eigen::VectorXd cur = next.segment(off, wd);
                    const Eigen::VectorXd lin = r.segment(off, wd) - hess.block(off, off, wd, wd) * cur;
                    const Eigen::VectorXd upd =
                        solve_block(blocks[static_cast<std::size_t>(g)], lin, lambda * weights_[static_cast<std::size_t>(g)]);
                    const Eigen::VectorXd delta = upd - cur;
                    const double dn = delta.lpNorm<Eigen::Infinity>();
                    if (dn > 0.0) {
                        next.segment(off, wd) = upd;
                        r += hess.middleCols(off, wd) * delta;
                        max_delta = std::max(max_delta, dn);
                    }
                }
                if (max_delta <= 1e-13 * (1.0 + next.lpNorm<Eigen::Infinity>())) break;
            }

            const Eigen::VectorXd dir = next - theta;
            const double decrease = grad.dot(dir) + penalty(next, lambda) - penalty(theta, lambda);
            double t = 1.0;
            double candidate = objective(theta + dir, lambda);
            const double roundoff = 1e-13 * std::max(1.0, std::abs(f));
            if (-decrease <= roundoff && candidate <= f + roundoff) {
                // predicted gain is below what the objective can resolve; trust the model step
                theta += dir;
                f = candidate;
                out.objective_trace.push_back(f);
                continue;
            }
            while (candidate > f + kArmijo * t * decrease && t > 1e-12) {
                t *= 0.5;
                candidate = objective(theta + t * dir, lambda);
            }
            if (candidate > f) {
                // no representable decrease left; accept only a roundoff-level move
                if (candidate - f > 1e-13 * std::max(1.0, std::abs(f))) break;
                candidate = f;
            }
            theta += t * dir;
            f = std::min(candidate, f);
            out.objective_trace.push_back(f);
        }
        if (!ok) {
            const Eigen::VectorXd grad = gradient(theta);
            out.kkt_residual = kkt(grad, theta, lambda);
            ok = out.kkt_residual <= options.tolerance;
        }
        out.iterations = it;
        out.lambda = lambda;
        out.objective = objective(theta, lambda);
        out.intercept = theta(0);
        out.groups.clear();
        for (int g = 0; g < groups(); ++g) out.groups.emplace_back(theta.segment(offset(g), width(g)));
        return ok;
    }

    const Eigen::VectorXd& labels() const { return y_; }

private:
    const DesignMatrix& design_;
    std::vector<double> weights_;
    Eigen::MatrixXd xt_;
    Eigen::VectorXd y_;
};

std::vector<double> penalty_weights(const CostModel& costs, int p) {
    if (costs.size() != p) throw InputError("cost model does not match the design");
    std::vector<double> w;
    for (double c : costs.covariate_costs) w.push_back(std::max(c, kPenaltyCostFloor));
    return w;
}

} // namespace

double design_nll(const DesignMatrix& design, std::span<const int> labels, const Eigen::VectorXd& theta) {
    if (theta.size() != design.values.cols() + 1) throw InputError("parameter vector does not match the design");
    const std::vector<double> ones(static_cast<std::size_t>(design.covariates()), 1.0);
    return GroupLassoProblem(design, labels, ones).nll(theta);
}

Eigen::VectorXd design_nll_gradient(const DesignMatrix& design, std::span<const int> labels, const Eigen::VectorXd& theta) {
    if (theta.size() != design.values.cols() + 1) throw InputError("parameter vector does not match the design");
    const std::vector<double> ones(static_cast<std::size_t>(design.covariates()), 1.0);
    return GroupLassoProblem(design, labels, ones).gradient(theta);
}

bool PathSolution::active(int covariate) const {
    const auto& g = groups.at(static_cast<std::size_t>(covariate));
    return g.size() > 0 && g.lpNorm<Eigen::Infinity>() > 0.0;
}

double lambda_max(const DesignMatrix& design, std::span<const int> labels, std::span<const double> weights) {
    const Eigen::Index n = design.rows();
    double n1 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) n1 += labels[static_cast<std::size_t>(i)];
    const double p0 = n1 / static_cast<double>(n);
    Eigen::VectorXd resid(n);
    for (Eigen::Index i = 0; i < n; ++i) resid(i) = p0 - labels[static_cast<std::size_t>(i)];
    const Eigen::VectorXd grad = design.values.transpose() * resid;
    double best = 0.0;
    for (int g = 0; g < design.covariates(); ++g) {
        const double norm = grad.segment(design.offsets[static_cast<std::size_t>(g)], design.widths[static_cast<std::size_t>(g)]).norm();
        best = std::max(best, norm / weights[static_cast<std::size_t>(g)]);
    }
    return best;
}

LassoPath fit_group_lasso_path(const DesignMatrix& design, std::span<const int> labels, const CostModel& costs,
                               const PathOptions& options) {
    if (options.grid_size < 1) throw InputError("grid size must be positive");
    const auto weights = penalty_weights(costs, design.covariates());
    const double top = lambda_max(design, labels, weights);
    if (!(top > 0.0)) throw InputError("lambda_max is zero: labels carry no signal for any covariate");
    std::vector<double> grid;
    for (int k = 0; k < options.grid_size; ++k) {
        const double frac = options.grid_size == 1 ? 0.0 : static_cast<double>(k) / (options.grid_size - 1);
        grid.push_back(top * std::pow(options.min_ratio, frac));
    }
    return fit_group_lasso_path(design, labels, costs, grid, options);
}

LassoPath fit_group_lasso_path(const DesignMatrix& design, std::span<const int> labels, const CostModel& costs,
                               std::span<const double> lambdas, const PathOptions& options) {
    if (lambdas.empty()) throw InputError("lambda grid is empty");
    for (std::size_t k = 1; k < lambdas.size(); ++k)
        if (!(lambdas[k] < lambdas[k - 1])) throw InputError("lambda grid must be strictly decreasing");
    const int n = design.rows();
    int n1 = 0;
    for (int i = 0; i < n; ++i) n1 += labels[static_cast<std::size_t>(i)];
    if (n1 == 0 || n1 == n) throw InputError("group lasso path needs both classes present");

    LassoPath path;
    path.penalty_weights = penalty_weights(costs, design.covariates());
    GroupLassoProblem problem(design, labels, path.penalty_weights);

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(problem.dim());
    theta(0) = std::log(static_cast<double>(n1) / (n - n1));
    for (double lambda : lambdas) {
        PathSolution sol;
        if (!problem.solve(lambda, theta, options, sol)) {
            std::ostringstream msg;
            msg << "group lasso did not converge at lambda " << lambda << " (KKT residual " << sol.kkt_residual
                << "); path truncated";
            path.truncated = true;
            path.message = msg.str();
            break;
        }
        path.lambdas.push_back(lambda);
        path.objective_values.push_back(sol.objective);
        path.solutions.push_back(std::move(sol));
    }
    if (path.solutions.empty()) throw NumericalError(path.message);
    return path;
}

double group_kkt_residual(const DesignMatrix& design, std::span<const int> labels, std::span<const double> weights,
                          const PathSolution& solution) {
    GroupLassoProblem problem(design, labels, weights);
    Eigen::VectorXd theta(problem.dim());
    theta(0) = solution.intercept;
    for (int g = 0; g < problem.groups(); ++g)
        theta.segment(problem.offset(g), problem.width(g)) = solution.groups.at(static_cast<std::size_t>(g));
    return problem.kkt(problem.gradient(theta), theta, solution.lambda);
}

} // namespace adacos
