#include "adacos/riskcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adacos/error.hpp"
#include "adacos/normal.hpp"

namespace adacos {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRange = 10.0;

} // namespace

double PiecewiseSigmoid::lower(int t) const {
    return t == 0 ? -kInf : breakpoints[static_cast<std::size_t>(t - 1)];
}

double PiecewiseSigmoid::upper(int t) const {
    return t == segments() - 1 ? kInf : breakpoints[static_cast<std::size_t>(t)];
}

double PiecewiseSigmoid::operator()(double u) const {
    // segment index = number of breakpoints <= u
    const auto t = std::upper_bound(breakpoints.begin(), breakpoints.end(), u) - breakpoints.begin();
    return slopes[static_cast<std::size_t>(t)] * u + intercepts[static_cast<std::size_t>(t)];
}

PiecewiseSigmoid build_piecewise_sigmoid(int xi) {
    if (xi < 2) throw InputError("piecewise sigmoid needs at least 2 segments");
    PiecewiseSigmoid pw;
    pw.xi = xi;
    for (int t = 1; t <= xi + 1; ++t) pw.breakpoints.push_back(-kRange + (2.0 * kRange / xi) * (t - 1));
    pw.breakpoints.back() = kRange;
    pw.slopes.push_back(0.0);
    pw.intercepts.push_back(sigmoid(pw.breakpoints.front()));
    for (int t = 0; t < xi; ++t) {
        const double lo = pw.breakpoints[static_cast<std::size_t>(t)];
        const double hi = pw.breakpoints[static_cast<std::size_t>(t + 1)];
        const double m = (sigmoid(hi) - sigmoid(lo)) / (hi - lo);
        pw.slopes.push_back(m);
        pw.intercepts.push_back(sigmoid(lo) - m * lo);
    }
    pw.slopes.push_back(0.0);
    pw.intercepts.push_back(sigmoid(pw.breakpoints.back()));
    return pw;
}

double segment_gaussian_expectation(const PiecewiseSigmoid& pw, double mu, double sigma2, double a, double b) {
    if (a > b) throw InputError("segment expectation: lower bound exceeds upper bound");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InputError("segment expectation: variance must be positive");
    if (!std::isfinite(mu)) throw InputError("segment expectation: mean must be finite");
    const double sigma = std::sqrt(sigma2);
    double total = 0.0;
    for (int t = 0; t < pw.segments(); ++t) {
        const double l = std::max(a, pw.lower(t));
        const double o = std::min(b, pw.upper(t));
        if (!(l < o)) continue;
        const double alpha = (l - mu) / sigma;
        const double beta = (o - mu) / sigma;
        const double mass = normal_interval(alpha, beta);
        const double m = pw.slopes[static_cast<std::size_t>(t)];
        const double v = pw.intercepts[static_cast<std::size_t>(t)];
        // int (m u + v) phi = (m mu + v) mass + m sigma (pdf(alpha) - pdf(beta))
        double piece = (m * mu + v) * mass;
        if (m != 0.0) piece += m * sigma * (normal_pdf(alpha) - normal_pdf(beta));
        total += piece;
    }
    return std::clamp(total, 0.0, 1.0);
}

RiskQuery make_risk_query(double offset, double mu_z, double sigma2, double fp_cost, double fn_cost) {
    RiskQuery q;
    q.offset = offset;
    q.mu_z = mu_z;
    q.sigma2 = sigma2;
    q.fp_cost = fp_cost;
    q.fn_cost = fn_cost;
    double boundary = 0.0;
    if (fp_cost == 0.0 && fn_cost == 0.0) boundary = 0.0;
    else if (fn_cost == 0.0) boundary = kInf;
    else if (fp_cost == 0.0) boundary = -kInf;
    else boundary = std::log(fp_cost / fn_cost);
    q.z_star = boundary - offset;
    return q;
}

double conditional_bayes_risk(const RiskQuery& q, const PiecewiseSigmoid& pw) {
    if (q.fp_cost < 0.0 || q.fn_cost < 0.0) throw InputError("Bayes risk needs nonnegative error costs");
    if (!(q.sigma2 > 0.0)) throw InputError("Bayes risk needs a positive variance");
    if (q.fp_cost == 0.0 && q.fn_cost == 0.0) return 0.0;
    // work in u = z + offset ~ N(mu, sigma2); class 1 is chosen for u >= u_star
    const double mu = q.mu_z + q.offset;
    const double u_star = q.z_star + q.offset;
    double risk = 0.0;
    if (q.fn_cost > 0.0 && u_star > -kInf) risk += q.fn_cost * segment_gaussian_expectation(pw, mu, q.sigma2, -kInf, u_star);
    if (q.fp_cost > 0.0 && u_star < kInf) {
        const double upper_mass = normal_sf((u_star - mu) / std::sqrt(q.sigma2));
        const double upper_g = segment_gaussian_expectation(pw, mu, q.sigma2, u_star, kInf);
        risk += q.fp_cost * std::max(0.0, upper_mass - upper_g);
    }
    return risk;
}

double immediate_cost(double p1, const CostModel& costs) {
    const double fn = costs.shifted_fn();
    const double fp = costs.shifted_fp();
    return costs.correct_cost + std::min(p1 * fn, (1.0 - p1) * fp);
}

double future_cost_now(const CovariateSequence& seq, std::span<const double> x, int i, const CostModel& costs) {
    const auto& model = seq.per_set_models.at(static_cast<std::size_t>(i));
    return immediate_cost(model.predict_prob(x), costs);
}

double future_cost(const CovariateSequence& seq, const ConditionalGaussian& cond, std::span<const double> x, int i,
                   int j, const CostModel& costs, const PiecewiseSigmoid& pw) {
    if (j <= i) throw InputError("future cost needs a later stage");
    const auto& target = seq.per_set_models.at(static_cast<std::size_t>(j));
    const auto& observed = seq.sets.at(static_cast<std::size_t>(i));
    const double offset = target.intercept + target.partial_predictor(x, observed);
    const auto pred = predict_conditional(cond, x);
    const auto q = make_risk_query(offset, pred.mean, pred.variance, costs.shifted_fp(), costs.shifted_fn());
    return costs.correct_cost + conditional_bayes_risk(q, pw) + costs.acquisition_cost(seq.difference(i, j));
}

} // namespace adacos
