#include "adacos/condreg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adacos/error.hpp"

namespace adacos {

namespace {

constexpr double kMinPriorVariance = 1e-8;

CovariateSet sorted_set(std::span<const int> s) {
    CovariateSet out(s.begin(), s.end());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

Eigen::VectorXd ConditionalGaussian::features(std::span<const double> x) const {
    Eigen::Index width = 1;
    for (const auto& [c, b] : bases) width += b.size();
    Eigen::VectorXd phi(width);
    phi(0) = 1.0;
    Eigen::Index col = 1;
    for (int c : design_set) {
        const double v = x[static_cast<std::size_t>(c)];
        if (std::isnan(v)) throw InputError("missing observed covariate " + std::to_string(c));
        const auto& b = bases.at(c);
        b.transform_into(v, {phi.data() + col, static_cast<std::size_t>(b.size())});
        col += b.size();
    }
    return phi;
}

double ConditionalGaussian::posterior_noise_mean() const {
    return nu_n / (nu_n - 2.0) * s2_n;
}

ConditionalGaussian fit_conditional(const SampleMatrix& samples, std::span<const int> design_set,
                                    std::span<const int> target_set, const GamModel& target_model,
                                    const ConditionalPrior& prior) {
    const Eigen::Index n = samples.rows();
    if (n == 0) throw InputError("conditional regression needs training rows");
    if (prior.g <= 0.0 || prior.nu0 <= 0.0) throw InputError("conditional prior parameters must be positive");

    ConditionalGaussian c;
    c.design_set = sorted_set(design_set);
    c.target_set = sorted_set(target_set);
    for (int a : c.design_set)
        if (std::binary_search(c.target_set.begin(), c.target_set.end(), a))
            throw InputError("observed and target covariate sets overlap");
    for (int s : c.target_set)
        if (!target_model.uses(s)) throw InputError("target model does not cover covariate " + std::to_string(s));

    std::vector<double> column(static_cast<std::size_t>(n));
    for (int a : c.design_set) {
        auto it = target_model.bases.find(a);
        if (it != target_model.bases.end()) {
            c.bases.emplace(a, it->second);
        } else {
            for (Eigen::Index i = 0; i < n; ++i) column[static_cast<std::size_t>(i)] = samples(i, a);
            c.bases.emplace(a, build_basis(column));
        }
    }

    Eigen::VectorXd z(n);
    Eigen::Index width = 1;
    for (const auto& [a, b] : c.bases) width += b.size();
    Eigen::MatrixXd x(n, width);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::span<const double> row(samples.data() + i * samples.cols(), static_cast<std::size_t>(samples.cols()));
        z(i) = target_model.partial_predictor(row, c.target_set);
        x.row(i) = c.features(row).transpose();
    }

    const double zbar = z.mean();
    const double var = n > 1 ? (z.array() - zbar).square().sum() / static_cast<double>(n - 1) : 0.0;
    c.prior_g = prior.g;
    c.prior_nu = prior.nu0;
    c.prior_s2 = std::max(var, kMinPriorVariance);

    Eigen::MatrixXd precision = x.transpose() * x;
    precision.diagonal().tail(width - 1).array() += 1.0 / prior.g;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(precision);
    if (ldlt.info() != Eigen::Success) throw NumericalError("conditional regression: singular posterior precision");
    c.weights = ldlt.solve(x.transpose() * z);
    c.scale = ldlt.solve(Eigen::MatrixXd::Identity(width, width));

    // flat intercept prior costs one degree of freedom
    c.nu_n = prior.nu0 + static_cast<double>(n) - 1.0;
    const Eigen::VectorXd resid = z - x * c.weights;
    const double slope_penalty = c.weights.tail(width - 1).squaredNorm() / prior.g;
    c.s2_n = (prior.nu0 * c.prior_s2 + resid.squaredNorm() + slope_penalty) / c.nu_n;
    if (!std::isfinite(c.s2_n) || !c.weights.allFinite()) throw NumericalError("conditional regression is not finite");
    return c;
}

ConditionalGaussian fit_conditional(const Dataset& d, std::span<const int> design_set,
                                    std::span<const int> target_set, const GamModel& target_model,
                                    const ConditionalPrior& prior) {
    if (d.has_missing()) throw InputError("conditional regression requires an imputed dataset");
    return fit_conditional(d.samples, design_set, target_set, target_model, prior);
}

ConditionalPrediction predict_conditional(const ConditionalGaussian& c, std::span<const double> x) {
    if (!(c.nu_n > 2.0)) throw NumericalError("predictive variance is infinite (nu_n <= 2)");
    const Eigen::VectorXd phi = c.features(x);
    const double spread = 1.0 + phi.dot(c.scale * phi);
    ConditionalPrediction out;
    out.mean = phi.dot(c.weights);
    out.variance = c.nu_n / (c.nu_n - 2.0) * c.s2_n * spread;
    if (!(out.variance > 0.0)) out.variance = std::numeric_limits<double>::min();
    return out;
}

} // namespace adacos
