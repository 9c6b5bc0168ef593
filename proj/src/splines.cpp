#include "adacos/splines.hpp"

#include <algorithm>
#include <cmath>

#include "adacos/error.hpp"

namespace adacos {

namespace {

constexpr double kMinScale = 1e-10;

double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

} // namespace

Eigen::VectorXd SplineBasis::raw(double x) const {
    const int n = raw_size();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    x = std::clamp(x, lower, upper);

    // knot span with knots[span] <= x < knots[span + 1]; x == upper uses the last span
    auto it = std::upper_bound(knots.begin() + degree, knots.begin() + n + 1, x);
    int span = static_cast<int>(it - knots.begin()) - 1;
    span = std::clamp(span, degree, n - 1);

    std::vector<double> basis(static_cast<std::size_t>(degree + 1), 0.0);
    std::vector<double> left(static_cast<std::size_t>(degree + 1), 0.0);
    std::vector<double> right(static_cast<std::size_t>(degree + 1), 0.0);
    basis[0] = 1.0;
    for (int j = 1; j <= degree; ++j) {
        left[static_cast<std::size_t>(j)] = x - knots[static_cast<std::size_t>(span + 1 - j)];
        right[static_cast<std::size_t>(j)] = knots[static_cast<std::size_t>(span + j)] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
            const double temp = basis[static_cast<std::size_t>(r)] / denom;
            basis[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * temp;
            saved = left[static_cast<std::size_t>(j - r)] * temp;
        }
        basis[static_cast<std::size_t>(j)] = saved;
    }
    for (int r = 0; r <= degree; ++r) out(span - degree + r) = basis[static_cast<std::size_t>(r)];
    return out;
}

void SplineBasis::transform_into(double x, std::span<double> out) const {
    const Eigen::VectorXd r = raw(x);
    for (std::size_t k = 0; k < kept.size(); ++k) out[k] = (r(kept[k]) - mean[k]) / scale[k];
}

Eigen::VectorXd SplineBasis::transform(double x) const {
    Eigen::VectorXd out(size());
    transform_into(x, {out.data(), static_cast<std::size_t>(out.size())});
    return out;
}

SplineBasis build_basis(std::span<const double> values, int s, int degree) {
    if (s < 1) throw InputError("spline count must be at least 1");
    if (degree < 0) throw InputError("spline degree must be nonnegative");
    if (values.empty()) throw InputError("cannot build a spline basis from an empty column");
    for (double v : values)
        if (!std::isfinite(v)) throw InputError("spline basis requires finite (imputed) values");

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    int distinct = 1;
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i] != sorted[i - 1]) ++distinct;
    if (distinct < 2) throw InputError("cannot build a spline basis for a constant column");

    // m distinct points need m basis functions to express any function on them
    const int count = std::min(s, distinct);
    const int deg = std::min(degree, count - 1);
    const int interior_count = count - deg - 1;

    SplineBasis basis;
    basis.degree = deg;
    basis.lower = sorted.front();
    basis.upper = sorted.back();

    std::vector<double> interior;
    for (int j = 1; j <= interior_count; ++j) {
        double q = quantile_sorted(sorted, static_cast<double>(j) / (interior_count + 1));
        if (q > basis.lower && q < basis.upper && (interior.empty() || q > interior.back())) interior.push_back(q);
    }
    basis.knots.assign(static_cast<std::size_t>(deg + 1), basis.lower);
    basis.knots.insert(basis.knots.end(), interior.begin(), interior.end());
    basis.knots.insert(basis.knots.end(), static_cast<std::size_t>(deg + 1), basis.upper);

    const int n_raw = basis.raw_size();
    const auto n = static_cast<double>(values.size());
    Eigen::MatrixXd raw_values(static_cast<Eigen::Index>(values.size()), n_raw);
    for (std::size_t i = 0; i < values.size(); ++i) raw_values.row(static_cast<Eigen::Index>(i)) = basis.raw(values[i]);
    const Eigen::VectorXd mean = raw_values.colwise().mean();
    for (int k = 0; k < n_raw; ++k) {
        const double sd = std::sqrt((raw_values.col(k).array() - mean(k)).square().sum() / n);
        if (sd > kMinScale) {
            basis.kept.push_back(k);
            basis.mean.push_back(mean(k));
            basis.scale.push_back(sd);
        }
    }
    if (basis.kept.empty()) throw InputError("spline basis has no non-constant basis function");
    return basis;
}

SplineFeatures SplineFeatures::build(const Dataset& d, int s, int degree) {
    SplineFeatures f;
    std::vector<double> column(static_cast<std::size_t>(d.rows()));
    for (int j = 0; j < d.cols(); ++j) {
        for (int i = 0; i < d.rows(); ++i) column[static_cast<std::size_t>(i)] = d.samples(i, j);
        try {
            f.bases.push_back(build_basis(column, s, degree));
        } catch (const InputError& e) {
            throw InputError("covariate '" + d.covariate_names[static_cast<std::size_t>(j)] + "': " + e.what());
        }
    }
    return f;
}

DesignMatrix DesignMatrix::build(const SplineFeatures& features, const SampleMatrix& samples) {
    if (samples.cols() != features.covariates()) throw InputError("design: covariate count mismatch");
    DesignMatrix m;
    int total = 0;
    for (const auto& b : features.bases) {
        m.offsets.push_back(total);
        m.widths.push_back(b.size());
        total += b.size();
    }
    m.values.resize(samples.rows(), total);
    std::vector<double> buf;
    for (int j = 0; j < features.covariates(); ++j) {
        const auto& basis = features.bases[static_cast<std::size_t>(j)];
        buf.resize(static_cast<std::size_t>(basis.size()));
        for (Eigen::Index i = 0; i < samples.rows(); ++i) {
            basis.transform_into(samples(i, j), buf);
            for (int k = 0; k < basis.size(); ++k) m.values(i, m.offsets[static_cast<std::size_t>(j)] + k) = buf[static_cast<std::size_t>(k)];
        }
    }
    return m;
}

int DesignMatrix::width(std::span<const int> covariates) const {
    int w = 0;
    for (int c : covariates) w += widths.at(static_cast<std::size_t>(c));
    return w;
}

Eigen::MatrixXd DesignMatrix::columns(std::span<const int> covariates) const {
    Eigen::MatrixXd out(values.rows(), width(covariates));
    int col = 0;
    for (int c : covariates) {
        const int w = widths[static_cast<std::size_t>(c)];
        out.middleCols(col, w) = values.middleCols(offsets[static_cast<std::size_t>(c)], w);
        col += w;
    }
    return out;
}

Eigen::MatrixXd DesignMatrix::columns(std::span<const int> covariates, std::span<const int> rows) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), width(covariates));
    int col = 0;
    for (int c : covariates) {
        const int w = widths[static_cast<std::size_t>(c)];
        const int off = offsets[static_cast<std::size_t>(c)];
        for (std::size_t r = 0; r < rows.size(); ++r)
            out.row(static_cast<Eigen::Index>(r)).segment(col, w) = values.row(rows[r]).segment(off, w);
        col += w;
    }
    return out;
}

} // namespace adacos
