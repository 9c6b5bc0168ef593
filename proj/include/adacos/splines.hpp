#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "adacos/dataset.hpp"

namespace adacos {

// Standardized B-spline transform f_i : R -> R^s for one covariate.
//
// Interior knots sit at equally spaced quantiles of the training column,
// boundary knots at its min and max (each repeated degree + 1 times).
// Raw basis functions that are constant over the training column are
// dropped; the rest are shifted and scaled to mean 0 / sd 1 over it.
struct SplineBasis {
    std::vector<double> knots;     // full knot vector
    int degree = 3;
    std::vector<int> kept;         // raw basis indices that survive standardization
    std::vector<double> mean;      // per kept basis function
    std::vector<double> scale;     // per kept basis function, > 0
    double lower = 0.0;
    double upper = 0.0;

    int size() const { return static_cast<int>(kept.size()); }
    int raw_size() const { return static_cast<int>(knots.size()) - degree - 1; }

    // Unstandardized values of every raw basis function at x (clamped).
    Eigen::VectorXd raw(double x) const;
    Eigen::VectorXd transform(double x) const;
    void transform_into(double x, std::span<double> out) const;
};

inline constexpr int kDefaultSplineCount = 10;
inline constexpr int kDefaultSplineDegree = 3;

SplineBasis build_basis(std::span<const double> values, int s = kDefaultSplineCount,
                        int degree = kDefaultSplineDegree);

// One basis per covariate of a dataset.
struct SplineFeatures {
    std::vector<SplineBasis> bases;

    static SplineFeatures build(const Dataset& d, int s = kDefaultSplineCount, int degree = kDefaultSplineDegree);
    int covariates() const { return static_cast<int>(bases.size()); }
};

// Transformed covariates for all samples: column block i holds f_i(x_i).
struct DesignMatrix {
    Eigen::MatrixXd values;
    std::vector<int> offsets;
    std::vector<int> widths;

    static DesignMatrix build(const SplineFeatures& features, const SampleMatrix& samples);
    int rows() const { return static_cast<int>(values.rows()); }
    int covariates() const { return static_cast<int>(offsets.size()); }
    int width(std::span<const int> covariates) const;
    // Columns for the given covariates, concatenated in order.
    Eigen::MatrixXd columns(std::span<const int> covariates) const;
    Eigen::MatrixXd columns(std::span<const int> covariates, std::span<const int> rows) const;
};

} // namespace adacos
