#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace adacos {

using CovariateSet = std::vector<int>;
using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Labeled tabular data. Missing cells are NaN until imputed.
struct Dataset {
    SampleMatrix samples;                 // n x p, row-major
    std::vector<int> labels;              // n values in {0,1}
    std::vector<std::string> covariate_names;

    int rows() const { return static_cast<int>(samples.rows()); }
    int cols() const { return static_cast<int>(samples.cols()); }
    int positives() const;
    bool has_missing() const;
    std::span<const double> row(int i) const {
        return {samples.data() + static_cast<std::ptrdiff_t>(i) * samples.cols(),
                static_cast<std::size_t>(samples.cols())};
    }
};

// Per-covariate acquisition costs plus the misclassification cost matrix.
// Both correct outcomes share the same cost (c_00 = c_11 = correct_cost).
struct CostModel {
    std::vector<double> covariate_costs;
    double fp_cost = 0.0;                 // c_{0,1}
    std::optional<double> fn_cost;        // c_{1,0}; unset in target-recall mode
    double correct_cost = 0.0;

    int size() const { return static_cast<int>(covariate_costs.size()); }
    double acquisition_cost(std::span<const int> covariates) const;
    double total_acquisition_cost() const;
    // c_{truth, predicted}; requires fn_cost.
    double misclassification(int truth, int predicted) const;
    // Costs with the correct-classification cost subtracted so that both
    // correct outcomes cost zero. Throws if a shifted cost is negative.
    double shifted_fp() const;
    double shifted_fn() const;
    void validate(int p) const;
};

struct FoldAssignment {
    std::vector<int> fold_of_sample;
    int k = 0;
    std::uint64_t seed = 0;

    std::vector<int> test_indices(int fold) const;
    std::vector<int> train_indices(int fold) const;
    std::vector<int> sizes() const;
};

Dataset parse_csv(std::istream& in, std::string_view label_column);
Dataset load_dataset(const std::filesystem::path& path, std::string_view label_column);

// Column means over observed (non-NaN) cells; throws on a fully missing column.
std::vector<double> observed_column_means(const Dataset& d);
Dataset impute_with(const Dataset& d, std::span<const double> column_means);
Dataset impute_missing(const Dataset& d);

Dataset select_rows(const Dataset& d, std::span<const int> rows);

FoldAssignment make_folds(int n, int k, std::uint64_t seed);

// Cost file: JSON object mapping covariate name -> cost, plus "fp_cost",
// optional "fn_cost" and optional "correct_cost".
CostModel parse_costs(std::string_view json_text, const std::vector<std::string>& names);
CostModel load_costs(const std::filesystem::path& path, const std::vector<std::string>& names);

} // namespace adacos
