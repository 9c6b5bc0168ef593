#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "adacos/dataset.hpp"
#include "adacos/policy.hpp"

namespace adacos {

// Small discrete problem with an explicit joint pmf over (x_1, ..., x_p, y).
// pmf is row-major with x_1 slowest and y (two values) fastest.
struct DiscreteInstance {
    std::vector<int> alphabets;
    std::vector<double> pmf;
    CostModel costs;

    int p() const { return static_cast<int>(alphabets.size()); }
    std::size_t outcomes() const;   // product of alphabet sizes
    double mass(std::span<const int> x, int y) const;
    void validate() const;
};

// Observed values use -1 for covariates not yet acquired.
using DiscretePolicy = std::function<Decision(const CovariateSet& observed, std::span<const int> values)>;

struct OraclePolicy {
    std::vector<int> alphabets;
    // Indexed by state = mask * outcomes + index of x with unobserved entries set to 0.
    std::vector<double> value;       // expected remaining loss weighted by the state's joint mass
    std::vector<Decision> decision;
    double expected_loss = 0.0;

    Decision decide(const CovariateSet& observed, std::span<const int> values) const;
    DiscretePolicy as_policy() const;
};

inline constexpr std::size_t kMaxOracleStates = 1u << 22;

OraclePolicy solve_exact(const DiscreteInstance& inst);
double policy_expected_loss(const DiscreteInstance& inst, const DiscretePolicy& policy);

// Acquire `subset` up front, then classify with the Bayes rule on it.
DiscretePolicy fixed_subset_policy(const DiscreteInstance& inst, const CovariateSet& subset);

DiscreteInstance parse_instance(std::string_view json_text);
DiscreteInstance load_instance(const std::filesystem::path& path);

} // namespace adacos
