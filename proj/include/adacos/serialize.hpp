#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "adacos/experiment.hpp"

namespace adacos {

inline constexpr int kBundleFormatVersion = 1;

nlohmann::json to_json(const SplineBasis& b);
nlohmann::json to_json(const GamModel& m);
nlohmann::json to_json(const CovariateSequence& s);
nlohmann::json to_json(const ConditionalGaussian& c);
nlohmann::json to_json(const CostModel& c);
nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const TrainedBundle& b);
nlohmann::json to_json(const ExperimentConfig& c);
nlohmann::json to_json(const ExperimentReport& r);
nlohmann::json to_json(const AcquisitionTrace& t);

SplineBasis spline_from_json(const nlohmann::json& j);
GamModel model_from_json(const nlohmann::json& j);
CovariateSequence sequence_from_json(const nlohmann::json& j);
ConditionalGaussian conditional_from_json(const nlohmann::json& j);
CostModel costs_from_json(const nlohmann::json& j);
TrainedBundle bundle_from_json(const nlohmann::json& j);

void save_bundle(const TrainedBundle& b, const std::filesystem::path& path);
TrainedBundle load_bundle(const std::filesystem::path& path);

} // namespace adacos
