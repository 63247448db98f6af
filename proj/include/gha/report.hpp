#pragma once

#include "gha/experiments.hpp"
#include "gha/mvpc.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace gha::report {

nlohmann::json to_json(const HyperParams& params);
nlohmann::json to_json(const SvmParams& params);
nlohmann::json to_json(const CvReport& report);
nlohmann::json to_json(const SweepResult& result);
nlohmann::json to_json(const std::vector<BenchRow>& rows, std::size_t repeats,
                       std::uint64_t seed);

/// One row per grid point: value,mean_accuracy,std_accuracy,mean_isc,seconds.
std::string sweep_csv(const SweepResult& result);

/// Removes every key containing "seconds", recursively. Used to compare
/// reports for reproducibility.
nlohmann::json strip_timing(const nlohmann::json& report);

}  // namespace gha::report
