#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pursuitlab/harness.hpp"

namespace pursuitlab {

enum class ResultFormat { csv, json };
ResultFormat result_format_from_string(std::string_view name);

inline constexpr std::string_view kArtifactVersion = "1.0.0";

/// Header: algorithm,mu,params,s,trials,successes,rate,mean_iterations,mean_wall_ms
void write_results_csv(std::ostream& out, const std::vector<RateCurve>& curves);

/// Plan metadata, curves and reports as one JSON document.
std::string results_to_json(const ExperimentPlan& plan, const std::vector<RateCurve>& curves,
                            const std::vector<CriticalSparsityReport>& reports);

/// Writes CSV or JSON to `path`; I/O failures throw std::runtime_error naming the path.
void export_results(const ExperimentPlan& plan, const std::vector<RateCurve>& curves,
                    const std::vector<CriticalSparsityReport>& reports,
                    const std::filesystem::path& path, ResultFormat format);

std::string plan_to_json(const ExperimentPlan& plan);
ExperimentPlan plan_from_json(std::string_view text);
ExperimentPlan load_plan(const std::filesystem::path& path);

}  // namespace pursuitlab
