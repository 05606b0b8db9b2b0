#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "minimax/core_model.hpp"
#include "minimax/simulation.hpp"

namespace minimax {

using Json = nlohmann::ordered_json;

// Shortest round-trip decimal representation (std::to_chars).
std::string format_number(double value);

struct EcdfTable {
  std::string name;  // e.g. "closed_form.n2000.theta1"
  std::vector<std::pair<double, double>> rows;
};

// Two-column ECDF of a sample: (x_(i), i/M). Above max_points the sorted sample
// is thinned to max_points evenly spaced order statistics, always keeping the
// extremes. max_points == 0 keeps every point.
EcdfTable ecdf_table(std::string name, std::vector<double> values, std::size_t max_points);

std::string render_table(const std::vector<std::pair<double, double>>& rows,
                         const std::string& value_header);

Json report_to_json(const SimulationReport& report);

// One table per tracked statistic, method and ladder point.
std::vector<EcdfTable> report_ecdf_tables(const SimulationReport& report, std::size_t max_points);

struct FitReportInput {
  std::string source;
  FitResult fit;
  Vector residuals;
  std::optional<std::size_t> groups;
};

Json fit_report_to_json(const FitReportInput& input);

}  // namespace minimax
