#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "minimax/core_model.hpp"
#include "minimax/simulation.hpp"

namespace minimax::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kBadInput = 2,
  kSingularDesign = 3,
  kExperimentFailed = 4,
};

// Malformed input with a location; line and column are 1-based, 0 when unknown.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& what, std::size_t line = 0, std::size_t column = 0);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct CsvData {
  std::vector<std::string> header;
  Matrix x;
  Vector y;
};

// Header "x1,...,xq,y" then one numeric row per observation.
CsvData read_csv(const fs::path& path);

// Rows grouped by exact regressor tuple, in order of first appearance.
struct DetectedGroups {
  Matrix levels;
  std::vector<std::vector<std::size_t>> members;
  bool equal_sizes() const;
};

DetectedGroups detect_groups(const Matrix& x);

// INI-style "key = value" file with [model], [design] and [run] sections.
ExperimentConfig read_experiment_config(const fs::path& path);

// Writes every staged file to a temporary sibling, then renames all of them.
class StagedOutput {
 public:
  void add(fs::path target, std::string contents);
  void commit();

 private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

struct FitOptions {
  fs::path input;
  std::string method = "lp";
  fs::path output;
  bool verbose = false;
};

struct SimulateOptions {
  fs::path config;
  fs::path output;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool full_ecdf = false;
  bool verbose = false;
};

struct LimitsOptions {
  std::string family = "uniform";
  std::optional<double> alpha;
  std::string law = "delta";
  int q = 1;
  std::string grid;  // lo:hi:points
  fs::path output;
};

int cmd_fit(const FitOptions& options, std::ostream& log);
int cmd_simulate(const SimulateOptions& options, std::ostream& log);
int cmd_limits(const LimitsOptions& options, std::ostream& log);

// Entry point used by the executable.
int run(int argc, char** argv);

}  // namespace minimax::cli
