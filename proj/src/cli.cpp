#include "minimax/cli.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "minimax/closed_form.hpp"
#include "minimax/evt.hpp"
#include "minimax/lp_solver.hpp"
#include "minimax/report.hpp"

namespace minimax::cli {

InputError::InputError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error(what), line_(line), column_(column) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

template <class Int>
std::optional<Int> parse_integer(std::string_view s) {
  s = trim(s);
  Int value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string describe(const InputError& e, const fs::path& path) {
  std::ostringstream out;
  out << path.string();
  if (e.line() > 0) out << ":" << e.line();
  if (e.column() > 0) out << ":" << e.column();
  out << ": " << e.what();
  return out.str();
}

// Output directories must exist before any work starts.
bool output_dir_ok(const fs::path& output, std::ostream& log) {
  const fs::path dir = output.parent_path();
  if (output.empty() || (!dir.empty() && !fs::is_directory(dir))) {
    log << "error: output directory does not exist: " << dir.string() << "\n";
    return false;
  }
  return true;
}

}  // namespace

CsvData read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file");
  CsvData data;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (data.header.empty()) {
      if (cells.size() < 2) throw InputError("header needs at least one regressor and y", line_no, 1);
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const std::string expected =
            c + 1 == cells.size() ? std::string("y") : "x" + std::to_string(c + 1);
        if (cells[c] != expected) {
          throw InputError("expected header '" + expected + "', found '" + std::string(cells[c]) + "'",
                           line_no, c + 1);
        }
        data.header.emplace_back(cells[c]);
      }
      continue;
    }
    if (cells.size() != data.header.size()) {
      throw InputError("expected " + std::to_string(data.header.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       line_no, std::min(cells.size(), data.header.size()) + 1);
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto value = parse_double(cells[c]);
      if (!value) {
        throw InputError("not a finite number: '" + std::string(cells[c]) + "'", line_no, c + 1);
      }
      row[c] = *value;
    }
    rows.push_back(std::move(row));
  }
  if (data.header.empty()) throw InputError("missing header", 1, 1);
  if (rows.empty()) throw InputError("no data rows", line_no + 1, 1);

  const auto q = static_cast<Eigen::Index>(data.header.size() - 1);
  data.x.resize(static_cast<Eigen::Index>(rows.size()), q);
  data.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Eigen::Index c = 0; c < q; ++c) {
      data.x(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    }
    data.y[static_cast<Eigen::Index>(r)] = rows[r].back();
  }
  return data;
}

bool DetectedGroups::equal_sizes() const {
  return std::all_of(members.begin(), members.end(),
                     [&](const auto& g) { return g.size() == members.front().size(); });
}

DetectedGroups detect_groups(const Matrix& x) {
  std::map<std::vector<double>, std::size_t> index;
  DetectedGroups out;
  std::vector<std::vector<double>> levels;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    std::vector<double> key(x.row(r).data(), x.row(r).data() + 0);
    key.resize(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index c = 0; c < x.cols(); ++c) key[static_cast<std::size_t>(c)] = x(r, c);
    const auto [it, inserted] = index.try_emplace(key, levels.size());
    if (inserted) {
      levels.push_back(key);
      out.members.emplace_back();
    }
    out.members[it->second].push_back(static_cast<std::size_t>(r));
  }
  out.levels.resize(static_cast<Eigen::Index>(levels.size()), x.cols());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      out.levels(static_cast<Eigen::Index>(l), c) = levels[l][static_cast<std::size_t>(c)];
    }
  }
  return out;
}

namespace {

enum class Section { model, design, run };

const std::map<std::string, Section>& known_keys() {
  static const std::map<std::string, Section> keys{
      {"family", Section::model},         {"alpha", Section::model},
      {"V", Section::design},             {"theta", Section::design},
      {"n", Section::design},             {"n_ladder", Section::design},
      {"M", Section::run},                {"seed", Section::run},
      {"methods", Section::run},          {"reference_draws", Section::run},
      {"threads", Section::run},
  };
  return keys;
}

std::optional<Section> section_from_name(const std::string& name) {
  if (name == "model") return Section::model;
  if (name == "design") return Section::design;
  if (name == "run") return Section::run;
  return std::nullopt;
}

std::vector<double> parse_number_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::string normalised = value;
  for (auto& ch : normalised) {
    if (ch == ';' || ch == '[' || ch == ']') ch = ',';
  }
  for (const auto cell : split(normalised, ',')) {
    if (cell.empty()) continue;
    const auto v = parse_double(cell);
    if (!v) throw InputError("config key '" + key + "': not a number: '" + std::string(cell) + "'");
    out.push_back(*v);
  }
  if (out.empty()) throw InputError("config key '" + key + "' is empty");
  return out;
}

template <class Int>
Int parse_config_integer(const std::string& key, const std::string& value) {
  const auto v = parse_integer<Int>(value);
  if (!v) throw InputError("config key '" + key + "': not a non-negative integer: '" + value + "'");
  return *v;
}

}  // namespace

ExperimentConfig read_experiment_config(const fs::path& path) {
  if (!fs::exists(path)) throw InputError("cannot open file");
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InputError(e.message(), e.line());
  }

  std::map<std::string, std::string> values;
  auto accept = [&](const std::string& key, const std::string& value,
                    std::optional<Section> section) {
    const auto it = known_keys().find(key);
    if (it == known_keys().end()) throw InputError("invalid config key '" + key + "'");
    if (section && *section != it->second) {
      throw InputError("invalid config key '" + key + "' in this section");
    }
    if (!values.emplace(key, value).second) {
      throw InputError("duplicate config key '" + key + "'");
    }
  };
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      accept(name, node.data(), std::nullopt);
      continue;
    }
    const auto section = section_from_name(name);
    if (!section) throw InputError("invalid config section '" + name + "'");
    for (const auto& [key, child] : node) accept(key, child.data(), section);
  }

  for (const char* required : {"family", "V", "M", "seed", "theta", "methods"}) {
    if (!values.count(required)) throw InputError("missing required config key '" + std::string(required) + "'");
  }
  if (values.count("n") == values.count("n_ladder")) {
    throw InputError("config needs exactly one of 'n' or 'n_ladder'");
  }

  ExperimentConfig config;
  std::optional<double> alpha;
  if (values.count("alpha")) alpha = parse_number_list("alpha", values["alpha"]).front();
  try {
    config.model = ErrorModel::from_name(trim(values["family"]), alpha);
  } catch (const Error& e) {
    throw InputError("config key 'family': " + std::string(e.what()));
  }

  const auto theta = parse_number_list("theta", values["theta"]);
  const auto v = parse_number_list("V", values["V"]);
  if (v.size() % theta.size() != 0) {
    throw InputError("config key 'V': " + std::to_string(v.size()) +
                     " entries do not form rows of length q = " + std::to_string(theta.size()));
  }
  const auto q = static_cast<Eigen::Index>(theta.size());
  const auto k = static_cast<Eigen::Index>(v.size()) / q;
  config.levels.resize(k, q);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < q; ++c) config.levels(r, c) = v[static_cast<std::size_t>(r * q + c)];
  }
  config.theta = Eigen::Map<const Vector>(theta.data(), q);

  const std::string ladder_key = values.count("n") ? "n" : "n_ladder";
  for (const auto cell : split(values[ladder_key], ',')) {
    config.n_ladder.push_back(parse_config_integer<std::size_t>(ladder_key, std::string(cell)));
  }
  config.replications = parse_config_integer<std::size_t>("M", values["M"]);
  config.seed = parse_config_integer<std::uint64_t>("seed", values["seed"]);
  config.methods.clear();
  for (const auto cell : split(values["methods"], ',')) {
    try {
      config.methods.push_back(method_from_string(cell));
    } catch (const Error&) {
      throw InputError("config key 'methods': unknown method '" + std::string(cell) + "'");
    }
  }
  if (values.count("reference_draws")) {
    config.reference_draws =
        parse_config_integer<std::size_t>("reference_draws", values["reference_draws"]);
  }
  if (values.count("threads")) {
    config.threads = parse_config_integer<unsigned>("threads", values["threads"]);
  }
  return config;
}

void StagedOutput::add(fs::path target, std::string contents) {
  files_.emplace_back(std::move(target), std::move(contents));
}

void StagedOutput::commit() {
  std::vector<fs::path> temporaries;
  try {
    for (const auto& [target, contents] : files_) {
      fs::path tmp = target;
      tmp += ".tmp";
      temporaries.push_back(tmp);
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << contents;
      out.close();
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    for (std::size_t i = 0; i < files_.size(); ++i) fs::rename(temporaries[i], files_[i].first);
  } catch (...) {
    std::error_code ignored;
    for (const auto& tmp : temporaries) fs::remove(tmp, ignored);
    throw;
  }
  files_.clear();
}

int cmd_fit(const FitOptions& options, std::ostream& log) {
  if (!output_dir_ok(options.output, log)) return kIoError;
  CsvData csv;
  try {
    csv = read_csv(options.input);
  } catch (const InputError& e) {
    log << "error: " << describe(e, options.input) << "\n";
    return kBadInput;
  }

  std::string method = options.method;
  if (method == "closed_form") method = "closed";
  if (method != "lp" && method != "closed" && method != "lse") {
    log << "error: unknown method '" << options.method << "' (expected lp, closed or lse)\n";
    return kBadInput;
  }

  try {
    const Dataset data(Design(csv.x), csv.y);
    FitReportInput report;
    report.source = options.input.filename().string();
    if (method == "lp") {
      report.fit = minimax_fit_lp(data);
    } else if (method == "lse") {
      report.fit = lse_fit(data);
    } else {
      const auto groups = detect_groups(csv.x);
      const auto k = static_cast<std::size_t>(groups.levels.rows());
      if (k != data.parameters() || !groups.equal_sizes()) {
        log << "error: closed form needs k = q levels with equal replication; found k = " << k
            << ", q = " << data.parameters() << "\n";
        return kSingularDesign;
      }
      const std::size_t n = groups.members.front().size();
      Vector y(static_cast<Eigen::Index>(k * n));
      Eigen::Index pos = 0;
      for (const auto& members : groups.members) {
        for (const auto j : members) y[pos++] = csv.y[static_cast<Eigen::Index>(j)];
      }
      report.fit = closed_form_fit(Dataset(ReplicatedDesign(groups.levels, n), std::move(y)));
      report.groups = k;
    }
    report.residuals = residuals(data, report.fit.theta_hat);

    StagedOutput out;
    out.add(options.output, fit_report_to_json(report).dump(2) + "\n");
    out.commit();
    if (options.verbose) log << "wrote " << options.output.string() << "\n";
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::singular_design:
      case ErrorCode::rank_deficient:
      case ErrorCode::wrong_shape: return kSingularDesign;
      default: return kBadInput;
    }
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kOk;
}

int cmd_simulate(const SimulateOptions& options, std::ostream& log) {
  if (!output_dir_ok(options.output, log)) return kIoError;
  ExperimentConfig config;
  try {
    config = read_experiment_config(options.config);
  } catch (const InputError& e) {
    log << "error: " << describe(e, options.config) << "\n";
    return kBadInput;
  }
  if (options.seed) config.seed = *options.seed;
  if (options.threads) config.threads = *options.threads;

  try {
    const auto report = run_experiment(config);
    if (report.failure_breach()) {
      log << "error: " << report.total_failures()
          << " failed replications exceed the allowed failure rate\n";
      return kExperimentFailed;
    }
    StagedOutput out;
    out.add(options.output, report_to_json(report).dump(2) + "\n");
    const fs::path dir = options.output.parent_path();
    const std::string stem = options.output.stem().string();
    for (const auto& table : report_ecdf_tables(report, options.full_ecdf ? 0 : 4096)) {
      out.add(dir / (stem + "." + table.name + ".tsv"), render_table(table.rows, "ecdf"));
    }
    if (options.verbose) {
      for (const auto& point : report.points) {
        log << "n = " << point.n << ": " << config.replications << " replications\n";
      }
    }
    out.commit();
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::singular_design ? kSingularDesign : kBadInput;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kOk;
}

int cmd_limits(const LimitsOptions& options, std::ostream& log) {
  if (!output_dir_ok(options.output, log)) return kIoError;
  const auto parts = split(options.grid, ':');
  std::optional<double> lo, hi;
  std::optional<std::size_t> points;
  if (parts.size() == 3) {
    lo = parse_double(parts[0]);
    hi = parse_double(parts[1]);
    points = parse_integer<std::size_t>(parts[2]);
  }
  if (!lo || !hi || !points || *points < 2 || *hi < *lo) {
    log << "error: grid must be lo:hi:points with lo <= hi and at least 2 points\n";
    return kBadInput;
  }
  if (options.q < 1) {
    log << "error: q must be at least 1\n";
    return kBadInput;
  }

  LimitLaw law;
  try {
    const auto model = ErrorModel::from_name(options.family, options.alpha);
    const auto type = model.attraction();
    if (options.law == "delta") {
      if (model.family() != Family::uniform_symmetric) {
        log << "error: law 'delta' is only defined for the uniform family\n";
        return kBadInput;
      }
      law = LimitLaw::uniform_delta(options.q);
    } else if (options.law == "max") {
      law = LimitLaw::max(type);
    } else if (options.law == "sum") {
      law = LimitLaw::sum(type);
    } else if (options.law == "qpower") {
      law = LimitLaw::q_power(type, options.q);
    } else if (options.law == "midrange") {
      law = LimitLaw::midrange_diff(type);
    } else if (options.law == "logistic") {
      law = LimitLaw::logistic();
    } else {
      log << "error: unknown law '" << options.law << "'\n";
      return kBadInput;
    }
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kBadInput;
  }

  std::vector<std::pair<double, double>> rows;
  for (std::size_t i = 0; i < *points; ++i) {
    const double x = *lo + (*hi - *lo) * static_cast<double>(i) / static_cast<double>(*points - 1);
    rows.emplace_back(x, limit_cdf(law, x));
  }
  try {
    StagedOutput out;
    out.add(options.output, render_table(rows, "cdf"));
    out.commit();
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Minimax (Chebyshev) regression fits and extreme-residual simulations"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a CSV dataset by minimax, closed form or LSE");
  fit_cmd->add_option("--input", fit.input, "CSV with header x1,...,xq,y")->required();
  fit_cmd->add_option("--method", fit.method, "lp | closed | lse");
  fit_cmd->add_option("--output", fit.output, "Report path (JSON)")->required();

  SimulateOptions sim;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo experiment");
  sim_cmd->add_option("--config", sim.config, "Experiment config file")->required();
  sim_cmd->add_option("--output", sim.output, "Report path (JSON)")->required();
  auto* seed_opt = sim_cmd->add_option("--seed", seed, "Override the master seed");
  auto* threads_opt = sim_cmd->add_option("--threads", threads, "Worker threads (0: all cores)");
  sim_cmd->add_flag("--full-ecdf", sim.full_ecdf, "Export every ECDF point");

  LimitsOptions limits;
  double alpha = 0.0;
  auto* limits_cmd = app.add_subcommand("limits", "Tabulate a limit law CDF");
  limits_cmd->add_option("--family", limits.family, "uniform | laplace | bounded_power | pareto | gaussian");
  auto* alpha_opt = limits_cmd->add_option("--alpha", alpha, "Tail exponent for parametric families");
  limits_cmd->add_option("--law", limits.law, "delta | max | sum | qpower | midrange | logistic");
  limits_cmd->add_option("--q", limits.q, "Number of parameters q");
  limits_cmd->add_option("--grid", limits.grid, "lo:hi:points")->required();
  limits_cmd->add_option("--output", limits.output, "Table path (TSV)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kBadInput;
  }

  fit.verbose = sim.verbose = verbose;
  if (fit_cmd->parsed()) return cmd_fit(fit, std::cerr);
  if (sim_cmd->parsed()) {
    if (seed_opt->count() > 0) sim.seed = seed;
    if (threads_opt->count() > 0) sim.threads = threads;
    return cmd_simulate(sim, std::cerr);
  }
  if (alpha_opt->count() > 0) limits.alpha = alpha;
  return cmd_limits(limits, std::cerr);
}

}  // namespace minimax::cli
