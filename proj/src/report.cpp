#include "minimax/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace minimax {

std::string format_number(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

EcdfTable ecdf_table(std::string name, std::vector<double> values, std::size_t max_points) {
  EcdfTable table{std::move(name), {}};
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  if (m == 0) return table;
  const double md = static_cast<double>(m);
  if (max_points == 0 || m <= max_points) {
    table.rows.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      table.rows.emplace_back(values[i], static_cast<double>(i + 1) / md);
    }
    return table;
  }
  table.rows.reserve(max_points);
  for (std::size_t p = 0; p < max_points; ++p) {
    const auto i = static_cast<std::size_t>(std::llround(
        static_cast<double>(p) * static_cast<double>(m - 1) / static_cast<double>(max_points - 1)));
    table.rows.emplace_back(values[i], static_cast<double>(i + 1) / md);
  }
  return table;
}

std::string render_table(const std::vector<std::pair<double, double>>& rows,
                         const std::string& value_header) {
  std::string out = "x\t" + value_header + "\n";
  for (const auto& [x, f] : rows) {
    out += format_number(x);
    out += '\t';
    out += format_number(f);
    out += '\n';
  }
  return out;
}

namespace {

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

template <class T>
Json optional_json(const std::optional<T>& value) {
  return value ? Json(*value) : Json(nullptr);
}

Json bound_json(const BoundCheck& check) {
  Json out;
  out["checked"] = check.checked;
  out["violations"] = check.violations;
  out["worst_excess"] = check.checked > 0 ? Json(check.worst_excess) : Json(nullptr);
  return out;
}

}  // namespace

Json report_to_json(const SimulationReport& report) {
  const auto& config = report.config;
  Json root;
  root["format"] = "minimax-simulation-report/1";

  Json cfg;
  cfg["family"] = to_string(config.model.family());
  cfg["alpha"] = config.model.has_alpha() ? Json(config.model.alpha()) : Json(nullptr);
  cfg["attraction"] = config.model.attraction().name();
  cfg["V"] = matrix_json(config.levels);
  cfg["theta"] = vector_json(config.theta);
  cfg["n_ladder"] = config.n_ladder;
  cfg["replications"] = config.replications;
  cfg["seed"] = config.seed;
  Json methods = Json::array();
  for (const auto m : config.methods) methods.push_back(to_string(m));
  cfg["methods"] = std::move(methods);
  cfg["reference_draws"] = config.reference_draws;
  root["config"] = std::move(cfg);

  Json thresholds;
  thresholds["ks"] = report.ks_threshold;
  thresholds["failure_rate"] = report.failure_threshold;
  thresholds["bound_slack"] = 1e-12;
  root["thresholds"] = std::move(thresholds);

  root["variance_G"] = optional_json(report.variance_G);
  root["covariance_target"] =
      report.covariance_target ? matrix_json(*report.covariance_target) : Json(nullptr);

  Json points = Json::array();
  for (const auto& point : report.points) {
    Json p;
    p["n"] = point.n;
    p["a_n"] = point.norming.location;
    p["b_n"] = point.norming.scale;
    Json runs;
    for (const auto& run : point.runs) {
      Json r;
      r["successes"] = run.delta.size();
      r["failures"] = run.failures;
      r["nonunique_suspected"] = run.nonunique;
      r["ks_delta"] = optional_json(run.ks_delta);
      r["ks_delta_uniform"] = optional_json(run.ks_delta_uniform);
      r["ks_theta"] = run.ks_theta;
      r["ks_theta_analytic"] = optional_json(run.ks_theta_analytic);
      Json quantiles;
      for (Eigen::Index c = 0; c < 3; ++c) {
        quantiles[format_number(kQuantileLevels[c])] =
            vector_json(run.abs_error_quantiles.col(c));
      }
      r["abs_error_quantiles"] = std::move(quantiles);
      r["covariance"] = matrix_json(run.covariance);
      if (report.covariance_target && run.covariance.size() > 0) {
        const Matrix& target = *report.covariance_target;
        r["covariance_abs_deviation"] = matrix_json((run.covariance - target).cwiseAbs());
        r["covariance_frobenius_relative"] = (run.covariance - target).norm() / target.norm();
      }
      runs[to_string(run.method)] = std::move(r);
    }
    p["methods"] = std::move(runs);
    Json bounds;
    bounds["intercept_half_range"] = bound_json(point.intercept_bound);
    bounds["level_half_range"] = bound_json(point.level_bound);
    p["bounds"] = std::move(bounds);
    if (point.cross) {
      Json c;
      c["compared"] = point.cross->compared;
      c["theta_compared"] = point.cross->theta_compared;
      c["max_delta_gap"] = point.cross->max_delta_gap;
      c["max_theta_gap"] = point.cross->max_theta_gap;
      p["cross_validation"] = std::move(c);
    } else {
      p["cross_validation"] = nullptr;
    }
    points.push_back(std::move(p));
  }
  root["points"] = std::move(points);

  Json slopes;
  for (const auto& s : report.rate_slopes) slopes[to_string(s.method)] = vector_json(s.slopes);
  root["rate_slopes"] = std::move(slopes);
  root["total_failures"] = report.total_failures();
  root["failure_breach"] = report.failure_breach();
  return root;
}

std::vector<EcdfTable> report_ecdf_tables(const SimulationReport& report, std::size_t max_points) {
  std::vector<EcdfTable> out;
  for (const auto& point : report.points) {
    for (const auto& run : point.runs) {
      const std::string prefix =
          std::string(to_string(run.method)) + ".n" + std::to_string(point.n) + ".";
      out.push_back(ecdf_table(prefix + "delta", run.delta_stat, max_points));
      for (std::size_t i = 0; i < run.theta_stat.size(); ++i) {
        out.push_back(ecdf_table(prefix + "theta" + std::to_string(i + 1), run.theta_stat[i],
                                 max_points));
      }
    }
  }
  return out;
}

Json fit_report_to_json(const FitReportInput& input) {
  const auto& fit = input.fit;
  Json root;
  root["format"] = "minimax-fit-report/1";
  root["source"] = input.source;
  root["method"] = to_string(fit.method);
  root["observations"] = input.residuals.size();
  root["parameters"] = fit.theta_hat.size();
  root["groups"] = optional_json(input.groups);
  root["theta_hat"] = vector_json(fit.theta_hat);
  root["delta_hat"] = fit.delta_hat;
  root["duality_gap"] = optional_json(fit.diagnostics.duality_gap);
  root["iterations"] = fit.diagnostics.iterations;
  root["nonunique_suspected"] = fit.diagnostics.nonunique_suspected;
  Json res;
  res["max_abs"] = input.residuals.cwiseAbs().maxCoeff();
  res["min"] = input.residuals.minCoeff();
  res["max"] = input.residuals.maxCoeff();
  res["mean_abs"] = input.residuals.cwiseAbs().mean();
  root["residuals"] = std::move(res);
  return root;
}

}  // namespace minimax
