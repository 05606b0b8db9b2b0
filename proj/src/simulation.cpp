#include "minimax/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "minimax/closed_form.hpp"
#include "minimax/lp_solver.hpp"

namespace minimax {

const char* to_string(Method method) {
  switch (method) {
    case Method::lp: return "lp";
    case Method::closed_form: return "closed_form";
    case Method::lse: return "lse";
  }
  return "unknown";
}

Method method_from_string(std::string_view name) {
  if (name == "lp") return Method::lp;
  if (name == "closed_form" || name == "closed") return Method::closed_form;
  if (name == "lse") return Method::lse;
  throw Error(ErrorCode::unsupported, "unknown method '" + std::string(name) + "'");
}

bool ExperimentConfig::has(Method m) const {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

void ExperimentConfig::validate() const {
  if (levels.rows() < 1 || levels.cols() < 1) {
    throw Error(ErrorCode::invalid_design, "level matrix V must be non-empty");
  }
  if (theta.size() != levels.cols()) {
    throw Error(ErrorCode::dimension_mismatch, "theta length must equal the columns of V");
  }
  if (replications < 1) throw Error(ErrorCode::invalid_parameter, "M must be at least 1");
  if (n_ladder.empty()) throw Error(ErrorCode::invalid_parameter, "n ladder is empty");
  for (std::size_t i = 0; i < n_ladder.size(); ++i) {
    if (n_ladder[i] < 2) throw Error(ErrorCode::invalid_parameter, "n must be at least 2");
    if (i > 0 && n_ladder[i] <= n_ladder[i - 1]) {
      throw Error(ErrorCode::invalid_parameter, "n ladder must be strictly increasing");
    }
  }
  if (methods.empty()) throw Error(ErrorCode::invalid_parameter, "no fitting methods selected");
  if (has(Method::closed_form)) {
    if (!square()) throw Error(ErrorCode::wrong_shape, "closed_form needs k = q");
    if (is_singular(levels)) throw Error(ErrorCode::singular_design, "level matrix is singular");
  }
  // Distinct rows are checked by ReplicatedDesign.
  ReplicatedDesign(levels, 1);
}

const MethodRun& LadderPoint::run(Method m) const {
  for (const auto& r : runs) {
    if (r.method == m) return r;
  }
  throw Error(ErrorCode::unsupported, std::string("method not part of the run: ") + to_string(m));
}

std::size_t SimulationReport::total_failures() const {
  std::size_t total = 0;
  for (const auto& p : points) {
    for (const auto& r : p.runs) total += r.failures;
  }
  return total;
}

bool SimulationReport::failure_breach() const {
  const double m = static_cast<double>(config.replications);
  for (const auto& p : points) {
    for (const auto& r : p.runs) {
      if (static_cast<double>(r.failures) > failure_threshold * m) return true;
    }
  }
  return false;
}

namespace {

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
}

struct MethodOutcome {
  bool ok = false;
  bool nonunique = false;
  double delta = 0.0;
  Vector d;  // theta_hat - theta
};

struct Replication {
  std::vector<MethodOutcome> methods;
  double half_range_all = 0.0;     // R_N / 2 of the errors
  double half_range_levels = 0.0;  // max_l R_nl / 2
};

constexpr std::uint64_t kReferenceStream = 0x5eed'cafe'f00d'0001ULL;

double quantile_sorted(const std::vector<double>& sorted, double level) {
  // Type-7 (linear interpolation) quantile.
  const double h = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Matrix sample_covariance(const std::vector<std::vector<double>>& columns) {
  const auto q = static_cast<Eigen::Index>(columns.size());
  if (q == 0 || columns[0].size() < 2) return Matrix::Zero(q, q);
  const auto m = static_cast<Eigen::Index>(columns[0].size());
  Matrix data(m, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    data.col(i) = Eigen::Map<const Vector>(columns[static_cast<std::size_t>(i)].data(), m);
  }
  const Matrix centered = data.rowwise() - data.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(m - 1);
}

bool has_full_row_rank(const Matrix& levels) {
  Eigen::FullPivLU<Matrix> lu(levels);
  lu.setThreshold(1e-12);
  return lu.rank() == levels.rows();
}

}  // namespace

std::vector<std::vector<double>> simulate_coefficient_limit(const AttractionType& type,
                                                            const Matrix& levels,
                                                            std::size_t draws,
                                                            std::uint64_t seed) {
  if (levels.rows() != levels.cols()) {
    throw Error(ErrorCode::wrong_shape, "coefficient limit law needs a square level matrix");
  }
  const auto q = levels.rows();
  const Eigen::PartialPivLU<Matrix> lu(levels);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(q), std::vector<double>(draws));
  RandomStream stream(seed);
  Vector diff(q);
  for (std::size_t r = 0; r < draws; ++r) {
    for (Eigen::Index l = 0; l < q; ++l) {
      const double zeta = type.quantile(stream.uniform_open());
      const double zeta_prime = type.quantile(stream.uniform_open());
      diff[l] = zeta - zeta_prime;
    }
    const Vector coeff = lu.solve(diff);
    for (Eigen::Index i = 0; i < q; ++i) out[static_cast<std::size_t>(i)][r] = coeff[i];
  }
  return out;
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw Error(ErrorCode::empty_input, "KS distance of an empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double di = static_cast<double>(i);
    worst = std::max({worst, (di + 1.0) / m - f, f - di / m});
  }
  return std::clamp(worst, 0.0, 1.0);
}

double ks_distance(std::span<const double> samples, const LimitLaw& law) {
  return ks_distance(samples, [&law](double x) { return limit_cdf(law, x); });
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::empty_input, "KS distance of an empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double worst = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return worst;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::insufficient_data, "slope needs at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

SimulationReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto k = config.levels_count();
  const auto q = config.parameters();
  const auto type = config.model.attraction();
  const bool square = config.square();
  const bool intercept = (config.levels.col(0).array() == 1.0).all();
  const bool level_bound_applies = k < q && has_full_row_rank(config.levels);

  SimulationReport report;
  report.config = config;
  report.variance_G = variance_of_G(type);
  if (square && report.variance_G) {
    report.covariance_target =
        2.0 * *report.variance_G * (config.levels.transpose() * config.levels).inverse();
  }

  std::vector<std::vector<double>> reference;
  if (square && config.reference_draws > 0) {
    reference = simulate_coefficient_limit(type, config.levels, config.reference_draws,
                                           derive_stream(config.seed, {kReferenceStream}));
  }

  for (const auto n : config.n_ladder) {
    LadderPoint point;
    point.n = n;
    point.norming = norming_constants(config.model, n);
    const double a_n = point.norming.location;
    const double b_n = point.norming.scale;

    std::vector<Replication> reps(config.replications);
    parallel_for(config.replications, config.threads, [&](std::size_t r) {
      RandomStream stream(derive_stream(config.seed, {static_cast<std::uint64_t>(n), r}));
      ReplicatedDesign design(config.levels, n);
      Vector errors(static_cast<Eigen::Index>(design.observations()));
      sample_into(config.model, std::span<double>(errors.data(), errors.size()), stream);
      Vector y = design.expand().rows() * config.theta + errors;
      const Dataset data(std::move(design), std::move(y), config.theta);

      Replication& rep = reps[r];
      const auto all = group_extremes(std::span<const double>(errors.data(), errors.size()));
      const auto per_level = group_extremes(std::span<const double>(errors.data(), errors.size()),
                                            data.replicated()->group_index());
      rep.half_range_all = 0.5 * all.range[0];
      rep.half_range_levels = 0.5 * per_level.range.maxCoeff();

      rep.methods.resize(config.methods.size());
      for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
        MethodOutcome& out = rep.methods[mi];
        try {
          FitResult fit;
          switch (config.methods[mi]) {
            case Method::lp: fit = minimax_fit_lp(data); break;
            case Method::closed_form: fit = closed_form_fit(data); break;
            case Method::lse: fit = lse_fit(data); break;
          }
          out.ok = true;
          out.delta = fit.delta_hat;
          out.d = *fit.d_hat;
          out.nonunique = fit.diagnostics.nonunique_suspected;
        } catch (const Error&) {
          out.ok = false;
        }
      }
    });

    // Aggregation in replication order keeps the report independent of scheduling.
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
      MethodRun run;
      run.method = config.methods[mi];
      run.theta_error.assign(q, {});
      run.theta_stat.assign(q, {});
      for (const auto& rep : reps) {
        const auto& out = rep.methods[mi];
        if (!out.ok) {
          ++run.failures;
          continue;
        }
        if (out.nonunique) ++run.nonunique;
        run.delta.push_back(out.delta);
        run.delta_stat.push_back(2.0 * b_n * (out.delta - a_n));
        for (std::size_t i = 0; i < q; ++i) {
          const double d = out.d[static_cast<Eigen::Index>(i)];
          run.theta_error[i].push_back(d);
          run.theta_stat[i].push_back(2.0 * b_n * d);
        }
      }

      run.abs_error_quantiles = Matrix::Zero(static_cast<Eigen::Index>(q), 3);
      if (!run.delta.empty()) {
        for (std::size_t i = 0; i < q; ++i) {
          std::vector<double> abs_err(run.theta_error[i]);
          for (auto& v : abs_err) v = std::abs(v);
          std::sort(abs_err.begin(), abs_err.end());
          for (Eigen::Index c = 0; c < 3; ++c) {
            run.abs_error_quantiles(static_cast<Eigen::Index>(i), c) =
                quantile_sorted(abs_err, kQuantileLevels[c]);
          }
        }
        run.covariance = sample_covariance(run.theta_stat);

        if (square && run.method != Method::lse) {
          run.ks_delta = ks_distance(run.delta_stat, LimitLaw::q_power(type, static_cast<int>(q)));
          if (config.model.family() == Family::uniform_symmetric) {
            std::vector<double> scaled(run.delta);
            for (auto& v : scaled) v = static_cast<double>(n) * (1.0 - v);
            run.ks_delta_uniform = ks_distance(scaled, LimitLaw::uniform_delta(static_cast<int>(q)));
          }
          for (std::size_t i = 0; i < q && !reference.empty(); ++i) {
            run.ks_theta.push_back(ks_two_sample(run.theta_stat[i], reference[i]));
          }
          if (q == 1) {
            const double v = config.levels(0, 0);
            const auto law = LimitLaw::midrange_diff(type);
            run.ks_theta_analytic = ks_distance(run.theta_stat[0], [&](double x) {
              const double f = limit_cdf(law, x * v);
              return v > 0.0 ? f : 1.0 - f;
            });
          }
        }
      }
      point.runs.push_back(std::move(run));
    }

    // Bound checks use the minimax fit: LP when present, otherwise closed form.
    std::optional<std::size_t> minimax_index;
    for (std::size_t mi = 0; mi < config.methods.size() && !minimax_index; ++mi) {
      if (config.methods[mi] == Method::lp) minimax_index = mi;
    }
    for (std::size_t mi = 0; mi < config.methods.size() && !minimax_index; ++mi) {
      if (config.methods[mi] == Method::closed_form) minimax_index = mi;
    }
    if (minimax_index) {
      for (const auto& rep : reps) {
        const auto& out = rep.methods[*minimax_index];
        if (!out.ok) continue;
        if (intercept) {
          const double excess = out.delta - rep.half_range_all;
          ++point.intercept_bound.checked;
          point.intercept_bound.worst_excess = std::max(point.intercept_bound.worst_excess, excess);
          if (excess > 1e-12) ++point.intercept_bound.violations;
        }
        if (level_bound_applies) {
          const double excess = out.delta - rep.half_range_levels;
          ++point.level_bound.checked;
          point.level_bound.worst_excess = std::max(point.level_bound.worst_excess, excess);
          if (excess > 1e-12) ++point.level_bound.violations;
        }
      }
    }

    if (config.has(Method::lp) && config.has(Method::closed_form)) {
      const auto lp_i = static_cast<std::size_t>(
          std::find(config.methods.begin(), config.methods.end(), Method::lp) -
          config.methods.begin());
      const auto cf_i = static_cast<std::size_t>(
          std::find(config.methods.begin(), config.methods.end(), Method::closed_form) -
          config.methods.begin());
      CrossValidation cross;
      for (const auto& rep : reps) {
        const auto& lp = rep.methods[lp_i];
        const auto& cf = rep.methods[cf_i];
        if (!lp.ok || !cf.ok) continue;
        ++cross.compared;
        cross.max_delta_gap = std::max(cross.max_delta_gap, std::abs(lp.delta - cf.delta));
        if (!lp.nonunique) {
          ++cross.theta_compared;
          cross.max_theta_gap = std::max(cross.max_theta_gap, (lp.d - cf.d).cwiseAbs().maxCoeff());
        }
      }
      point.cross = cross;
    }
    report.points.push_back(std::move(point));
  }

  if (report.points.size() >= 2) report.rate_slopes = rate_slopes(report);
  return report;
}

std::vector<RateSlope> rate_slopes(const SimulationReport& report) {
  const auto& config = report.config;
  if (report.points.size() < 2) {
    throw Error(ErrorCode::insufficient_data, "rate slopes need at least two ladder points");
  }
  std::vector<RateSlope> out;
  const auto q = config.parameters();
  for (const auto method : config.methods) {
    RateSlope slope;
    slope.method = method;
    slope.slopes = Vector::Zero(static_cast<Eigen::Index>(q));
    bool usable = true;
    for (std::size_t i = 0; i < q; ++i) {
      std::vector<double> log_n, log_median;
      for (const auto& point : report.points) {
        const auto& run = point.run(method);
        if (run.delta.empty()) {
          usable = false;
          break;
        }
        log_n.push_back(std::log(static_cast<double>(point.n)));
        log_median.push_back(std::log(run.abs_error_quantiles(static_cast<Eigen::Index>(i), 0)));
      }
      if (!usable) break;
      slope.slopes[static_cast<Eigen::Index>(i)] = ols_slope(log_n, log_median);
    }
    if (usable) out.push_back(std::move(slope));
  }
  return out;
}

std::vector<RateSlope> rate_slope(const ExperimentConfig& config) {
  if (config.n_ladder.size() < 4) {
    throw Error(ErrorCode::insufficient_data, "rate slope needs a ladder of at least 4 n values");
  }
  if (config.replications < 500) {
    throw Error(ErrorCode::insufficient_data, "rate slope needs at least 500 replications");
  }
  return run_experiment(config).rate_slopes;
}

CovarianceComparison covariance_check(const SimulationReport& report, Method method) {
  const auto type = report.config.model.attraction();
  if (!variance_of_G(type)) {
    throw Error(ErrorCode::unsupported,
                "limit law " + type.name() + " has infinite variance; covariance undefined");
  }
  if (!report.covariance_target) {
    throw Error(ErrorCode::wrong_shape, "covariance target needs a square level matrix");
  }
  const auto& point = report.points.back();
  const auto& run = point.run(method);
  CovarianceComparison out;
  out.method = method;
  out.n = point.n;
  out.sample = run.covariance;
  out.target = *report.covariance_target;
  out.abs_deviation = (out.sample - out.target).cwiseAbs();
  out.frobenius_relative = (out.sample - out.target).norm() / out.target.norm();
  return out;
}

CovarianceComparison covariance_check(const ExperimentConfig& config) {
  const auto type = config.model.attraction();
  if (!variance_of_G(type)) {
    throw Error(ErrorCode::unsupported,
                "limit law " + type.name() + " has infinite variance; covariance undefined");
  }
  const Method method = config.has(Method::closed_form) ? Method::closed_form : config.methods.front();
  return covariance_check(run_experiment(config), method);
}

CrossValidation cross_validate_methods(const ExperimentConfig& config) {
  ExperimentConfig both = config;
  both.methods = {Method::lp, Method::closed_form};
  both.reference_draws = 0;
  const auto report = run_experiment(both);
  CrossValidation total;
  for (const auto& point : report.points) {
    const auto& c = *point.cross;
    total.compared += c.compared;
    total.theta_compared += c.theta_compared;
    total.max_delta_gap = std::max(total.max_delta_gap, c.max_delta_gap);
    total.max_theta_gap = std::max(total.max_theta_gap, c.max_theta_gap);
  }
  return total;
}

}  // namespace minimax
