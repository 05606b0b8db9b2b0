#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "minimax/core_model.hpp"
#include "minimax/evt.hpp"

namespace minimax {

enum class Method { lp, closed_form, lse };

const char* to_string(Method method);
Method method_from_string(std::string_view name);

// KS tolerance applied to every distributional check, and the largest share of
// failed replications an experiment may have.
inline constexpr double kKsThreshold = 0.05;
inline constexpr double kFailureRateThreshold = 0.001;

struct ExperimentConfig {
  ErrorModel model = ErrorModel::uniform();
  Matrix levels;  // k x q level matrix V
  Vector theta;   // true parameters
  std::vector<std::size_t> n_ladder;
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  std::vector<Method> methods{Method::lp};
  // Size of the directly simulated reference sample for the coefficient law.
  std::size_t reference_draws = 1'000'000;
  unsigned threads = 0;  // 0: hardware concurrency

  std::size_t levels_count() const noexcept { return static_cast<std::size_t>(levels.rows()); }
  std::size_t parameters() const noexcept { return static_cast<std::size_t>(levels.cols()); }
  bool square() const noexcept { return levels.rows() == levels.cols(); }
  bool has(Method m) const;
  void validate() const;
};

struct MethodRun {
  Method method = Method::lp;
  std::size_t failures = 0;
  std::size_t nonunique = 0;
  // One entry per successful replication, in replication order.
  std::vector<double> delta;                      // Delta_hat
  std::vector<double> delta_stat;                 // 2 b_n (Delta_hat - a_n)
  std::vector<std::vector<double>> theta_error;   // [i][r] theta_hat_i - theta_i
  std::vector<std::vector<double>> theta_stat;    // [i][r] 2 b_n (theta_hat_i - theta_i)
  std::optional<double> ks_delta;                 // vs (G*G)^q, k = q
  std::optional<double> ks_delta_uniform;         // n (1 - Delta_hat) vs 1 - (1+x)^q e^{-qx}
  std::vector<double> ks_theta;                   // vs direct simulation of V^{-1}(zeta - zeta'), k = q
  std::optional<double> ks_theta_analytic;        // k = q = 1 only
  Matrix abs_error_quantiles;                     // q x 3, levels 0.5, 0.9, 0.99
  Matrix covariance;                              // of 2 b_n (theta_hat - theta)
};

inline constexpr double kQuantileLevels[3] = {0.5, 0.9, 0.99};

struct BoundCheck {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
};

struct CrossValidation {
  std::size_t compared = 0;
  std::size_t theta_compared = 0;  // replications without the non-uniqueness flag
  double max_delta_gap = 0.0;
  double max_theta_gap = 0.0;
};

struct LadderPoint {
  std::size_t n = 0;
  NormingConstants norming;
  std::vector<MethodRun> runs;
  BoundCheck intercept_bound;  // Delta_hat <= R_N / 2 with an intercept column
  BoundCheck level_bound;      // Delta_hat <= max_l R_nl / 2 for k < q
  std::optional<CrossValidation> cross;

  const MethodRun& run(Method m) const;
};

struct RateSlope {
  Method method = Method::lp;
  Vector slopes;  // per coefficient: slope of log median |theta_hat_i - theta_i| vs log n
};

struct SimulationReport {
  ExperimentConfig config;
  std::vector<LadderPoint> points;
  std::vector<RateSlope> rate_slopes;  // filled when the ladder has >= 2 points
  std::optional<double> variance_G;
  std::optional<Matrix> covariance_target;  // C_G = 2 sigma_G^2 (V'V)^{-1}, k = q
  double ks_threshold = kKsThreshold;
  double failure_threshold = kFailureRateThreshold;

  std::size_t total_failures() const;
  bool failure_breach() const;
};

SimulationReport run_experiment(const ExperimentConfig& config);

// Draws of V^{-1}(zeta_bar - zeta_bar') with all zeta, zeta' i.i.d. G; result[i]
// holds the draws of coordinate i.
std::vector<std::vector<double>> simulate_coefficient_limit(const AttractionType& type,
                                                            const Matrix& levels,
                                                            std::size_t draws,
                                                            std::uint64_t seed);

// One-sample KS distance sup_x |F_hat(x) - F(x)| evaluated on both sides of
// every step of the empirical CDF.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);
double ks_distance(std::span<const double> samples, const LimitLaw& law);

// Two-sample KS distance between empirical CDFs.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

// Ordinary least-squares slope of y against x.
double ols_slope(std::span<const double> x, std::span<const double> y);

std::vector<RateSlope> rate_slopes(const SimulationReport& report);

// Runs the experiment; needs a ladder of >= 4 n values and >= 500 replications.
std::vector<RateSlope> rate_slope(const ExperimentConfig& config);

struct CovarianceComparison {
  Method method = Method::closed_form;
  std::size_t n = 0;
  Matrix sample;
  Matrix target;
  Matrix abs_deviation;
  double frobenius_relative = 0.0;
};

// Compares the sample covariance at the largest n against C_G. Refuses
// (unsupported) when Var(zeta) is infinite and needs k = q.
CovarianceComparison covariance_check(const SimulationReport& report, Method method);
CovarianceComparison covariance_check(const ExperimentConfig& config);

// Largest per-replication disagreement between the LP and closed-form fits.
CrossValidation cross_validate_methods(const ExperimentConfig& config);

}  // namespace minimax
