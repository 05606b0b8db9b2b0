#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minimax/error.hpp"
#include "minimax/random.hpp"

namespace minimax {

enum class Family { uniform_symmetric, laplace, bounded_power, pareto_symmetric, gaussian };

// The three extreme-value types: Frechet Phi_alpha, Weibull Psi_alpha, Gumbel Lambda.
enum class ExtremeType { frechet, weibull, gumbel };

const char* to_string(Family family);
const char* to_string(ExtremeType type);

struct AttractionType {
  ExtremeType kind = ExtremeType::gumbel;
  double alpha = 1.0;  // ignored for gumbel

  static AttractionType frechet(double alpha);
  static AttractionType weibull(double alpha);
  static AttractionType gumbel();

  double cdf(double x) const;
  double quantile(double p) const;
  std::string name() const;

  friend bool operator==(const AttractionType&, const AttractionType&) = default;
};

// Symmetric error distribution with its domain of maximum attraction.
//   uniform_symmetric   U[-1, 1]                                 -> Psi_1
//   laplace             density exp(-|x|)/2                     -> Lambda
//   bounded_power(a)    on [-1,1], 1 - F(1-h) = h^a / 2          -> Psi_a
//   pareto_symmetric(a) density (a/2)|x|^(-a-1) for |x| >= 1     -> Phi_a
//   gaussian            standard normal                         -> Lambda
class ErrorModel {
 public:
  static ErrorModel uniform();
  static ErrorModel laplace();
  static ErrorModel bounded_power(double alpha);
  static ErrorModel pareto(double alpha);
  static ErrorModel gaussian();

  // Accepts "uniform", "laplace", "bounded_power", "pareto", "gaussian" (and the
  // long enum spellings); alpha is required for the two parametric families.
  static ErrorModel from_name(std::string_view name, std::optional<double> alpha = std::nullopt);

  Family family() const noexcept { return family_; }
  double alpha() const noexcept { return alpha_; }
  bool has_alpha() const noexcept;
  std::optional<double> support_endpoint() const;
  AttractionType attraction() const;
  std::string name() const;

  double cdf(double x) const;
  double density(double x) const;
  double quantile(double p) const;

 private:
  ErrorModel(Family family, double alpha);

  Family family_;
  double alpha_;
};

void sample_into(const ErrorModel& model, std::span<double> out, RandomStream& stream);

// count i.i.d. draws by inverse-CDF transform of the stream seeded with `seed`.
std::vector<double> sample(const ErrorModel& model, std::size_t count, std::uint64_t seed);

struct NormingConstants {
  double location = 0.0;  // a_n
  double scale = 1.0;     // b_n
  std::size_t n = 0;
};

NormingConstants norming_constants(const ErrorModel& model, std::size_t n);

enum class ScaleTrend { diverges, bounded, converges_to_zero };

const char* to_string(ScaleTrend trend);

// Behaviour of b_n as n grows; consistency of the minimax estimator needs divergence.
ScaleTrend check_bn_divergence(const ErrorModel& model);

// Var(zeta) for zeta ~ G, or nullopt when it is infinite or undefined.
std::optional<double> variance_of_G(const AttractionType& type);

enum class LawKind {
  max_law,          // G
  sum_law,          // G * G, law of zeta + zeta'
  q_power,          // (G * G)^q, limit of 2 b_n (Delta_hat - a_n) when k = q
  midrange_diff,    // law of zeta - zeta', limit of 2 b_n Q_n
  uniform_delta,    // 1 - (1 + x)^q exp(-q x), limit of n (1 - Delta_hat) for U[-1,1]
  logistic,         // 1 / (1 + exp(-x))
};

const char* to_string(LawKind kind);

struct LimitLaw {
  LawKind kind = LawKind::max_law;
  AttractionType type;
  int q = 1;

  static LimitLaw max(AttractionType type);
  static LimitLaw sum(AttractionType type);
  static LimitLaw q_power(AttractionType type, int q);
  static LimitLaw midrange_diff(AttractionType type);
  static LimitLaw uniform_delta(int q);
  static LimitLaw logistic();

  std::optional<double> variance() const;
};

// Quadrature-only evaluation of P(zeta + zeta' <= x) and P(zeta - zeta' <= x),
// bypassing the closed forms; used to cross-check them.
double numeric_sum_cdf(const AttractionType& type, double x);
double numeric_diff_cdf(const AttractionType& type, double x);

// Probability P(X <= x) under the law. Throws invalid_parameter for non-finite x.
double limit_cdf(const LimitLaw& law, double x);

}  // namespace minimax
