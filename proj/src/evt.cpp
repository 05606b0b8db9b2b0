#include "minimax/evt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace minimax {

const char* to_string(Family family) {
  switch (family) {
    case Family::uniform_symmetric: return "uniform";
    case Family::laplace: return "laplace";
    case Family::bounded_power: return "bounded_power";
    case Family::pareto_symmetric: return "pareto";
    case Family::gaussian: return "gaussian";
  }
  return "unknown";
}

const char* to_string(ExtremeType type) {
  switch (type) {
    case ExtremeType::frechet: return "frechet";
    case ExtremeType::weibull: return "weibull";
    case ExtremeType::gumbel: return "gumbel";
  }
  return "unknown";
}

const char* to_string(ScaleTrend trend) {
  switch (trend) {
    case ScaleTrend::diverges: return "diverges";
    case ScaleTrend::bounded: return "bounded";
    case ScaleTrend::converges_to_zero: return "converges_to_zero";
  }
  return "unknown";
}

const char* to_string(LawKind kind) {
  switch (kind) {
    case LawKind::max_law: return "max";
    case LawKind::sum_law: return "sum";
    case LawKind::q_power: return "qpower";
    case LawKind::midrange_diff: return "midrange";
    case LawKind::uniform_delta: return "delta";
    case LawKind::logistic: return "logistic";
  }
  return "unknown";
}

namespace {

void require_positive_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::invalid_parameter, "tail exponent alpha must be positive and finite");
  }
}

}  // namespace

AttractionType AttractionType::frechet(double alpha) {
  require_positive_alpha(alpha);
  return {ExtremeType::frechet, alpha};
}

AttractionType AttractionType::weibull(double alpha) {
  require_positive_alpha(alpha);
  return {ExtremeType::weibull, alpha};
}

AttractionType AttractionType::gumbel() { return {ExtremeType::gumbel, 1.0}; }

double AttractionType::cdf(double x) const {
  switch (kind) {
    case ExtremeType::frechet:
      return x <= 0.0 ? 0.0 : std::exp(-std::pow(x, -alpha));
    case ExtremeType::weibull:
      return x >= 0.0 ? 1.0 : std::exp(-std::pow(-x, alpha));
    case ExtremeType::gumbel:
      return std::exp(-std::exp(-x));
  }
  return 0.0;
}

double AttractionType::quantile(double p) const {
  const double t = -std::log(p);
  switch (kind) {
    case ExtremeType::frechet: return std::pow(t, -1.0 / alpha);
    case ExtremeType::weibull: return -std::pow(t, 1.0 / alpha);
    case ExtremeType::gumbel: return -std::log(t);
  }
  return 0.0;
}

std::string AttractionType::name() const {
  if (kind == ExtremeType::gumbel) return "gumbel";
  return std::string(to_string(kind)) + "(" + std::to_string(alpha) + ")";
}

ErrorModel::ErrorModel(Family family, double alpha) : family_(family), alpha_(alpha) {}

ErrorModel ErrorModel::uniform() { return {Family::uniform_symmetric, 1.0}; }
ErrorModel ErrorModel::laplace() { return {Family::laplace, 1.0}; }
ErrorModel ErrorModel::gaussian() { return {Family::gaussian, 1.0}; }

ErrorModel ErrorModel::bounded_power(double alpha) {
  require_positive_alpha(alpha);
  return {Family::bounded_power, alpha};
}

ErrorModel ErrorModel::pareto(double alpha) {
  require_positive_alpha(alpha);
  return {Family::pareto_symmetric, alpha};
}

ErrorModel ErrorModel::from_name(std::string_view name, std::optional<double> alpha) {
  auto needs_alpha = [&]() {
    if (!alpha) {
      throw Error(ErrorCode::invalid_parameter,
                  "family '" + std::string(name) + "' needs a tail exponent alpha");
    }
    return *alpha;
  };
  if (name == "uniform" || name == "uniform_symmetric") return uniform();
  if (name == "laplace") return laplace();
  if (name == "gaussian" || name == "normal") return gaussian();
  if (name == "bounded_power") return bounded_power(needs_alpha());
  if (name == "pareto" || name == "pareto_symmetric") return pareto(needs_alpha());
  throw Error(ErrorCode::unsupported, "unknown error family '" + std::string(name) + "'");
}

bool ErrorModel::has_alpha() const noexcept {
  return family_ == Family::bounded_power || family_ == Family::pareto_symmetric;
}

std::optional<double> ErrorModel::support_endpoint() const {
  if (family_ == Family::uniform_symmetric || family_ == Family::bounded_power) return 1.0;
  return std::nullopt;
}

AttractionType ErrorModel::attraction() const {
  switch (family_) {
    case Family::uniform_symmetric: return AttractionType::weibull(1.0);
    case Family::bounded_power: return AttractionType::weibull(alpha_);
    case Family::pareto_symmetric: return AttractionType::frechet(alpha_);
    case Family::laplace:
    case Family::gaussian: return AttractionType::gumbel();
  }
  return AttractionType::gumbel();
}

std::string ErrorModel::name() const {
  std::string out = to_string(family_);
  if (has_alpha()) out += "(" + std::to_string(alpha_) + ")";
  return out;
}

double ErrorModel::cdf(double x) const {
  switch (family_) {
    case Family::uniform_symmetric:
      return std::clamp(0.5 * (x + 1.0), 0.0, 1.0);
    case Family::laplace:
      return x < 0.0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
    case Family::bounded_power:
      if (x <= -1.0) return 0.0;
      if (x >= 1.0) return 1.0;
      return x < 0.0 ? 0.5 * std::pow(1.0 + x, alpha_) : 1.0 - 0.5 * std::pow(1.0 - x, alpha_);
    case Family::pareto_symmetric:
      if (x <= -1.0) return 0.5 * std::pow(-x, -alpha_);
      if (x < 1.0) return 0.5;
      return 1.0 - 0.5 * std::pow(x, -alpha_);
    case Family::gaussian:
      return 0.5 * std::erfc(-x / std::numbers::sqrt2);
  }
  return 0.0;
}

double ErrorModel::density(double x) const {
  switch (family_) {
    case Family::uniform_symmetric:
      return std::abs(x) <= 1.0 ? 0.5 : 0.0;
    case Family::laplace:
      return 0.5 * std::exp(-std::abs(x));
    case Family::bounded_power:
      return std::abs(x) < 1.0 ? 0.5 * alpha_ * std::pow(1.0 - std::abs(x), alpha_ - 1.0) : 0.0;
    case Family::pareto_symmetric:
      return std::abs(x) >= 1.0 ? 0.5 * alpha_ * std::pow(std::abs(x), -alpha_ - 1.0) : 0.0;
    case Family::gaussian:
      return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  }
  return 0.0;
}

double ErrorModel::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::invalid_parameter, "quantile level must lie in (0, 1)");
  }
  switch (family_) {
    case Family::uniform_symmetric:
      return 2.0 * p - 1.0;
    case Family::laplace:
      return p < 0.5 ? std::log(2.0 * p) : -std::log(2.0 * (1.0 - p));
    case Family::bounded_power:
      return p < 0.5 ? std::pow(2.0 * p, 1.0 / alpha_) - 1.0
                     : 1.0 - std::pow(2.0 * (1.0 - p), 1.0 / alpha_);
    case Family::pareto_symmetric:
      return p < 0.5 ? -std::pow(2.0 * p, -1.0 / alpha_) : std::pow(2.0 * (1.0 - p), -1.0 / alpha_);
    case Family::gaussian:
      return boost::math::quantile(boost::math::normal_distribution<double>(), p);
  }
  return 0.0;
}

void sample_into(const ErrorModel& model, std::span<double> out, RandomStream& stream) {
  // The two hot families avoid the generic dispatch.
  switch (model.family()) {
    case Family::uniform_symmetric:
      for (auto& v : out) v = 2.0 * stream.uniform_open() - 1.0;
      return;
    case Family::laplace:
      for (auto& v : out) {
        const double p = stream.uniform_open();
        v = p < 0.5 ? std::log(2.0 * p) : -std::log(2.0 * (1.0 - p));
      }
      return;
    default:
      for (auto& v : out) v = model.quantile(stream.uniform_open());
  }
}

std::vector<double> sample(const ErrorModel& model, std::size_t count, std::uint64_t seed) {
  std::vector<double> out(count);
  RandomStream stream(seed);
  sample_into(model, out, stream);
  return out;
}

NormingConstants norming_constants(const ErrorModel& model, std::size_t n) {
  if (n < 2) throw Error(ErrorCode::unsupported, "norming constants need n >= 2");
  const double nd = static_cast<double>(n);
  NormingConstants out;
  out.n = n;
  switch (model.family()) {
    case Family::uniform_symmetric:
      out.location = 1.0;
      out.scale = nd / 2.0;
      break;
    case Family::laplace:
      out.location = std::log(nd / 2.0);
      out.scale = 1.0;
      break;
    case Family::bounded_power: {
      // gamma_n = F^{-1}(1 - 1/n), b_n = (x_F - gamma_n)^{-1}
      const double gamma = 1.0 - std::pow(2.0 / nd, 1.0 / model.alpha());
      out.location = 1.0;
      out.scale = 1.0 / (1.0 - gamma);
      break;
    }
    case Family::pareto_symmetric: {
      const double gamma = std::pow(2.0 / nd, -1.0 / model.alpha());
      out.location = 0.0;
      out.scale = 1.0 / gamma;
      break;
    }
    case Family::gaussian: {
      const double a = model.quantile(1.0 - 1.0 / nd);
      out.location = a;
      out.scale = nd * model.density(a);
      break;
    }
  }
  return out;
}

ScaleTrend check_bn_divergence(const ErrorModel& model) {
  switch (model.attraction().kind) {
    case ExtremeType::frechet: return ScaleTrend::converges_to_zero;
    case ExtremeType::weibull: return ScaleTrend::diverges;
    case ExtremeType::gumbel:
      // b_n = r(gamma_n) with r the hazard rate: constant for Laplace, ~x for Gaussian.
      return model.family() == Family::laplace ? ScaleTrend::bounded : ScaleTrend::diverges;
  }
  return ScaleTrend::bounded;
}

std::optional<double> variance_of_G(const AttractionType& type) {
  switch (type.kind) {
    case ExtremeType::weibull: {
      const double m1 = std::tgamma(1.0 + 1.0 / type.alpha);
      return std::tgamma(1.0 + 2.0 / type.alpha) - m1 * m1;
    }
    case ExtremeType::gumbel:
      return std::numbers::pi * std::numbers::pi / 6.0;
    case ExtremeType::frechet: {
      if (type.alpha <= 2.0) return std::nullopt;
      const double m1 = std::tgamma(1.0 - 1.0 / type.alpha);
      return std::tgamma(1.0 - 2.0 / type.alpha) - m1 * m1;
    }
  }
  return std::nullopt;
}

LimitLaw LimitLaw::max(AttractionType type) { return {LawKind::max_law, type, 1}; }
LimitLaw LimitLaw::sum(AttractionType type) { return {LawKind::sum_law, type, 1}; }

LimitLaw LimitLaw::q_power(AttractionType type, int q) {
  if (q < 1) throw Error(ErrorCode::invalid_parameter, "power q must be at least 1");
  return {LawKind::q_power, type, q};
}

LimitLaw LimitLaw::midrange_diff(AttractionType type) { return {LawKind::midrange_diff, type, 1}; }

LimitLaw LimitLaw::uniform_delta(int q) {
  if (q < 1) throw Error(ErrorCode::invalid_parameter, "power q must be at least 1");
  return {LawKind::uniform_delta, AttractionType::weibull(1.0), q};
}

LimitLaw LimitLaw::logistic() { return {LawKind::logistic, AttractionType::gumbel(), 1}; }

std::optional<double> LimitLaw::variance() const { return variance_of_G(type); }

namespace {

boost::math::quadrature::tanh_sinh<double>& integrator() {
  thread_local boost::math::quadrature::tanh_sinh<double> instance;
  return instance;
}

// E[G(x + sign * zeta')] as an integral over the probability scale of zeta',
// split where the integrand reaches the edge of the support.
double convolve(const AttractionType& g, double x, double sign) {
  auto integrand = [&](double p) {
    if (p <= 0.0 || p >= 1.0) {
      const double z = g.quantile(std::clamp(p, 1e-300, 1.0 - 1e-16));
      return g.cdf(x + sign * z);
    }
    return g.cdf(x + sign * g.quantile(p));
  };
  std::vector<double> cuts{0.0, 1.0};
  for (const double c : {g.cdf(x), g.cdf(-x)}) {
    if (c > 0.0 && c < 1.0) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] <= 0.0) continue;
    total += integrator().integrate(integrand, cuts[i], cuts[i + 1], 1e-12);
  }
  return std::clamp(total, 0.0, 1.0);
}

bool is_unit_weibull(const AttractionType& g) {
  return g.kind == ExtremeType::weibull && g.alpha == 1.0;
}

double sum_cdf(const AttractionType& g, double x) {
  if (is_unit_weibull(g)) {
    // -(zeta + zeta') is Gamma(2, 1).
    return x >= 0.0 ? 1.0 : (1.0 - x) * std::exp(x);
  }
  if (g.kind == ExtremeType::weibull && x >= 0.0) return 1.0;
  if (g.kind == ExtremeType::frechet && x <= 0.0) return 0.0;
  return convolve(g, x, -1.0);
}

double diff_cdf(const AttractionType& g, double x) {
  if (is_unit_weibull(g)) {
    // Difference of two unit exponentials is standard Laplace.
    return x < 0.0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
  }
  if (g.kind == ExtremeType::gumbel) return 1.0 / (1.0 + std::exp(-x));
  return convolve(g, x, 1.0);
}

}  // namespace

double numeric_sum_cdf(const AttractionType& type, double x) { return convolve(type, x, -1.0); }
double numeric_diff_cdf(const AttractionType& type, double x) { return convolve(type, x, 1.0); }

double limit_cdf(const LimitLaw& law, double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::invalid_parameter, "limit_cdf needs a finite x");
  switch (law.kind) {
    case LawKind::max_law: return law.type.cdf(x);
    case LawKind::sum_law: return sum_cdf(law.type, x);
    case LawKind::q_power: return std::pow(sum_cdf(law.type, x), law.q);
    case LawKind::midrange_diff: return diff_cdf(law.type, x);
    case LawKind::uniform_delta:
      if (x <= 0.0) return 0.0;
      return 1.0 - std::pow(1.0 + x, law.q) * std::exp(-law.q * x);
    case LawKind::logistic: return 1.0 / (1.0 + std::exp(-x));
  }
  return 0.0;
}

}  // namespace minimax
