#pragma once

// Reference implementations used only by the tests. None of them call into the
// library's solvers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct ChebyshevFit {
  double delta = std::numeric_limits<double>::infinity();
  VectorXd theta;
};

// Minimum of max_j |y_j - x_j tau| by enumerating every vertex of
// { (tau, D) : D >= +-(y_j - x_j tau) }: choose q+1 signed constraints, solve
// them as equalities and keep the feasible point with the smallest D.
inline ChebyshevFit brute_force_chebyshev(const MatrixXd& x, const VectorXd& y) {
  const int n = static_cast<int>(x.rows());
  const int q = static_cast<int>(x.cols());
  const int m = 2 * n;
  ChebyshevFit best;
  std::vector<int> pick(static_cast<std::size_t>(q + 1));
  for (int i = 0; i <= q; ++i) pick[static_cast<std::size_t>(i)] = i;
  if (m < q + 1) return best;
  while (true) {
    MatrixXd a(q + 1, q + 1);
    VectorXd b(q + 1);
    for (int r = 0; r <= q; ++r) {
      const int c = pick[static_cast<std::size_t>(r)];
      const int j = c % n;
      const double s = c < n ? 1.0 : -1.0;  // s (y_j - x_j tau) = D
      a.row(r).head(q) = s * x.row(j);
      a(r, q) = 1.0;
      b[r] = s * y[j];
    }
    Eigen::FullPivLU<MatrixXd> lu(a);
    if (lu.rank() == q + 1) {
      const VectorXd z = lu.solve(b);
      const VectorXd tau = z.head(q);
      const double d = z[q];
      const double worst = (y - x * tau).cwiseAbs().maxCoeff();
      if (worst <= d + 1e-9 * (1.0 + std::abs(d)) && d < best.delta) {
        best.delta = d;
        best.theta = tau;
      }
    }
    int i = q;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == m - (q + 1) + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int k = i + 1; k <= q; ++k) pick[static_cast<std::size_t>(k)] = pick[static_cast<std::size_t>(k - 1)] + 1;
  }
  return best;
}

inline double midrange(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return 0.5 * (*lo + *hi);
}

inline double half_range(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return 0.5 * (*hi - *lo);
}

// Draws of the three extreme-value laws by inversion, with a generator that is
// independent of the library's streams.
struct ExtremeDraws {
  std::mt19937_64 engine;
  explicit ExtremeDraws(std::uint64_t seed) : engine(seed) {}

  double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine); }
  double open_unit() {
    double u = 0.0;
    while (u == 0.0) u = unit();
    return u;
  }
  // Psi_alpha(x) = exp(-(-x)^alpha), x < 0
  double weibull(double alpha) { return -std::pow(-std::log(open_unit()), 1.0 / alpha); }
  // Phi_alpha(x) = exp(-x^-alpha), x > 0
  double frechet(double alpha) { return std::pow(-std::log(open_unit()), -1.0 / alpha); }
  // Lambda(x) = exp(-exp(-x))
  double gumbel() { return -std::log(-std::log(open_unit())); }
};

inline double sample_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (const double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

// sup |F_hat - F| by sorting, checked on both sides of each jump.
template <class Cdf>
double ks(std::vector<double> v, Cdf cdf) {
  std::sort(v.begin(), v.end());
  const double m = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    d = std::max({d, std::abs(static_cast<double>(i + 1) / m - f), std::abs(f - static_cast<double>(i) / m)});
  }
  return d;
}

inline double ks_two(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

}  // namespace oracle
