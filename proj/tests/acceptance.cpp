// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "minimax/cli.hpp"
#include "minimax/closed_form.hpp"
#include "minimax/evt.hpp"
#include "minimax/lp_solver.hpp"
#include "minimax/report.hpp"
#include "minimax/simulation.hpp"
#include "oracles.hpp"

using namespace minimax;

namespace {

constexpr std::uint64_t kSeed = 20240917;

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

ErrorModel pick_model(std::mt19937_64& rng) {
  switch (rng() % 5) {
    case 0: return ErrorModel::uniform();
    case 1: return ErrorModel::laplace();
    case 2: return ErrorModel::gaussian();
    case 3: return ErrorModel::bounded_power(0.5);
    default: return ErrorModel::pareto(3.0);
  }
}

Vector draw(const ErrorModel& m, std::size_t count, std::uint64_t stream) {
  const auto v = sample(m, count, stream);
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + rng() % (hi - lo + 1);
}

// Random k x q level matrix with an intercept column, distinct rows and full row rank.
Matrix random_levels(std::mt19937_64& rng, Eigen::Index k, Eigen::Index q) {
  while (true) {
    Matrix v(k, q);
    for (Eigen::Index r = 0; r < k; ++r) {
      v(r, 0) = 1.0;
      for (Eigen::Index c = 1; c < q; ++c) v(r, c) = uniform(rng, -2.0, 2.0);
    }
    if (q == 1 && k == 1) return v;
    Eigen::JacobiSVD<Matrix> svd(v);
    const auto s = svd.singularValues();
    if (s.size() == k && s[k - 1] > 0.1 * s[0]) return v;
  }
}

double max_abs(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

// 1. Location model: LP equals the midrange fit.
Verdict exact_identity() {
  std::mt19937_64 rng(kSeed + 1);
  double worst_theta = 0.0, worst_delta = 0.0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    const auto n = pick(rng, 1, 200);
    const auto model = pick_model(rng);
    const double theta = uniform(rng, -5.0, 5.0);
    const Vector y = Vector::Constant(static_cast<Eigen::Index>(n), theta) +
                     draw(model, n, derive_stream(kSeed, {1, t}));
    const auto fit = minimax_fit_lp(Dataset(Design(Matrix::Ones(y.size(), 1)), y));
    const std::vector<double> ys(y.data(), y.data() + y.size());
    worst_theta = std::max(worst_theta, std::abs(fit.theta_hat[0] - oracle::midrange(ys)));
    worst_delta = std::max(worst_delta, std::abs(fit.delta_hat - oracle::half_range(ys)));
  }
  return {worst_theta <= 1e-10 && worst_delta <= 1e-10,
          "1000 datasets, max |theta - midrange| = " + fmt(worst_theta) +
              ", max |delta - half range| = " + fmt(worst_delta) + " (tol 1e-10)"};
}

// 2. Strong duality and dual feasibility.
Verdict duality() {
  std::mt19937_64 rng(kSeed + 2);
  std::normal_distribution<double> z;
  double worst_gap = 0.0, worst_feas = 0.0;
  std::size_t errors = 0;
  for (std::uint64_t t = 0; t < 500; ++t) {
    const auto q = static_cast<Eigen::Index>(pick(rng, 1, 5));
    const auto model = pick_model(rng);
    std::optional<Dataset> data;
    if (t % 3 == 2) {
      const auto k = static_cast<Eigen::Index>(pick(rng, 1, static_cast<std::size_t>(q)));
      const auto n = pick(rng, 2, 200 / static_cast<std::size_t>(k));
      const ReplicatedDesign design(random_levels(rng, k, q), n);
      data.emplace(design, draw(model, design.observations(), derive_stream(kSeed, {2, t})));
    } else {
      const auto n = static_cast<Eigen::Index>(pick(rng, static_cast<std::size_t>(q) + 2, 200));
      Matrix x(n, q);
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index c = 0; c < q; ++c) x(j, c) = (c == 0 && t % 2 == 0) ? 1.0 : z(rng);
      data.emplace(Design(x), draw(model, static_cast<std::size_t>(n), derive_stream(kSeed, {2, t})));
    }
    try {
      LpSolution sol;
      minimax_fit_lp(*data, {}, sol);
      const auto cert = dual_certificate(*data, sol);
      worst_gap = std::max(worst_gap, std::abs(cert.gap));
      worst_feas = std::max(worst_feas, cert.max_feasibility_violation());
    } catch (const Error&) {
      ++errors;
    }
  }
  return {errors == 0 && worst_gap <= 1e-8 && worst_feas <= 1e-8,
          "500 instances, max gap = " + fmt(worst_gap) + ", max D* violation = " + fmt(worst_feas) +
              ", failures = " + std::to_string(errors) + " (tol 1e-8)"};
}

// 3. LP against the closed form and against vertex enumeration.
Verdict oracle_equivalence() {
  std::mt19937_64 rng(kSeed + 3);
  double delta_gap = 0.0, theta_gap = 0.0, brute_gap = 0.0;
  std::size_t compared = 0, brute = 0, errors = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const auto q = static_cast<Eigen::Index>(pick(rng, 1, 4));
    const bool small = q <= 2 && t % 2 == 0;
    const auto n = small ? pick(rng, 1, 12 / static_cast<std::size_t>(q)) : pick(rng, 1, 100);
    const Matrix v = random_levels(rng, q, q);
    Vector theta(q);
    for (Eigen::Index i = 0; i < q; ++i) theta[i] = uniform(rng, -3.0, 3.0);
    const auto model = pick_model(rng);
    const ReplicatedDesign design(v, n);
    const Vector y = design.expand().rows() * theta + draw(model, design.observations(), derive_stream(kSeed, {3, t}));
    const Dataset data(design, y, theta);
    try {
      const auto lp = minimax_fit_lp(data);
      const auto cf = closed_form_fit(data);
      delta_gap = std::max(delta_gap, std::abs(lp.delta_hat - cf.delta_hat));
      if (!lp.diagnostics.nonunique_suspected) {
        ++compared;
        theta_gap = std::max(theta_gap, max_abs(lp.theta_hat - cf.theta_hat));
      }
      if (data.observations() <= 12 && q <= 2) {
        ++brute;
        const auto truth = oracle::brute_force_chebyshev(data.design().rows(), y);
        brute_gap = std::max({brute_gap, std::abs(lp.delta_hat - truth.delta),
                              std::abs(lp.diagnostics.recomputed_delta - truth.delta)});
      }
    } catch (const Error&) {
      ++errors;
    }
  }
  return {errors == 0 && delta_gap <= 1e-8 && theta_gap <= 1e-8 && brute_gap <= 1e-8 && brute > 0,
          "200 instances, max |delta gap| = " + fmt(delta_gap) + ", max theta gap = " + fmt(theta_gap) +
              " over " + std::to_string(compared) + " unflagged, enumeration gap = " + fmt(brute_gap) +
              " over " + std::to_string(brute) + " small instances (tol 1e-8)"};
}

// 4. Half-range bounds.
Verdict bounds() {
  std::mt19937_64 rng(kSeed + 4);
  std::size_t intercept_viol = 0, level_viol = 0;
  double intercept_worst = -INFINITY, level_worst = -INFINITY;
  for (std::uint64_t t = 0; t < 10000; ++t) {
    const auto q = static_cast<Eigen::Index>(pick(rng, 1, 4));
    const auto model = pick_model(rng);
    {
      const auto n = static_cast<Eigen::Index>(pick(rng, static_cast<std::size_t>(q) + 1, 60));
      Matrix x(n, q);
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index c = 0; c < q; ++c) x(j, c) = c == 0 ? 1.0 : uniform(rng, -2.0, 2.0);
      const Vector e = draw(model, static_cast<std::size_t>(n), derive_stream(kSeed, {4, 0, t}));
      const auto fit = minimax_fit_lp(Dataset(Design(x), x * Vector::Ones(q) + e));
      const double excess = fit.delta_hat - 0.5 * (e.maxCoeff() - e.minCoeff());
      intercept_worst = std::max(intercept_worst, excess);
      if (excess > 1e-12) ++intercept_viol;
    }
    {
      const auto k = static_cast<Eigen::Index>(pick(rng, 1, static_cast<std::size_t>(q)));
      const ReplicatedDesign design(random_levels(rng, k, q), pick(rng, 2, 30));
      const Vector e = draw(model, design.observations(), derive_stream(kSeed, {4, 1, t}));
      const auto fit = minimax_fit_lp(Dataset(design, design.expand().rows() * Vector::Ones(q) + e));
      const auto n = static_cast<Eigen::Index>(design.replications());
      double max_range = 0.0;
      for (Eigen::Index l = 0; l < k; ++l) {
        const auto seg = e.segment(l * n, n);
        max_range = std::max(max_range, seg.maxCoeff() - seg.minCoeff());
      }
      const double excess = fit.delta_hat - 0.5 * max_range;
      level_worst = std::max(level_worst, excess);
      if (excess > 1e-12) ++level_viol;
    }
  }
  return {intercept_viol == 0 && level_viol == 0,
          "10^4 + 10^4 replications, violations " + std::to_string(intercept_viol) + " / " +
              std::to_string(level_viol) + ", worst excess " + fmt(intercept_worst) + " / " +
              fmt(level_worst) + " (slack 1e-12)"};
}

ExperimentConfig two_level_config() {
  ExperimentConfig c;
  c.model = ErrorModel::uniform();
  c.levels.resize(2, 2);
  c.levels << 1, 0, 1, 1;
  c.theta.resize(2);
  c.theta << 0.5, -1.0;
  c.n_ladder = {2000};
  c.replications = 2000;
  c.seed = kSeed;
  c.methods = {Method::lp, Method::closed_form};
  c.reference_draws = 1'000'000;
  return c;
}

// 5. Law of n(1 - Delta_hat) for uniform errors.
Verdict uniform_delta(const SimulationReport& report) {
  const auto& run = report.points[0].run(Method::lp);
  std::vector<double> stat(run.delta);
  const double n = static_cast<double>(report.points[0].n);
  for (auto& v : stat) v = n * (1.0 - v);
  const double d = oracle::ks(stat, [](double x) { return x <= 0 ? 0.0 : 1.0 - (1 + x) * (1 + x) * std::exp(-2 * x); });
  return {d <= 0.05 && run.delta.size() == 2000,
          "KS = " + fmt(d) + " over " + std::to_string(run.delta.size()) + " replications (tol 0.05)"};
}

// 6. Slope coefficient law against direct simulation.
Verdict coefficient_law(const SimulationReport& report) {
  const auto& run = report.points[0].run(Method::closed_form);
  const double v1 = report.config.levels(0, 1), v2 = report.config.levels(1, 1);
  oracle::ExtremeDraws g(kSeed + 6);
  std::vector<double> reference(1'000'000);
  for (auto& x : reference) {
    const double z1 = g.weibull(1), z1p = g.weibull(1), z2 = g.weibull(1), z2p = g.weibull(1);
    x = (z2 - z2p - z1 + z1p) / (v2 - v1);
  }
  const double d = oracle::ks_two(run.theta_stat[1], reference);
  return {d <= 0.05, "two-sample KS = " + fmt(d) + " vs 10^6 reference draws (tol 0.05)"};
}

double log_median_slope(const SimulationReport& report, Method m, std::size_t i) {
  std::vector<double> x, y;
  for (const auto& p : report.points) {
    std::vector<double> err(p.run(m).theta_error[i]);
    for (auto& v : err) v = std::abs(v);
    std::sort(err.begin(), err.end());
    const std::size_t s = err.size();
    const double med = s % 2 ? err[s / 2] : 0.5 * (err[s / 2 - 1] + err[s / 2]);
    x.push_back(std::log(static_cast<double>(p.n)));
    y.push_back(std::log(med));
  }
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  return sxy / sxx;
}

// 7. Convergence rates, and non-consistency under Laplace errors.
Verdict rates() {
  auto c = two_level_config();
  c.n_ladder = {250, 500, 1000, 2000, 4000};
  c.replications = 1000;
  c.methods = {Method::lp, Method::lse};
  c.reference_draws = 0;
  const auto report = run_experiment(c);
  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < 2; ++i) {
    const double mme = log_median_slope(report, Method::lp, i);
    const double lse = log_median_slope(report, Method::lse, i);
    pass = pass && mme >= -1.15 && mme <= -0.85 && lse >= -0.65 && lse <= -0.35;
    detail += "theta" + std::to_string(i + 1) + " slopes MME " + fmt(mme) + ", LSE " + fmt(lse) + "; ";
  }

  ExperimentConfig loc;
  loc.model = ErrorModel::laplace();
  loc.levels = Matrix::Ones(1, 1);
  loc.theta = Vector::Constant(1, 2.0);
  loc.n_ladder = c.n_ladder;
  loc.replications = 1000;
  loc.seed = kSeed + 7;
  loc.methods = {Method::lp};
  loc.reference_draws = 0;
  const auto laplace = run_experiment(loc);
  const double slope = log_median_slope(laplace, Method::lp, 0);
  // theta_hat - theta = Q_N and b_N = 1, so theta_stat holds 2 Q_N.
  const auto& last = laplace.points.back().run(Method::lp);
  const double ks = oracle::ks(last.theta_stat[0], [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  pass = pass && slope >= -0.1 && slope <= 0.1 && ks <= 0.05;
  detail += "Laplace location slope " + fmt(slope) + ", KS(2Q_N, logistic) = " + fmt(ks) +
            " (bands [-1.15,-0.85], [-0.65,-0.35], [-0.1,0.1], KS tol 0.05)";
  return {pass, detail};
}

// 8. Range and midrange limit laws from single samples.
Verdict range_midrange() {
  bool pass = true;
  std::string detail;
  const std::size_t n = 10000, reps = 10000;
  std::uint64_t family_id = 0;
  for (const auto& model : {ErrorModel::uniform(), ErrorModel::laplace()}) {
    ++family_id;
    const auto nc = norming_constants(model, n);
    std::vector<double> range_stat(reps), mid_stat(reps);
    std::vector<double> buf(n);
    for (std::uint64_t r = 0; r < reps; ++r) {
      RandomStream stream(derive_stream(kSeed, {8, family_id, r}));
      sample_into(model, buf, stream);
      const auto [lo, hi] = std::minmax_element(buf.begin(), buf.end());
      range_stat[r] = nc.scale * ((*hi - *lo) - 2.0 * nc.location);
      mid_stat[r] = 2.0 * nc.scale * 0.5 * (*hi + *lo);
    }
    const auto g = model.attraction();
    std::function<double(double)> sum_cdf, diff_cdf;
    if (model.family() == Family::uniform_symmetric) {
      // -(zeta + zeta') ~ Gamma(2, 1); zeta - zeta' ~ standard Laplace.
      sum_cdf = [](double x) { return x >= 0 ? 1.0 : (1.0 - x) * std::exp(x); };
      diff_cdf = [](double x) { return x < 0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x); };
    } else {
      // Gumbel: sum law 2 e^{-x/2} K_1(2 e^{-x/2}); difference law logistic.
      sum_cdf = [](double x) {
        const double t = std::exp(-x / 2);
        return 2 * t * std::cyl_bessel_k(1.0, 2 * t);
      };
      diff_cdf = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    }
    const double ks_r = oracle::ks(range_stat, sum_cdf);
    const double ks_q = oracle::ks(mid_stat, diff_cdf);
    // Same statistics against the library's quadrature-backed laws.
    const double lib_r = ks_distance(range_stat, LimitLaw::sum(g));
    const double lib_q = ks_distance(mid_stat, LimitLaw::midrange_diff(g));
    pass = pass && ks_r <= 0.05 && ks_q <= 0.05 && lib_r <= 0.05 && lib_q <= 0.05;
    detail += model.name() + ": KS range " + fmt(ks_r) + " (library " + fmt(lib_r) + "), KS midrange " +
              fmt(ks_q) + " (library " + fmt(lib_q) + "); ";
  }
  detail += "n = 10^4, M = 10^4, tol 0.05";
  return {pass, detail};
}

// 9. Covariance of the scaled coefficient errors.
Verdict covariance() {
  oracle::ExtremeDraws g(kSeed + 9);
  std::vector<double> draws(1'000'000);
  for (auto& x : draws) x = g.weibull(1.0);
  const double sample_var = oracle::sample_variance(draws);
  const auto sigma2 = variance_of_G(AttractionType::weibull(1.0));
  const bool variance_ok = sigma2 && std::abs(*sigma2 - 1.0) < 1e-12 && std::abs(sample_var - 1.0) < 0.01;

  ExperimentConfig c;
  c.model = ErrorModel::uniform();
  c.levels = Matrix::Identity(2, 2);
  c.theta = Vector::Zero(2);
  c.theta << 1.0, -1.0;
  c.n_ladder = {5000};
  c.replications = 5000;
  c.seed = kSeed + 9;
  c.methods = {Method::closed_form};
  c.reference_draws = 0;
  const auto report = run_experiment(c);
  const auto& stat = report.points[0].run(Method::closed_form).theta_stat;
  const double m = static_cast<double>(stat[0].size());
  Matrix cov = Matrix::Zero(2, 2);
  Vector mean = Vector::Zero(2);
  for (std::size_t r = 0; r < stat[0].size(); ++r) {
    mean[0] += stat[0][r];
    mean[1] += stat[1][r];
  }
  mean /= m;
  for (std::size_t r = 0; r < stat[0].size(); ++r) {
    Vector d(2);
    d << stat[0][r] - mean[0], stat[1][r] - mean[1];
    cov += d * d.transpose();
  }
  cov /= (m - 1);
  const Matrix target = 2.0 * *sigma2 * (c.levels.transpose() * c.levels).inverse();
  const double rel = (cov - target).norm() / target.norm();
  return {variance_ok && rel <= 0.15,
          "sigma_G^2 = " + fmt(*sigma2) + " (sample " + fmt(sample_var) + "), Frobenius relative deviation " +
              fmt(rel) + " (tol 0.15)"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// 10. Byte-identical reports on repeated runs.
Verdict reproducibility(const SimulationReport& first) {
  auto c = two_level_config();
  c.threads = 2;
  const std::string a = report_to_json(first).dump(2);
  const std::string b = report_to_json(run_experiment(c)).dump(2);
  bool pass = a == b;

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "minimax_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "exp.cfg") << "[model]\nfamily = laplace\n[design]\nV = 1, -1, 1, 2\ntheta = 1, 1\n"
                                    "n_ladder = 100, 400\n[run]\nM = 300\nseed = 99\n"
                                    "methods = lp, closed, lse\nreference_draws = 20000\n";
  std::ostringstream log;
  int rc = cli::cmd_simulate({dir / "exp.cfg", dir / "one.json"}, log);
  rc |= cli::cmd_simulate({dir / "exp.cfg", dir / "two.json"}, log);
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind("one.", 0) != 0) continue;
    ++compared;
    pass = pass && slurp(e.path()) == slurp(dir / ("two." + name.substr(4)));
  }
  fs::remove_all(dir);
  pass = pass && rc == 0 && compared > 1;
  return {pass, "report JSON identical across repeat with 2 threads: " + std::string(a == b ? "yes" : "no") +
                    "; CLI outputs compared byte-for-byte: " + std::to_string(compared)};
}

}  // namespace

int main() {
  int failures = 0;
  auto run = [&](int id, const char* name, const std::function<Verdict()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = body();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failures;
    std::printf("criterion %d %s: %s  %s [%.1f s]\n", id, name, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
  };

  run(1, "location identity", exact_identity);
  run(2, "duality", duality);
  run(3, "oracle equivalence", oracle_equivalence);
  run(4, "half-range bounds", bounds);

  std::optional<SimulationReport> shared;
  const auto start = std::chrono::steady_clock::now();
  try {
    shared = run_experiment(two_level_config());
  } catch (const std::exception& e) {
    std::printf("shared uniform run failed: %s\n", e.what());
  }
  std::printf("(shared uniform run n = 2000, M = 2000: %.1f s)\n",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  auto with_report = [&](Verdict (*f)(const SimulationReport&)) {
    return [&, f]() { return shared ? f(*shared) : Verdict{false, "no report"}; };
  };
  run(5, "uniform delta law", with_report(uniform_delta));
  run(6, "slope coefficient law", with_report(coefficient_law));
  run(7, "rates", rates);
  run(8, "range and midrange laws", range_midrange);
  run(9, "covariance", covariance);
  run(10, "reproducibility", with_report(reproducibility));

  std::printf("%s: %d of 10 criteria failed\n", failures == 0 ? "PASS" : "FAIL", failures);
  return failures == 0 ? 0 : 1;
}
