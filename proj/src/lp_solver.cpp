#include "minimax/lp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace minimax {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

void LinearProgram::validate() const {
  const auto n = objective.size();
  if (n < 1) throw Error(ErrorCode::empty_input, "linear program has no variables");
  if (constraints.cols() != n || constraints.rows() != rhs.size() ||
      static_cast<Eigen::Index>(bounds.size()) != n) {
    throw Error(ErrorCode::dimension_mismatch, "linear program dimensions are inconsistent");
  }
  if (!objective.allFinite() || !constraints.allFinite() || !rhs.allFinite()) {
    throw Error(ErrorCode::invalid_parameter, "linear program has non-finite coefficients");
  }
}

LinearProgram build_primal(const Dataset& data) {
  const auto n_obs = static_cast<Eigen::Index>(data.observations());
  const auto q = static_cast<Eigen::Index>(data.parameters());
  const Matrix& x = data.design().rows();

  LinearProgram lp;
  lp.objective = Vector::Zero(q + 1);
  lp.objective[q] = 1.0;
  lp.constraints.resize(2 * n_obs, q + 1);
  lp.constraints.topLeftCorner(n_obs, q) = x;
  lp.constraints.bottomLeftCorner(n_obs, q) = -x;
  lp.constraints.col(q).setOnes();
  lp.rhs.resize(2 * n_obs);
  lp.rhs.head(n_obs) = data.y();
  lp.rhs.tail(n_obs) = -data.y();
  lp.bounds.assign(static_cast<std::size_t>(q), VariableBound::free);
  lp.bounds.push_back(VariableBound::nonnegative);
  return lp;
}

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

// Revised simplex on the multiplier problem of
//   min c'x  s.t.  A x >= b,  x_j free or >= 0,
// which in standard form reads
//   min -b'w  s.t.  sigma_j (A'_j w + s_j) = sigma_j c_j,  w, s >= 0,
// with one row per primal variable (slack s_j only for nonnegative x_j) and
// sigma_j = sign(c_j) so the right-hand side is nonnegative. The basis has as
// many rows as the primal has variables, which keeps every factorisation tiny
// regardless of the number of constraints. At optimality the simplex
// multipliers pi give the primal point x = -sigma * pi.
class MultiplierSimplex {
 public:
  MultiplierSimplex(const LinearProgram& lp, const SimplexConfig& config)
      : lp_(lp),
        config_(config),
        m_(static_cast<Eigen::Index>(lp.rows())),
        n_(static_cast<Eigen::Index>(lp.variables())),
        sign_(n_),
        rhs_(n_),
        slack_of_(static_cast<std::size_t>(n_), npos) {
    for (Eigen::Index j = 0; j < n_; ++j) {
      sign_[j] = lp.objective[j] < 0.0 ? -1.0 : 1.0;
      rhs_[j] = sign_[j] * lp.objective[j];
    }
    // Column layout: [w_0..w_{m-1} | slacks | artificials].
    std::size_t next = static_cast<std::size_t>(m_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (lp.bounds[static_cast<std::size_t>(j)] == VariableBound::nonnegative) {
        slack_row_.push_back(j);
        slack_of_[static_cast<std::size_t>(j)] = next++;
      }
    }
    first_artificial_ = next;
    cap_ = config.iteration_cap.value_or(50 * (lp.rows() + lp.variables()));
  }

  LpSolution run() {
    LpSolution out;
    basis_.assign(static_cast<std::size_t>(n_), npos);
    bool needs_phase_one = false;
    for (Eigen::Index j = 0; j < n_; ++j) {
      const auto slack = slack_of_[static_cast<std::size_t>(j)];
      if (slack != npos && sign_[j] > 0.0) {
        basis_[static_cast<std::size_t>(j)] = slack;
      } else {
        basis_[static_cast<std::size_t>(j)] = first_artificial_ + static_cast<std::size_t>(j);
        needs_phase_one = needs_phase_one || rhs_[j] > 0.0;
      }
    }

    if (needs_phase_one) {
      phase_ = 1;
      const auto status = iterate();
      if (status != LpStatus::optimal) return finish(out, status);
      refactor();
      double infeasibility = 0.0;
      for (Eigen::Index i = 0; i < n_; ++i) {
        if (is_artificial(basis_[static_cast<std::size_t>(i)])) infeasibility += values_[i];
      }
      // Multiplier problem infeasible: the primal is unbounded (or infeasible).
      if (infeasibility > config_.feasibility_tolerance * std::max(1.0, rhs_.lpNorm<1>())) {
        return finish(out, LpStatus::unbounded);
      }
    }
    drive_out_artificials();

    phase_ = 2;
    const auto status = iterate();
    return finish(out, status);
  }

 private:
  bool is_artificial(std::size_t col) const { return col != npos && col >= first_artificial_; }

  double cost(std::size_t col) const {
    if (phase_ == 1) return is_artificial(col) ? 1.0 : 0.0;
    if (col < static_cast<std::size_t>(m_)) return -lp_.rhs[static_cast<Eigen::Index>(col)];
    return 0.0;
  }

  // Column of the sign-adjusted standard-form matrix.
  Vector column(std::size_t col) const {
    Vector out = Vector::Zero(n_);
    if (col < static_cast<std::size_t>(m_)) {
      out = lp_.constraints.row(static_cast<Eigen::Index>(col)).transpose().cwiseProduct(sign_);
    } else if (is_artificial(col)) {
      out[static_cast<Eigen::Index>(col - first_artificial_)] = 1.0;
    } else {
      const auto row = slack_row_[col - static_cast<std::size_t>(m_)];
      out[row] = sign_[row];
    }
    return out;
  }

  void refactor() {
    Matrix basis_matrix(n_, n_);
    Vector basic_costs(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      basis_matrix.col(i) = column(basis_[static_cast<std::size_t>(i)]);
      basic_costs[i] = cost(basis_[static_cast<std::size_t>(i)]);
    }
    lu_ = basis_matrix.partialPivLu();
    values_ = lu_.solve(rhs_);
    prices_ = basis_matrix.transpose().partialPivLu().solve(basic_costs);
  }

  // Reduced costs of every constraint multiplier: cost_r - (A (sigma*pi))_r.
  Vector constraint_reduced_costs() const {
    const Vector scaled = prices_.cwiseProduct(sign_);
    if (phase_ == 1) return -(lp_.constraints * scaled);
    return -lp_.rhs - lp_.constraints * scaled;
  }

  LpStatus iterate() {
    std::vector<char> in_basis(first_artificial_ + static_cast<std::size_t>(n_), 0);
    std::size_t degenerate_run = 0;
    bool bland = false;
    while (true) {
      refactor();
      std::fill(in_basis.begin(), in_basis.end(), 0);
      for (const auto col : basis_) in_basis[col] = 1;

      // Pricing over constraint multipliers, then bound slacks. Artificials
      // never re-enter.
      const Vector reduced = constraint_reduced_costs();
      std::size_t entering = npos;
      double best = -config_.optimality_tolerance;
      for (Eigen::Index r = 0; r < m_; ++r) {
        const auto col = static_cast<std::size_t>(r);
        if (in_basis[col]) continue;
        const double d = reduced[r];
        if (d < best) {
          entering = col;
          if (bland) break;
          best = d;
        }
      }
      if (entering == npos || !bland) {
        for (std::size_t s = 0; s < slack_row_.size(); ++s) {
          const auto col = static_cast<std::size_t>(m_) + s;
          if (in_basis[col]) continue;
          const auto row = slack_row_[s];
          const double d = cost(col) - prices_[row] * sign_[row];
          if (d < best) {
            entering = col;
            if (bland) break;
            best = d;
          }
        }
      }
      if (entering == npos) return LpStatus::optimal;

      if (iterations_ >= cap_) return LpStatus::iteration_limit;
      ++iterations_;

      const Vector direction = lu_.solve(column(entering));
      const double pivot_tol = config_.feasibility_tolerance;
      Eigen::Index leaving = -1;
      // Basic artificials left over from phase 1 are pinned at zero.
      if (phase_ == 2) {
        for (Eigen::Index i = 0; i < n_; ++i) {
          if (is_artificial(basis_[static_cast<std::size_t>(i)]) &&
              std::abs(direction[i]) > pivot_tol) {
            leaving = i;
            break;
          }
        }
      }
      double step = 0.0;
      if (leaving < 0) {
        // Harris-style two-pass ratio test: bound the step with a small
        // feasibility allowance, then take the largest pivot among candidates.
        double bound = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n_; ++i) {
          if (direction[i] > pivot_tol) {
            bound = std::min(bound, (std::max(values_[i], 0.0) + config_.feasibility_tolerance) /
                                        direction[i]);
          }
        }
        if (!std::isfinite(bound)) return LpStatus::infeasible;
        double best_pivot = 0.0;
        for (Eigen::Index i = 0; i < n_; ++i) {
          if (direction[i] <= pivot_tol) continue;
          const double ratio = std::max(values_[i], 0.0) / direction[i];
          if (ratio > bound) continue;
          if (bland) {
            if (leaving < 0 || basis_[static_cast<std::size_t>(i)] <
                                   basis_[static_cast<std::size_t>(leaving)]) {
              leaving = i;
              step = ratio;
            }
          } else if (direction[i] > best_pivot) {
            best_pivot = direction[i];
            leaving = i;
            step = ratio;
          }
        }
      }

      basis_[static_cast<std::size_t>(leaving)] = entering;
      if (step <= config_.feasibility_tolerance) {
        if (++degenerate_run >= config_.bland_after) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

  // Replace zero-level artificials by structural columns where the row allows it.
  void drive_out_artificials() {
    refactor();
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (!is_artificial(basis_[static_cast<std::size_t>(i)])) continue;
      Vector unit = Vector::Zero(n_);
      unit[i] = 1.0;
      const Vector row = lu_.transpose().solve(unit);
      std::vector<char> in_basis(first_artificial_, 0);
      for (const auto col : basis_) {
        if (!is_artificial(col)) in_basis[col] = 1;
      }
      const Vector scaled = row.cwiseProduct(sign_);
      const Vector entries = lp_.constraints * scaled;
      std::size_t best_col = npos;
      double best = config_.feasibility_tolerance;
      for (Eigen::Index r = 0; r < m_; ++r) {
        if (!in_basis[static_cast<std::size_t>(r)] && std::abs(entries[r]) > best) {
          best = std::abs(entries[r]);
          best_col = static_cast<std::size_t>(r);
        }
      }
      for (std::size_t s = 0; s < slack_row_.size(); ++s) {
        const auto col = static_cast<std::size_t>(m_) + s;
        const auto srow = slack_row_[s];
        if (!in_basis[col] && std::abs(scaled[srow]) > best) {
          best = std::abs(scaled[srow]);
          best_col = col;
        }
      }
      if (best_col != npos) {
        basis_[static_cast<std::size_t>(i)] = best_col;
        refactor();
      }
    }
  }

  LpSolution& finish(LpSolution& out, LpStatus status) {
    out.status = status;
    out.iterations = iterations_;
    out.basis.clear();
    for (const auto col : basis_) out.basis.push_back(is_artificial(col) ? npos : col);
    if (status != LpStatus::optimal) return out;

    refactor();
    out.primal = -sign_.cwiseProduct(prices_);
    out.value = lp_.objective.dot(out.primal);
    out.multipliers = Vector::Zero(m_);
    out.degenerate = false;
    for (Eigen::Index i = 0; i < n_; ++i) {
      const auto col = basis_[static_cast<std::size_t>(i)];
      if (is_artificial(col)) {
        out.degenerate = true;
        continue;
      }
      if (values_[i] <= config_.feasibility_tolerance) out.degenerate = true;
      if (col < static_cast<std::size_t>(m_)) out.multipliers[static_cast<Eigen::Index>(col)] = values_[i];
    }
    return out;
  }

  const LinearProgram& lp_;
  const SimplexConfig& config_;
  Eigen::Index m_;
  Eigen::Index n_;
  Vector sign_;
  Vector rhs_;
  std::vector<std::size_t> slack_of_;
  std::vector<Eigen::Index> slack_row_;
  std::size_t first_artificial_ = 0;
  std::size_t cap_ = 0;
  std::size_t iterations_ = 0;
  int phase_ = 2;
  std::vector<std::size_t> basis_;
  Eigen::PartialPivLU<Matrix> lu_;
  Vector values_;
  Vector prices_;
};

}  // namespace

LpSolution simplex_solve(const LinearProgram& lp, const SimplexConfig& config) {
  lp.validate();
  MultiplierSimplex solver(lp, config);
  return solver.run();
}

FitResult minimax_fit_lp(const Dataset& data, const SimplexConfig& config, LpSolution& solution) {
  const auto lp = build_primal(data);
  solution = simplex_solve(lp, config);
  if (solution.status != LpStatus::optimal) {
    throw Error(ErrorCode::solver_failure,
                std::string("minimax LP terminated with status ") + to_string(solution.status));
  }
  const auto q = static_cast<Eigen::Index>(data.parameters());
  FitResult fit;
  fit.method = FitMethod::lp_primal;
  fit.theta_hat = solution.primal.head(q);
  fit.delta_hat = std::max(solution.value, 0.0);
  fit.diagnostics.iterations = solution.iterations;
  fit.diagnostics.recomputed_delta = max_abs_residual(data, fit.theta_hat);
  fit.diagnostics.duality_gap =
      std::abs(fit.diagnostics.recomputed_delta - lp.rhs.dot(solution.multipliers));
  fit.diagnostics.nonunique_suspected = solution.degenerate;
  attach_truth(data, fit);
  return fit;
}

FitResult minimax_fit_lp(const Dataset& data, const SimplexConfig& config) {
  LpSolution solution;
  return minimax_fit_lp(data, config, solution);
}

double DualCertificate::max_feasibility_violation() const {
  double worst = std::abs(mass_residual);
  if (balance.size() > 0) worst = std::max(worst, balance.cwiseAbs().maxCoeff());
  return std::max(worst, -min_multiplier);
}

DualCertificate dual_certificate(const Dataset& data, const LpSolution& solution,
                                 const SimplexConfig& config) {
  const auto n_obs = static_cast<Eigen::Index>(data.observations());
  const auto q = static_cast<Eigen::Index>(data.parameters());
  if (solution.status != LpStatus::optimal) {
    throw Error(ErrorCode::solver_failure, "dual certificate needs an optimal solution");
  }
  if (solution.multipliers.size() != 2 * n_obs || solution.primal.size() != q + 1) {
    throw Error(ErrorCode::dimension_mismatch, "solution does not belong to this dataset");
  }

  DualCertificate cert;
  const Vector upper = solution.multipliers.head(n_obs);
  const Vector lower = solution.multipliers.tail(n_obs);
  cert.min_multiplier = solution.multipliers.minCoeff();
  cert.mass_residual = solution.multipliers.sum() - 1.0;

  if (const auto& rep = data.replicated()) {
    const auto& groups = rep->group_index();
    const auto k = static_cast<Eigen::Index>(groups.groups());
    cert.grouped = true;
    cert.upper = Vector::Zero(k);
    cert.lower = Vector::Zero(k);
    for (Eigen::Index l = 0; l < k; ++l) {
      const auto begin = static_cast<Eigen::Index>(groups.begin(l));
      const auto size = static_cast<Eigen::Index>(groups.size(l));
      cert.upper[l] = upper.segment(begin, size).sum();
      cert.lower[l] = lower.segment(begin, size).sum();
    }
    const auto extremes =
        group_extremes(std::span<const double>(data.y().data(), data.y().size()), groups);
    cert.dual_value = cert.upper.dot(extremes.max) - cert.lower.dot(extremes.min);
    cert.balance = rep->levels().transpose() * (cert.upper - cert.lower);
  } else {
    cert.upper = upper;
    cert.lower = lower;
    cert.dual_value = (upper - lower).dot(data.y());
    cert.balance = data.design().rows().transpose() * (upper - lower);
  }

  cert.primal_value = max_abs_residual(data, solution.primal.head(q));
  cert.gap = cert.primal_value - cert.dual_value;
  if (std::abs(cert.gap) > config.duality_gap_tolerance) {
    throw Error(ErrorCode::duality_gap,
                "duality gap " + std::to_string(cert.gap) + " exceeds tolerance");
  }
  return cert;
}

}  // namespace minimax
