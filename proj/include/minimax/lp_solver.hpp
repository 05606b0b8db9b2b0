#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "minimax/core_model.hpp"

namespace minimax {

enum class VariableBound { free, nonnegative };

// minimize objective' x  subject to  constraints * x >= rhs, per-variable bounds.
struct LinearProgram {
  Vector objective;
  Matrix constraints;
  Vector rhs;
  std::vector<VariableBound> bounds;

  std::size_t variables() const noexcept { return static_cast<std::size_t>(objective.size()); }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(rhs.size()); }
  void validate() const;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(LpStatus status);

struct SimplexConfig {
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-9;
  double duality_gap_tolerance = 1e-8;
  // Consecutive degenerate pivots before switching from Dantzig to Bland pricing.
  std::size_t bland_after = 50;
  // Defaults to 50 * (rows + variables).
  std::optional<std::size_t> iteration_cap;
};

struct LpSolution {
  LpStatus status = LpStatus::iteration_limit;
  double value = 0.0;
  Vector primal;
  // One nonnegative multiplier per >= constraint, read off the final basis.
  Vector multipliers;
  // Basis of the multiplier problem: indices < rows() are constraints, the rest
  // are bound slacks (rows() + variable index) or artificials (marked npos).
  std::vector<std::size_t> basis;
  std::size_t iterations = 0;
  // A basic multiplier sits at zero or a redundant row survived: the primal
  // optimum may not be unique.
  bool degenerate = false;
};

// Constraints 0..N-1 are  x_j tau + Delta >= y_j, constraints N..2N-1 are
// -x_j tau + Delta >= -y_j. Variables are (tau_1..tau_q, Delta).
LinearProgram build_primal(const Dataset& data);

LpSolution simplex_solve(const LinearProgram& lp, const SimplexConfig& config = {});

FitResult minimax_fit_lp(const Dataset& data, const SimplexConfig& config = {});

// Same as minimax_fit_lp but also returns the raw LP solution for certification.
FitResult minimax_fit_lp(const Dataset& data, const SimplexConfig& config, LpSolution& solution);

struct DualCertificate {
  // Multipliers on the upper (u) and lower (u') constraints, aggregated per level
  // for replicated designs, per observation otherwise.
  Vector upper;
  Vector lower;
  bool grouped = false;
  double dual_value = 0.0;
  // max_j |y_j - x_j theta_hat|, recomputed from data.
  double primal_value = 0.0;
  double gap = 0.0;
  // sum_l (u_l - u'_l) v_l, one entry per parameter; zero on D*.
  Vector balance;
  // sum (u + u') - 1.
  double mass_residual = 0.0;
  double min_multiplier = 0.0;

  double max_feasibility_violation() const;
};

// Throws duality_gap when |gap| exceeds config.duality_gap_tolerance.
DualCertificate dual_certificate(const Dataset& data, const LpSolution& solution,
                                 const SimplexConfig& config = {});

}  // namespace minimax
