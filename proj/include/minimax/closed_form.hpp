#pragma once

#include <span>

#include "minimax/core_model.hpp"

namespace minimax {

// Minimiser of s -> max_j |t_j - s|: the midrange, attaining half the range.
struct MidrangeFit {
  double center = 0.0;
  double half_range = 0.0;
};

MidrangeFit midrange_fit(std::span<const double> values);

// Cofactor expansion for q <= 3, LU with partial pivoting above.
double determinant(const Matrix& m);

// |det V| <= 1e-12 * (max |v_ij|)^q.
bool is_singular(const Matrix& v);

// Solves V d = rhs as d_i = det(V with column i replaced by rhs) / det V.
// Throws singular_design carrying |det V| when V is numerically singular.
Vector solve_cramer(const Matrix& v, const Vector& rhs);

struct SquareDesignFit {
  Matrix levels;
  double det_levels = 0.0;
  GroupExtremes extremes;
  // d_i = theta_hat_i - theta_i (simulation mode) or theta_hat_i (real-data mode).
  Vector theta_offset;
  double delta_hat = 0.0;
  bool from_errors = false;
};

// Exact fit for replicated designs with as many levels as parameters. With a
// known true theta the per-level midranges of the errors are used; otherwise
// the midranges of y.
SquareDesignFit square_design_fit(const Dataset& data);

FitResult closed_form_fit(const Dataset& data);

// Least squares through the normal equations, factorised with column-pivoted QR.
FitResult lse_fit(const Dataset& data);

}  // namespace minimax
