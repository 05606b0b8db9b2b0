#include "minimax/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace minimax {

MidrangeFit midrange_fit(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::empty_input, "midrange of an empty sample");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {0.5 * (*hi + *lo), 0.5 * (*hi - *lo)};
}

double determinant(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::wrong_shape, "determinant needs a non-empty square matrix");
  }
  switch (m.rows()) {
    case 1: return m(0, 0);
    case 2: return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
             m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default: return m.partialPivLu().determinant();
  }
}

bool is_singular(const Matrix& v) {
  const double scale = v.cwiseAbs().maxCoeff();
  return std::abs(determinant(v)) <= 1e-12 * std::pow(scale, static_cast<double>(v.rows()));
}

Vector solve_cramer(const Matrix& v, const Vector& rhs) {
  if (v.rows() != v.cols() || v.rows() != rhs.size()) {
    throw Error(ErrorCode::wrong_shape, "Cramer's rule needs a square system");
  }
  const double det = determinant(v);
  if (is_singular(v)) {
    std::ostringstream msg;
    msg << "level matrix is singular (|det V| = " << std::abs(det) << ")";
    throw Error(ErrorCode::singular_design, msg.str());
  }
  Vector out(v.cols());
  Matrix replaced = v;
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    replaced.col(i) = rhs;
    out[i] = determinant(replaced) / det;
    replaced.col(i) = v.col(i);
  }
  return out;
}

SquareDesignFit square_design_fit(const Dataset& data) {
  const auto& rep = data.replicated();
  if (!rep) throw Error(ErrorCode::wrong_shape, "closed form needs a replicated design");
  if (rep->level_count() != rep->parameters()) {
    throw Error(ErrorCode::wrong_shape, "closed form needs k = q, got k = " +
                                            std::to_string(rep->level_count()) + ", q = " +
                                            std::to_string(rep->parameters()));
  }
  SquareDesignFit fit;
  fit.levels = rep->levels();
  fit.det_levels = determinant(fit.levels);
  fit.from_errors = data.true_theta().has_value();
  const Vector source = fit.from_errors ? data.errors() : data.y();
  fit.extremes =
      group_extremes(std::span<const double>(source.data(), source.size()), rep->group_index());
  fit.theta_offset = solve_cramer(fit.levels, fit.extremes.midrange);
  fit.delta_hat = 0.5 * fit.extremes.range.maxCoeff();
  return fit;
}

FitResult closed_form_fit(const Dataset& data) {
  const auto square = square_design_fit(data);
  FitResult fit;
  fit.method = FitMethod::closed_form;
  fit.theta_hat = square.from_errors ? Vector(*data.true_theta() + square.theta_offset)
                                     : square.theta_offset;
  fit.delta_hat = square.delta_hat;
  fit.diagnostics.recomputed_delta = max_abs_residual(data, fit.theta_hat);
  if (square.from_errors) {
    fit.d_hat = square.theta_offset;
    fit.diagnostics.gamma = square.levels * square.theta_offset;
  }
  return fit;
}

FitResult lse_fit(const Dataset& data) {
  const Matrix& x = data.design().rows();
  const Matrix gram = x.transpose() * x;
  const Vector moment = x.transpose() * data.y();
  Eigen::ColPivHouseholderQR<Matrix> qr(gram);
  qr.setThreshold(1e-12);
  if (qr.rank() < gram.cols()) {
    throw Error(ErrorCode::rank_deficient, "design has rank " + std::to_string(qr.rank()) +
                                               " < " + std::to_string(gram.cols()));
  }
  FitResult fit;
  fit.method = FitMethod::lse;
  fit.theta_hat = qr.solve(moment);
  fit.delta_hat = max_abs_residual(data, fit.theta_hat);
  fit.diagnostics.recomputed_delta = fit.delta_hat;
  attach_truth(data, fit);
  return fit;
}

}  // namespace minimax
