#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "minimax/error.hpp"

namespace minimax {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Regression design: N observations of q regressors, one row per observation.
class Design {
 public:
  explicit Design(Matrix rows);

  const Matrix& rows() const noexcept { return rows_; }
  std::size_t observations() const noexcept { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t parameters() const noexcept { return static_cast<std::size_t>(rows_.cols()); }

  // True when the first column is identically one (model with a constant term).
  bool has_intercept() const;

 private:
  Matrix rows_;
};

// Partition of 0..N-1 into k contiguous index ranges [offset(l), offset(l+1)).
class GroupIndex {
 public:
  explicit GroupIndex(std::vector<std::size_t> offsets);

  static GroupIndex uniform(std::size_t groups, std::size_t group_size);
  static GroupIndex single(std::size_t size);

  std::size_t groups() const noexcept { return offsets_.size() - 1; }
  std::size_t total() const noexcept { return offsets_.back(); }
  std::size_t begin(std::size_t l) const { return offsets_[l]; }
  std::size_t end(std::size_t l) const { return offsets_[l + 1]; }
  std::size_t size(std::size_t l) const { return offsets_[l + 1] - offsets_[l]; }

 private:
  std::vector<std::size_t> offsets_;
};

// k distinct level rows, each observed n times. Observations are stored level
// by level, so group l occupies rows [l*n, (l+1)*n) of the expanded design.
class ReplicatedDesign {
 public:
  ReplicatedDesign(Matrix levels, std::size_t replications);

  const Matrix& levels() const noexcept { return levels_; }
  std::size_t level_count() const noexcept { return static_cast<std::size_t>(levels_.rows()); }
  std::size_t parameters() const noexcept { return static_cast<std::size_t>(levels_.cols()); }
  std::size_t replications() const noexcept { return replications_; }
  std::size_t observations() const noexcept { return level_count() * replications_; }
  const GroupIndex& group_index() const noexcept { return groups_; }

  Design expand() const;

 private:
  Matrix levels_;
  std::size_t replications_;
  GroupIndex groups_;
};

class Dataset {
 public:
  Dataset(Design design, Vector y, std::optional<Vector> true_theta = std::nullopt);
  Dataset(ReplicatedDesign design, Vector y, std::optional<Vector> true_theta = std::nullopt);

  const Design& design() const noexcept { return design_; }
  const std::optional<ReplicatedDesign>& replicated() const noexcept { return replicated_; }
  const Vector& y() const noexcept { return y_; }
  const std::optional<Vector>& true_theta() const noexcept { return true_theta_; }

  std::size_t observations() const noexcept { return design_.observations(); }
  std::size_t parameters() const noexcept { return design_.parameters(); }

  // The error vector y - X theta. Throws theta_unknown on real data.
  Vector errors() const;

 private:
  void validate() const;

  Design design_;
  std::optional<ReplicatedDesign> replicated_;
  Vector y_;
  std::optional<Vector> true_theta_;
};

// Per-group maximum, minimum, range and midrange.
struct GroupExtremes {
  Vector max;
  Vector min;
  Vector range;
  Vector midrange;

  std::size_t groups() const noexcept { return static_cast<std::size_t>(max.size()); }
};

enum class FitMethod { lp_primal, lp_dual_value, closed_form, lse };

const char* to_string(FitMethod method);

struct FitDiagnostics {
  std::optional<double> duality_gap;
  std::size_t iterations = 0;
  // max_j |y_j - x_j theta_hat| evaluated from the data, independent of the solver.
  double recomputed_delta = 0.0;
  // gamma_l = sum_i d_i v_li, replicated designs with known theta only.
  std::optional<Vector> gamma;
  bool nonunique_suspected = false;
};

struct FitResult {
  Vector theta_hat;
  double delta_hat = 0.0;
  std::optional<Vector> d_hat;
  FitMethod method = FitMethod::lp_primal;
  FitDiagnostics diagnostics;
};

Vector residuals(const Dataset& data, const Vector& theta);

double max_abs_residual(const Dataset& data, const Vector& theta);

GroupExtremes group_extremes(std::span<const double> values, const GroupIndex& groups);

// Single-group form: Z_N, W_N, R_N, Q_N of the whole vector.
GroupExtremes group_extremes(std::span<const double> values);

// Fills d_hat and gamma from true_theta when the dataset carries it.
void attach_truth(const Dataset& data, FitResult& fit);

}  // namespace minimax
