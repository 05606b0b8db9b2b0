#include "minimax/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace minimax {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::empty_input: return "empty_input";
    case ErrorCode::empty_group: return "empty_group";
    case ErrorCode::invalid_design: return "invalid_design";
    case ErrorCode::theta_unknown: return "theta_unknown";
    case ErrorCode::singular_design: return "singular_design";
    case ErrorCode::wrong_shape: return "wrong_shape";
    case ErrorCode::rank_deficient: return "rank_deficient";
    case ErrorCode::invalid_parameter: return "invalid_parameter";
    case ErrorCode::duality_gap: return "duality_gap";
    case ErrorCode::solver_failure: return "solver_failure";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::insufficient_data: return "insufficient_data";
  }
  return "unknown";
}

const char* to_string(FitMethod method) {
  switch (method) {
    case FitMethod::lp_primal: return "lp_primal";
    case FitMethod::lp_dual_value: return "lp_dual_value";
    case FitMethod::closed_form: return "closed_form";
    case FitMethod::lse: return "lse";
  }
  return "unknown";
}

Design::Design(Matrix rows) : rows_(std::move(rows)) {
  if (rows_.rows() < 1 || rows_.cols() < 1) {
    throw Error(ErrorCode::empty_input, "design needs at least one row and one column");
  }
  if (!rows_.allFinite()) {
    throw Error(ErrorCode::invalid_design, "design contains non-finite entries");
  }
}

bool Design::has_intercept() const {
  return (rows_.col(0).array() == 1.0).all();
}

GroupIndex::GroupIndex(std::vector<std::size_t> offsets) : offsets_(std::move(offsets)) {
  if (offsets_.size() < 2 || offsets_.front() != 0) {
    throw Error(ErrorCode::empty_input, "group index needs at least one group starting at 0");
  }
  for (std::size_t l = 0; l + 1 < offsets_.size(); ++l) {
    if (offsets_[l + 1] <= offsets_[l]) {
      throw Error(ErrorCode::empty_group, "group " + std::to_string(l) + " is empty");
    }
  }
}

GroupIndex GroupIndex::uniform(std::size_t groups, std::size_t group_size) {
  std::vector<std::size_t> offsets(groups + 1);
  for (std::size_t l = 0; l <= groups; ++l) offsets[l] = l * group_size;
  return GroupIndex(std::move(offsets));
}

GroupIndex GroupIndex::single(std::size_t size) { return GroupIndex({0, size}); }

namespace {

GroupIndex checked_uniform(const Matrix& levels, std::size_t n) {
  if (levels.rows() < 1 || levels.cols() < 1 || n < 1) {
    throw Error(ErrorCode::empty_input, "replicated design needs k >= 1, q >= 1, n >= 1");
  }
  return GroupIndex::uniform(static_cast<std::size_t>(levels.rows()), n);
}

}  // namespace

ReplicatedDesign::ReplicatedDesign(Matrix levels, std::size_t replications)
    : levels_(std::move(levels)),
      replications_(replications),
      groups_(checked_uniform(levels_, replications)) {
  if (!levels_.allFinite()) {
    throw Error(ErrorCode::invalid_design, "level matrix contains non-finite entries");
  }
  for (Eigen::Index m = 0; m < levels_.rows(); ++m) {
    for (Eigen::Index l = m + 1; l < levels_.rows(); ++l) {
      if (levels_.row(m) == levels_.row(l)) {
        throw Error(ErrorCode::invalid_design,
                    "level rows " + std::to_string(m) + " and " + std::to_string(l) + " coincide");
      }
    }
  }
}

Design ReplicatedDesign::expand() const {
  const auto n = static_cast<Eigen::Index>(replications_);
  Matrix rows(levels_.rows() * n, levels_.cols());
  for (Eigen::Index l = 0; l < levels_.rows(); ++l) {
    rows.middleRows(l * n, n).rowwise() = levels_.row(l);
  }
  return Design(std::move(rows));
}

Dataset::Dataset(Design design, Vector y, std::optional<Vector> true_theta)
    : design_(std::move(design)), y_(std::move(y)), true_theta_(std::move(true_theta)) {
  validate();
}

Dataset::Dataset(ReplicatedDesign design, Vector y, std::optional<Vector> true_theta)
    : design_(design.expand()),
      replicated_(std::move(design)),
      y_(std::move(y)),
      true_theta_(std::move(true_theta)) {
  validate();
}

void Dataset::validate() const {
  if (static_cast<std::size_t>(y_.size()) != design_.observations()) {
    throw Error(ErrorCode::dimension_mismatch,
                "response has " + std::to_string(y_.size()) + " entries, design has " +
                    std::to_string(design_.observations()) + " rows");
  }
  if (!y_.allFinite()) {
    throw Error(ErrorCode::invalid_design, "response contains non-finite entries");
  }
  if (true_theta_ && static_cast<std::size_t>(true_theta_->size()) != design_.parameters()) {
    throw Error(ErrorCode::dimension_mismatch, "true theta length does not match design columns");
  }
}

Vector Dataset::errors() const {
  if (!true_theta_) {
    throw Error(ErrorCode::theta_unknown, "true parameters unknown: errors are not observable");
  }
  return y_ - design_.rows() * *true_theta_;
}

Vector residuals(const Dataset& data, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != data.parameters()) {
    throw Error(ErrorCode::dimension_mismatch,
                "theta has " + std::to_string(theta.size()) + " entries, design has " +
                    std::to_string(data.parameters()) + " columns");
  }
  if (!theta.allFinite()) {
    throw Error(ErrorCode::invalid_parameter, "theta contains non-finite entries");
  }
  return data.y() - data.design().rows() * theta;
}

double max_abs_residual(const Dataset& data, const Vector& theta) {
  return residuals(data, theta).cwiseAbs().maxCoeff();
}

GroupExtremes group_extremes(std::span<const double> values, const GroupIndex& groups) {
  if (groups.total() != values.size()) {
    throw Error(ErrorCode::dimension_mismatch, "grouping does not partition the values");
  }
  const auto k = static_cast<Eigen::Index>(groups.groups());
  GroupExtremes out{Vector(k), Vector(k), Vector(k), Vector(k)};
  for (Eigen::Index l = 0; l < k; ++l) {
    const auto first = values.begin() + static_cast<std::ptrdiff_t>(groups.begin(l));
    const auto last = values.begin() + static_cast<std::ptrdiff_t>(groups.end(l));
    const auto [lo, hi] = std::minmax_element(first, last);
    out.max[l] = *hi;
    out.min[l] = *lo;
    out.range[l] = *hi - *lo;
    out.midrange[l] = 0.5 * (*hi + *lo);
  }
  return out;
}

GroupExtremes group_extremes(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::empty_group, "cannot take extremes of an empty sample");
  return group_extremes(values, GroupIndex::single(values.size()));
}

void attach_truth(const Dataset& data, FitResult& fit) {
  if (!data.true_theta()) return;
  Vector d = fit.theta_hat - *data.true_theta();
  if (data.replicated()) fit.diagnostics.gamma = data.replicated()->levels() * d;
  fit.d_hat = std::move(d);
}

}  // namespace minimax
