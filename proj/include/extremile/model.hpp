#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "extremile/basis.hpp"
#include "extremile/extremile_measure.hpp"

namespace extremile {

/// Labeled sample (Y_i, X_i), i = 1..n. The design conventionally carries an
/// intercept column of ones. Validated on construction: n >= p >= 1, finite
/// entries, full column rank.
class LabeledDataset {
 public:
  LabeledDataset(Eigen::MatrixXd X, Eigen::VectorXd y);

  const Eigen::MatrixXd& X() const noexcept { return X_; }
  const Eigen::VectorXd& y() const noexcept { return y_; }
  Eigen::Index n() const noexcept { return X_.rows(); }
  Eigen::Index p() const noexcept { return X_.cols(); }

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
};

/// Covariate-only sample with the labeled column layout. N may be zero.
class UnlabeledDataset {
 public:
  UnlabeledDataset() = default;
  UnlabeledDataset(Eigen::MatrixXd X, Eigen::Index expected_p);

  const Eigen::MatrixXd& X() const noexcept { return X_; }
  Eigen::Index N() const noexcept { return X_.rows(); }

 private:
  Eigen::MatrixXd X_;
};

/// p x q matrix alpha with gamma(u) = alpha * b(u). Column-major storage makes
/// the flat view equal to Vec(alpha) (columns stacked).
class CoefMatrix {
 public:
  CoefMatrix() = default;
  explicit CoefMatrix(Eigen::MatrixXd alpha);
  static CoefMatrix zero(Eigen::Index p, Eigen::Index q);
  static CoefMatrix from_vec(const Eigen::VectorXd& v, Eigen::Index p, Eigen::Index q);

  const Eigen::MatrixXd& matrix() const noexcept { return alpha_; }
  Eigen::MatrixXd& matrix() noexcept { return alpha_; }
  Eigen::Index p() const noexcept { return alpha_.rows(); }
  Eigen::Index q() const noexcept { return alpha_.cols(); }
  Eigen::VectorXd vec() const;

 private:
  Eigen::MatrixXd alpha_;
};

struct FitResult {
  CoefMatrix alpha;
  /// Weighted mean integrated check loss (sum_i w_i L_i / n).
  double objective = 0.0;
  /// Infinity norm of the weighted mean score at alpha.
  double grad_inf_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Share of observations whose fitted quantile curve is strictly increasing on
  /// a 101-point level grid.
  double monotone_fraction = 0.0;
  /// True if the Newton system needed damping beyond the initial level, which
  /// happens when negative weights make the objective locally non-convex.
  bool nonconvex_detected = false;
  double final_lambda = 0.0;
  std::vector<double> objective_history;
};

struct ExtremileCoef {
  double tau = 0.5;
  Eigen::VectorXd beta;
  std::optional<Eigen::VectorXd> se;
};

/// beta_tau = alpha * integral(b J_tau). Throws DataError on a dimension mismatch.
ExtremileCoef beta_from_alpha(const CoefMatrix& alpha, const ExtremileOrder& order,
                              const Basis& basis);
inline ExtremileCoef beta_from_alpha(const FitResult& fit, const ExtremileOrder& order,
                                     const Basis& basis) {
  return beta_from_alpha(fit.alpha, order, basis);
}

/// Fitted extremiles X_new * beta.
Eigen::VectorXd predict(const ExtremileCoef& coef, const Eigen::MatrixXd& X_new);

/// Quantile curve x' alpha b(u) of one design row.
Polynomial quantile_curve(const CoefMatrix& alpha, const Basis& basis,
                          const Eigen::Ref<const Eigen::RowVectorXd>& x);

/// Share of design rows whose quantile curve has Q'(u) > 0 on `grid_points`
/// equispaced levels in [0,1].
double monotone_fraction(const CoefMatrix& alpha, const Basis& basis, const Eigen::MatrixXd& X,
                         int grid_points = 101);

}  // namespace extremile
