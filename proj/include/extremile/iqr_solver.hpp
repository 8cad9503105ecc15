#pragma once

#include <optional>

#include <Eigen/Dense>

#include "extremile/basis.hpp"
#include "extremile/iqr_kernels.hpp"
#include "extremile/model.hpp"

namespace extremile {

struct SolverConfig {
  /// Stop when ||mean score||_inf <= grad_tol * (1 + |mean loss|).
  double grad_tol = 1e-8;
  int max_iter = 200;
  double levenberg_lambda0 = 1e-4;
  double line_search_shrink = 0.5;
  int max_halvings = 30;
  /// Lower cap on |Q'(u)| in Hessian denominators.
  double derivative_floor = 1e-6;
  /// Level grid size for diagnostics.
  int quadrature_nodes = 100;
};

/// Weighted integrated check loss sum_i w_i int_0^1 rho_u(Y_i - X_i' alpha b(u)) du.
double loss(const CoefMatrix& alpha, const LabeledDataset& data, const Eigen::VectorXd& weights,
            const Basis& basis);

/// Gradient of `loss` with respect to Vec(alpha).
Eigen::VectorXd score(const CoefMatrix& alpha, const LabeledDataset& data,
                      const Eigen::VectorXd& weights, const Basis& basis);

/// Hessian of `loss`: sum_i w_i sum_{crossings u*} (b(u*) (x) X_i)(...)' / max(|Q_i'(u*)|, floor).
Eigen::MatrixXd hessian(const CoefMatrix& alpha, const LabeledDataset& data,
                        const Eigen::VectorXd& weights, const Basis& basis,
                        double derivative_floor = 1e-6);

/// Starting point: least-squares coefficients on the constant level function
/// and the residual scale on the centered linear level function of the
/// intercept row, so the initial quantile curves are strictly increasing.
CoefMatrix initial_alpha(const LabeledDataset& data, const Basis& basis);

/// Damped Newton minimization of the weighted loss. Non-convergence is reported
/// through FitResult::converged rather than thrown.
FitResult solve(const LabeledDataset& data, const Eigen::VectorXd& weights, const Basis& basis,
                const SolverConfig& config = {},
                const std::optional<CoefMatrix>& alpha_init = std::nullopt);

}  // namespace extremile
