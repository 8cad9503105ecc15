#pragma once

#include <vector>

#include <Eigen/Dense>

#include "extremile/basis.hpp"
#include "extremile/extremile_measure.hpp"
#include "extremile/model.hpp"

namespace extremile {

struct InferenceConfig {
  /// Gauss-Legendre nodes for the bread integral; at least 32.
  int grid_nodes = 64;
  /// Lower cap on |Q'(u)| before inversion.
  double derivative_floor = 1e-6;
  /// Drop the n/N factor on the unlabeled term of the semi-supervised meat.
  bool literal_unlabeled_term = false;
};

struct BreadMatrix {
  Eigen::MatrixXd H;
  /// Share of (observation, node) pairs where the derivative floor was applied.
  double floored_fraction = 0.0;
};

/// (1/n) sum_i int_0^1 (b(u) (x) X_i)(b(u) (x) X_i)' / max(|X_i' alpha b'(u)|, floor) du.
BreadMatrix h_hat(const CoefMatrix& alpha, const LabeledDataset& data, const Basis& basis,
                  int grid_nodes = 64, double derivative_floor = 1e-6);

/// (1/n) sum_i S_i S_i' with exact per-observation scores.
Eigen::MatrixXd sigma_hat(const CoefMatrix& alpha, const LabeledDataset& data,
                          const Basis& basis);

/// Semi-supervised meat (1/n) sum W_i W_i' + (n/N)(1/N) sum V_i V_i' where
/// W_i = S_i - c A'Z_i on labeled rows, V_i = c A'Z_i on unlabeled rows,
/// c = N/(n+N) and A = (sum Z_i Z_i')^{-1} sum Z_i S_i'. With N = 0 this is sigma_hat.
Eigen::MatrixXd sigma_rho_hat(const CoefMatrix& alpha, const LabeledDataset& data,
                              const Eigen::MatrixXd& labeled_Z,
                              const Eigen::MatrixXd& unlabeled_Z, const Basis& basis,
                              bool literal_unlabeled_term = false);

struct BetaCovariance {
  Eigen::MatrixXd cov;
  Eigen::VectorXd se;
};

/// cov = Bt' H^{-1} M H^{-1} Bt / n with Bt = (int b J_tau) (x) I_p.
/// Throws DataError when H is singular.
BetaCovariance beta_covariance(const Eigen::MatrixXd& H, const Eigen::MatrixXd& meat,
                               Eigen::Index n, const ExtremileOrder& order, const Basis& basis);

struct CovarianceReport {
  BreadMatrix bread;
  Eigen::MatrixXd meat;
  bool semi_supervised = false;
  Eigen::Index n = 0;

  BetaCovariance beta(const ExtremileOrder& order, const Basis& basis) const {
    return beta_covariance(bread.H, meat, n, order, basis);
  }
};

CovarianceReport supervised_covariance(const CoefMatrix& alpha, const LabeledDataset& data,
                                       const Basis& basis, const InferenceConfig& config = {});

CovarianceReport semisupervised_covariance(const CoefMatrix& alpha, const LabeledDataset& data,
                                           const Eigen::MatrixXd& labeled_Z,
                                           const Eigen::MatrixXd& unlabeled_Z,
                                           const Basis& basis,
                                           const InferenceConfig& config = {});

/// Smallest eigenvalue of a symmetric matrix, for PSD checks.
double min_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace extremile
