#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "extremile/basis.hpp"
#include "extremile/iqr_solver.hpp"
#include "extremile/model.hpp"

namespace extremile {

/// Surrogate features Z = (1, x~, x~^2, ..., x~^degree) built from the
/// non-constant design columns x~ with elementwise powers.
struct SurrogateFeatures {
  Eigen::MatrixXd Z;
  int degree = 1;
  /// Design columns that were raised to powers.
  std::vector<Eigen::Index> columns;
  /// Human-readable label per Z column, e.g. "1", "x2^3".
  std::vector<std::string> labels;
};

/// Non-constant columns of X (the columns that enter surrogate powers).
std::vector<Eigen::Index> nonconstant_columns(const Eigen::MatrixXd& X);

/// Builds Z for the given design columns. Throws ConfigError for degree < 1.
SurrogateFeatures build_surrogates(const Eigen::MatrixXd& X, int degree,
                                   const std::vector<Eigen::Index>& columns);
/// As above with columns = nonconstant_columns(X). When `check_rank` is set,
/// throws DataError naming a collinear column if (1/n) Z'Z is singular.
SurrogateFeatures build_surrogates(const Eigen::MatrixXd& X, int degree, bool check_rank = true);

struct SslWeights {
  Eigen::VectorXd omega;
  double sum = 0.0;
  Eigen::Index negative_count = 0;
  /// Condition number of (1/n) Z'Z on the labeled rows.
  double condition_number = 1.0;
};

/// omega_i = 1 + (N/n) Zbar_N' Sigma_Z^{-1} Z_i with Sigma_Z = (1/n) sum Z_i Z_i'
/// over labeled rows. With N = 0 every weight is exactly 1.
SslWeights ssl_weights(const Eigen::MatrixXd& labeled_Z, const Eigen::MatrixXd& unlabeled_Z);

/// Zbar_n' Sigma_Z^{-1} Zbar_n, which equals 1 whenever Z has a leading one.
double leading_one_identity(const Eigen::MatrixXd& labeled_Z);

/// Unit-weight integrated quantile regression fit.
FitResult fit_supervised(const LabeledDataset& data, const Basis& basis,
                         const SolverConfig& config = {});

struct SslFit {
  FitResult fit;
  SslWeights weights;
  SurrogateFeatures labeled_Z;
  SurrogateFeatures unlabeled_Z;
};

/// Semi-supervised fit: surrogates on both samples, omega weights, weighted solve.
SslFit fit_semisupervised(const LabeledDataset& labeled, const UnlabeledDataset& unlabeled,
                          const Basis& basis, int degree = 2, const SolverConfig& config = {});

/// Semi-supervised fit with caller-supplied surrogate matrices (leading column of ones).
SslFit fit_semisupervised(const LabeledDataset& labeled, const Eigen::MatrixXd& labeled_Z,
                          const Eigen::MatrixXd& unlabeled_Z, const Basis& basis,
                          const SolverConfig& config = {});

}  // namespace extremile
