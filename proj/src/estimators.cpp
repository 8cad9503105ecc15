#include "extremile/estimators.hpp"

#include <cmath>

#include "extremile/error.hpp"

namespace extremile {

namespace {

Eigen::MatrixXd gram(const Eigen::MatrixXd& Z) {
  return (Z.transpose() * Z) / static_cast<double>(Z.rows());
}

void check_leading_one(const Eigen::MatrixXd& Z, const char* which) {
  if (Z.cols() < 1 || (Z.rows() > 0 && !(Z.col(0).array() == 1.0).all())) {
    throw DataError(std::string(which) + " surrogate matrix must have a leading column of ones");
  }
}

}  // namespace

std::vector<Eigen::Index> nonconstant_columns(const Eigen::MatrixXd& X) {
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (X.rows() > 0 && !(X.col(j).array() == X(0, j)).all()) cols.push_back(j);
  }
  return cols;
}

SurrogateFeatures build_surrogates(const Eigen::MatrixXd& X, int degree,
                                   const std::vector<Eigen::Index>& columns) {
  if (degree < 1) throw ConfigError("surrogate degree must be >= 1");
  SurrogateFeatures sf;
  sf.degree = degree;
  sf.columns = columns;
  const auto m = static_cast<Eigen::Index>(columns.size());
  sf.Z.resize(X.rows(), 1 + m * degree);
  sf.Z.col(0).setOnes();
  sf.labels.push_back("1");
  for (int d = 1; d <= degree; ++d) {
    for (Eigen::Index c = 0; c < m; ++c) {
      const Eigen::Index j = columns[static_cast<std::size_t>(c)];
      if (j < 0 || j >= X.cols()) throw DataError("surrogate column index out of range");
      sf.Z.col(1 + (d - 1) * m + c) = X.col(j).array().pow(d);
      sf.labels.push_back("x" + std::to_string(j) + "^" + std::to_string(d));
    }
  }
  return sf;
}

SurrogateFeatures build_surrogates(const Eigen::MatrixXd& X, int degree, bool check_rank) {
  SurrogateFeatures sf = build_surrogates(X, degree, nonconstant_columns(X));
  if (check_rank) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sf.Z);
    if (qr.rank() < sf.Z.cols()) {
      // Columns pivoted past the rank are the ones explained by the others.
      const Eigen::Index bad = qr.colsPermutation().indices()(qr.rank());
      throw DataError("surrogate Gram matrix is singular: column " +
                      sf.labels[static_cast<std::size_t>(bad)] +
                      " is collinear with the other surrogates");
    }
  }
  return sf;
}

SslWeights ssl_weights(const Eigen::MatrixXd& labeled_Z, const Eigen::MatrixXd& unlabeled_Z) {
  check_leading_one(labeled_Z, "labeled");
  if (unlabeled_Z.rows() > 0) {
    check_leading_one(unlabeled_Z, "unlabeled");
    if (unlabeled_Z.cols() != labeled_Z.cols()) {
      throw DataError("labeled and unlabeled surrogates differ in dimension");
    }
  }
  const auto n = static_cast<double>(labeled_Z.rows());
  const auto N = static_cast<double>(unlabeled_Z.rows());
  const Eigen::MatrixXd sigma = gram(labeled_Z);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sigma);
  if (qr.rank() < sigma.cols()) throw DataError("surrogate Gram matrix is singular");

  SslWeights w;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(sigma);
  const auto& sv = svd.singularValues();
  w.condition_number = sv(0) / sv(sv.size() - 1);

  if (unlabeled_Z.rows() == 0) {
    w.omega = Eigen::VectorXd::Ones(labeled_Z.rows());
  } else {
    const Eigen::VectorXd zbar_N = unlabeled_Z.colwise().mean().transpose();
    const Eigen::VectorXd coef = qr.solve(zbar_N);
    w.omega = (1.0 + (N / n) * (labeled_Z * coef).array()).matrix();
  }
  w.sum = w.omega.sum();
  w.negative_count = (w.omega.array() < 0.0).count();
  return w;
}

double leading_one_identity(const Eigen::MatrixXd& labeled_Z) {
  const Eigen::VectorXd zbar = labeled_Z.colwise().mean().transpose();
  return zbar.dot(gram(labeled_Z).colPivHouseholderQr().solve(zbar));
}

FitResult fit_supervised(const LabeledDataset& data, const Basis& basis,
                         const SolverConfig& config) {
  return solve(data, Eigen::VectorXd::Ones(data.n()), basis, config);
}

SslFit fit_semisupervised(const LabeledDataset& labeled, const UnlabeledDataset& unlabeled,
                          const Basis& basis, int degree, const SolverConfig& config) {
  SurrogateFeatures zl = build_surrogates(labeled.X(), degree, true);
  SurrogateFeatures zu = build_surrogates(unlabeled.X(), degree, zl.columns);
  SslFit out = fit_semisupervised(labeled, zl.Z, zu.Z, basis, config);
  out.labeled_Z = std::move(zl);
  out.unlabeled_Z = std::move(zu);
  return out;
}

SslFit fit_semisupervised(const LabeledDataset& labeled, const Eigen::MatrixXd& labeled_Z,
                          const Eigen::MatrixXd& unlabeled_Z, const Basis& basis,
                          const SolverConfig& config) {
  if (labeled_Z.rows() != labeled.n()) throw DataError("labeled surrogates do not match n");
  SslFit out;
  out.weights = ssl_weights(labeled_Z, unlabeled_Z);
  out.fit = solve(labeled, out.weights.omega, basis, config);
  out.labeled_Z.Z = labeled_Z;
  out.unlabeled_Z.Z = unlabeled_Z;
  return out;
}

}  // namespace extremile
