#include "extremile/model.hpp"

#include <string>

#include "extremile/error.hpp"

namespace extremile {

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw DataError(std::string(what) + " contains non-finite entries");
}

}  // namespace

LabeledDataset::LabeledDataset(Eigen::MatrixXd X, Eigen::VectorXd y)
    : X_(std::move(X)), y_(std::move(y)) {
  if (X_.cols() < 1) throw DataError("design needs at least one column");
  if (X_.rows() != y_.size()) {
    throw DataError("design has " + std::to_string(X_.rows()) + " rows but response has " +
                    std::to_string(y_.size()));
  }
  if (X_.rows() < X_.cols()) {
    throw DataError("labeled sample needs n >= p (n=" + std::to_string(X_.rows()) +
                    ", p=" + std::to_string(X_.cols()) + ")");
  }
  require_finite(X_, "design");
  require_finite(y_, "response");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X_);
  if (qr.rank() < X_.cols()) {
    throw DataError("design is rank deficient (rank " + std::to_string(qr.rank()) + " < p=" +
                    std::to_string(X_.cols()) + ")");
  }
}

UnlabeledDataset::UnlabeledDataset(Eigen::MatrixXd X, Eigen::Index expected_p) : X_(std::move(X)) {
  if (X_.rows() == 0) X_.resize(0, expected_p);
  if (X_.cols() != expected_p) {
    throw DataError("unlabeled design has " + std::to_string(X_.cols()) +
                    " columns, labeled has " + std::to_string(expected_p));
  }
  require_finite(X_, "unlabeled design");
}

CoefMatrix::CoefMatrix(Eigen::MatrixXd alpha) : alpha_(std::move(alpha)) {
  require_finite(alpha_, "coefficient matrix");
}

CoefMatrix CoefMatrix::zero(Eigen::Index p, Eigen::Index q) {
  return CoefMatrix(Eigen::MatrixXd::Zero(p, q));
}

CoefMatrix CoefMatrix::from_vec(const Eigen::VectorXd& v, Eigen::Index p, Eigen::Index q) {
  if (v.size() != p * q) throw DataError("Vec(alpha) length does not match p*q");
  return CoefMatrix(Eigen::Map<const Eigen::MatrixXd>(v.data(), p, q));
}

Eigen::VectorXd CoefMatrix::vec() const {
  return Eigen::Map<const Eigen::VectorXd>(alpha_.data(), alpha_.size());
}

ExtremileCoef beta_from_alpha(const CoefMatrix& alpha, const ExtremileOrder& order,
                              const Basis& basis) {
  if (alpha.q() != static_cast<Eigen::Index>(basis.size())) {
    throw DataError("coefficient matrix has " + std::to_string(alpha.q()) +
                    " columns but basis has " + std::to_string(basis.size()));
  }
  ExtremileCoef out;
  out.tau = order.tau();
  out.beta = alpha.matrix() * weight_vector(order, basis);
  return out;
}

Eigen::VectorXd predict(const ExtremileCoef& coef, const Eigen::MatrixXd& X_new) {
  if (X_new.cols() != coef.beta.size()) {
    throw DataError("prediction design has " + std::to_string(X_new.cols()) +
                    " columns, coefficients have " + std::to_string(coef.beta.size()));
  }
  return X_new * coef.beta;
}

Polynomial quantile_curve(const CoefMatrix& alpha, const Basis& basis,
                          const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const Eigen::RowVectorXd row = x * alpha.matrix();
  return basis.combine(row.data());
}

double monotone_fraction(const CoefMatrix& alpha, const Basis& basis, const Eigen::MatrixXd& X,
                         int grid_points) {
  if (X.rows() == 0) return 1.0;
  Eigen::Index monotone = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Polynomial dq = quantile_curve(alpha, basis, X.row(i)).derivative();
    bool ok = true;
    for (int g = 0; g < grid_points && ok; ++g) {
      const double u = static_cast<double>(g) / (grid_points - 1);
      ok = dq(u) > 0.0;
    }
    if (ok) ++monotone;
  }
  return static_cast<double>(monotone) / static_cast<double>(X.rows());
}

}  // namespace extremile
