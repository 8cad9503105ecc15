#include "extremile/inference.hpp"

#include <algorithm>
#include <cmath>

#include "extremile/error.hpp"
#include "extremile/iqr_kernels.hpp"
#include "extremile/quadrature.hpp"

namespace extremile {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

BreadMatrix h_hat(const CoefMatrix& alpha, const LabeledDataset& data, const Basis& basis,
                  int grid_nodes, double derivative_floor) {
  if (grid_nodes < 32) throw ConfigError("bread quadrature needs at least 32 nodes");
  if (!(derivative_floor > 0)) throw ConfigError("derivative floor must be positive");
  const Eigen::Index p = data.p();
  const Eigen::Index q = alpha.q();
  if (alpha.p() != p || q != static_cast<Eigen::Index>(basis.size())) {
    throw DataError("alpha shape does not match design and basis");
  }
  const QuadratureRule rule = gauss_legendre(grid_nodes);
  Eigen::MatrixXd B(grid_nodes, q);
  Eigen::MatrixXd dB(grid_nodes, q);
  for (int g = 0; g < grid_nodes; ++g) {
    B.row(g) = basis.eval(rule.nodes(g)).transpose();
    dB.row(g) = basis.eval_derivative(rule.nodes(g)).transpose();
  }
  // Row i of XA holds X_i' alpha, so Q_i'(u_g) = (XA dB')(i, g).
  const Eigen::MatrixXd XA = data.X() * alpha.matrix();
  const Eigen::MatrixXd slopes = XA * dB.transpose();

  const Eigen::Index n = data.n();
  const Eigen::Index blocks = (n + kernels::kBlockSize - 1) / kernels::kBlockSize;
  std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(blocks));
  std::vector<long> floored(static_cast<std::size_t>(blocks), 0);

#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    // G_i = sum_g w_g b b' / |Q'| (q x q), then H += G_i (x) x x'.
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(p * q, p * q);
    Eigen::MatrixXd G(q, q);
    long count = 0;
    const Eigen::Index end = std::min(n, (b + 1) * kernels::kBlockSize);
    for (Eigen::Index i = b * kernels::kBlockSize; i < end; ++i) {
      G.setZero();
      for (int g = 0; g < grid_nodes; ++g) {
        const double s = std::abs(slopes(i, g));
        if (s < derivative_floor) ++count;
        const double c = rule.weights(g) / std::max(s, derivative_floor);
        G.noalias() += c * B.row(g).transpose() * B.row(g);
      }
      const Eigen::RowVectorXd x = data.X().row(i);
      const Eigen::MatrixXd xx = x.transpose() * x;
      for (Eigen::Index l = 0; l < q; ++l)
        for (Eigen::Index k = 0; k < q; ++k) acc.block(k * p, l * p, p, p) += G(k, l) * xx;
    }
    partial[static_cast<std::size_t>(b)] = std::move(acc);
    floored[static_cast<std::size_t>(b)] = count;
  }

  BreadMatrix out{Eigen::MatrixXd::Zero(p * q, p * q), 0.0};
  long total_floored = 0;
  for (std::size_t b = 0; b < partial.size(); ++b) {
    out.H += partial[b];
    total_floored += floored[b];
  }
  out.H = symmetrize(out.H / static_cast<double>(n));
  out.floored_fraction =
      static_cast<double>(total_floored) / (static_cast<double>(n) * grid_nodes);
  return out;
}

Eigen::MatrixXd sigma_hat(const CoefMatrix& alpha, const LabeledDataset& data,
                          const Basis& basis) {
  const Eigen::MatrixXd S =
      kernels::observation_scores_parallel(alpha, data.X(), data.y(), basis);
  return symmetrize(S.transpose() * S / static_cast<double>(data.n()));
}

Eigen::MatrixXd sigma_rho_hat(const CoefMatrix& alpha, const LabeledDataset& data,
                              const Eigen::MatrixXd& labeled_Z,
                              const Eigen::MatrixXd& unlabeled_Z, const Basis& basis,
                              bool literal_unlabeled_term) {
  if (labeled_Z.rows() != data.n()) throw DataError("labeled surrogates do not match n");
  if (unlabeled_Z.rows() == 0) return sigma_hat(alpha, data, basis);
  if (unlabeled_Z.cols() != labeled_Z.cols()) {
    throw DataError("labeled and unlabeled surrogates differ in dimension");
  }
  const auto n = static_cast<double>(data.n());
  const auto N = static_cast<double>(unlabeled_Z.rows());
  const Eigen::MatrixXd S =
      kernels::observation_scores_parallel(alpha, data.X(), data.y(), basis);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(labeled_Z.transpose() * labeled_Z);
  if (qr.rank() < labeled_Z.cols()) throw DataError("surrogate Gram matrix is singular");
  const Eigen::MatrixXd A = qr.solve(labeled_Z.transpose() * S);  // d x pq

  const double c = N / (n + N);
  const Eigen::MatrixXd W = S - c * labeled_Z * A;
  const Eigen::MatrixXd V = c * unlabeled_Z * A;
  const double rho = literal_unlabeled_term ? 1.0 : n / N;
  return symmetrize(W.transpose() * W / n + rho * (V.transpose() * V) / N);
}

BetaCovariance beta_covariance(const Eigen::MatrixXd& H, const Eigen::MatrixXd& meat,
                               Eigen::Index n, const ExtremileOrder& order, const Basis& basis) {
  const auto q = static_cast<Eigen::Index>(basis.size());
  if (H.rows() != H.cols() || H.rows() % q != 0 || meat.rows() != H.rows() ||
      meat.cols() != H.cols()) {
    throw DataError("bread and meat matrices have inconsistent shapes");
  }
  if (n <= 0) throw DataError("sample size must be positive");
  const Eigen::Index p = H.rows() / q;
  const Eigen::VectorXd w = weight_vector(order, basis);
  Eigen::MatrixXd Bt = Eigen::MatrixXd::Zero(p * q, p);
  for (Eigen::Index k = 0; k < q; ++k) Bt.block(k * p, 0, p, p).diagonal().setConstant(w(k));

  Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
  if (!lu.isInvertible()) {
    throw DataError(
        "bread matrix is singular; review the monotone fraction of the fitted quantile curves");
  }
  const Eigen::MatrixXd HiB = lu.solve(Bt);
  BetaCovariance out;
  out.cov = symmetrize(HiB.transpose() * meat * HiB / static_cast<double>(n));
  out.se = out.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

CovarianceReport supervised_covariance(const CoefMatrix& alpha, const LabeledDataset& data,
                                       const Basis& basis, const InferenceConfig& config) {
  CovarianceReport r;
  r.bread = h_hat(alpha, data, basis, config.grid_nodes, config.derivative_floor);
  r.meat = sigma_hat(alpha, data, basis);
  r.n = data.n();
  return r;
}

CovarianceReport semisupervised_covariance(const CoefMatrix& alpha, const LabeledDataset& data,
                                           const Eigen::MatrixXd& labeled_Z,
                                           const Eigen::MatrixXd& unlabeled_Z,
                                           const Basis& basis, const InferenceConfig& config) {
  CovarianceReport r;
  r.bread = h_hat(alpha, data, basis, config.grid_nodes, config.derivative_floor);
  r.meat = sigma_rho_hat(alpha, data, labeled_Z, unlabeled_Z, basis,
                         config.literal_unlabeled_term);
  r.semi_supervised = true;
  r.n = data.n();
  return r;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace extremile
