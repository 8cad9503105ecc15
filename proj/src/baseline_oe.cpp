#include "extremile/baseline_oe.hpp"

#include <algorithm>
#include <cmath>

#include "extremile/error.hpp"
#include "extremile/estimators.hpp"

namespace extremile {

namespace {

struct KernelSetup {
  std::vector<Eigen::Index> columns;
  std::vector<double> h;
};

KernelSetup setup(const LabeledDataset& data, const KernelConfig& k) {
  KernelSetup s{nonconstant_columns(data.X()), k.bandwidths};
  if (s.h.empty()) s.h = rule_of_thumb_bandwidths(data.X(), s.columns);
  if (s.h.size() != s.columns.size()) {
    throw ConfigError("expected " + std::to_string(s.columns.size()) + " bandwidths, got " +
                      std::to_string(s.h.size()));
  }
  for (double h : s.h) {
    if (!(h > 0) || !std::isfinite(h)) throw ConfigError("bandwidths must be positive");
  }
  return s;
}

double clip_cdf(double F, Eigen::Index n, bool clip) {
  if (!clip) return F;
  const double nn = static_cast<double>(n);
  return std::clamp(F, 1.0 / (nn + 1.0), nn / (nn + 1.0));
}

// Skips row `skip` when it is non-negative.
double nw_eval(const LabeledDataset& data, const KernelSetup& s, const double* x,
               Eigen::Index stride, double y, Eigen::Index skip) {
  double num = 0.0;
  double den = 0.0;
  const Eigen::MatrixXd& X = data.X();
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (i == skip) continue;
    double e = 0.0;
    for (std::size_t c = 0; c < s.columns.size(); ++c) {
      const Eigen::Index j = s.columns[c];
      const double d = (x[j * stride] - X(i, j)) / s.h[c];
      e += d * d;
    }
    const double kw = std::exp(-0.5 * e);
    den += kw;
    if (data.y()(i) <= y) num += kw;
  }
  if (!(den > 0.0)) {
    throw DataError("kernel weights underflow at this point; use larger bandwidths");
  }
  return num / den;
}

}  // namespace

std::vector<double> rule_of_thumb_bandwidths(const Eigen::MatrixXd& X,
                                             const std::vector<Eigen::Index>& columns) {
  const auto n = static_cast<double>(X.rows());
  std::vector<double> h;
  for (Eigen::Index j : columns) {
    const double mean = X.col(j).mean();
    const double sd =
        std::sqrt((X.col(j).array() - mean).square().sum() / std::max(n - 1.0, 1.0));
    h.push_back(1.06 * sd * std::pow(n, -0.2));
  }
  return h;
}

double nw_cdf(const LabeledDataset& data, const Eigen::Ref<const Eigen::RowVectorXd>& x, double y,
              const KernelConfig& k) {
  if (x.size() != data.p()) throw DataError("evaluation point has the wrong dimension");
  const KernelSetup s = setup(data, k);
  const Eigen::RowVectorXd xr = x;
  return clip_cdf(nw_eval(data, s, xr.data(), 1, y, -1), data.n(), k.clip);
}

Eigen::VectorXd nw_cdf_at_data(const LabeledDataset& data, const KernelConfig& k) {
  const KernelSetup s = setup(data, k);
  const Eigen::Index n = data.n();
  if (k.leave_one_out && n < 2) throw DataError("leave-one-out needs at least two rows");
  Eigen::VectorXd F(n);
  const Eigen::Index stride = data.X().outerStride();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    F(i) = clip_cdf(nw_eval(data, s, &data.X()(i, 0), stride, data.y()(i),
                            k.leave_one_out ? i : -1),
                    n, k.clip);
  }
  return F;
}

Eigen::VectorXd fit_oe(const LabeledDataset& data, const ExtremileOrder& order,
                       const Eigen::VectorXd& cdf_values) {
  if (cdf_values.size() != data.n()) throw DataError("CDF values do not match n");
  Eigen::VectorXd w(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) w(i) = order.density(cdf_values(i));
  if (!w.allFinite()) throw DataError("non-finite extremile weights; enable CDF clipping");
  const Eigen::MatrixXd& X = data.X();
  const Eigen::MatrixXd G = X.transpose() * w.asDiagonal() * X;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-14 * ldlt.vectorD().cwiseAbs().maxCoeff()) {
    throw DataError("weighted Gram matrix is singular");
  }
  return ldlt.solve(X.transpose() * w.asDiagonal() * data.y());
}

Eigen::VectorXd fit_oe(const LabeledDataset& data, const ExtremileOrder& order,
                       const KernelConfig& k) {
  return fit_oe(data, order, nw_cdf_at_data(data, k));
}

}  // namespace extremile
