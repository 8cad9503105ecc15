#pragma once

#include <vector>

#include <Eigen/Dense>

#include "extremile/extremile_measure.hpp"
#include "extremile/model.hpp"

namespace extremile {

struct KernelConfig {
  /// One bandwidth per non-constant design column. Empty selects the rule of thumb.
  std::vector<double> bandwidths;
  bool clip = true;
  /// Exclude observation i from its own conditional CDF estimate.
  bool leave_one_out = false;
};

/// h_j = 1.06 * sd_j * n^(-1/5) for each listed column.
std::vector<double> rule_of_thumb_bandwidths(const Eigen::MatrixXd& X,
                                             const std::vector<Eigen::Index>& columns);

/// Nadaraya-Watson estimate of P(Y <= y | X = x) with a Gaussian product kernel
/// over the non-constant design columns, clipped into [1/(n+1), n/(n+1)].
double nw_cdf(const LabeledDataset& data, const Eigen::Ref<const Eigen::RowVectorXd>& x, double y,
              const KernelConfig& k = {});

/// F_hat(Y_i | X_i) for every training row.
Eigen::VectorXd nw_cdf_at_data(const LabeledDataset& data, const KernelConfig& k = {});

/// argmin_beta sum_i J_tau(F_i) (Y_i - X_i' beta)^2 in closed form.
Eigen::VectorXd fit_oe(const LabeledDataset& data, const ExtremileOrder& order,
                       const Eigen::VectorXd& cdf_values);
Eigen::VectorXd fit_oe(const LabeledDataset& data, const ExtremileOrder& order,
                       const KernelConfig& k = {});

}  // namespace extremile
