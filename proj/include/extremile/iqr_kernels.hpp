#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Dense>

#include "extremile/basis.hpp"
#include "extremile/model.hpp"
#include "extremile/polynomial.hpp"

namespace extremile {

struct Interval {
  double lo;
  double hi;
};

/// Levels u in [0,1] at which the quantile curve Q(u) lies strictly above the
/// response y, as sorted disjoint intervals. Sign-changing roots of Q - y are
/// kept alongside because the Hessian is supported on them.
struct CrossingSet {
  std::array<Interval, Polynomial::kMaxDegree + 1> intervals{};
  std::size_t count = 0;
  std::array<double, Polynomial::kMaxDegree> roots{};
  std::size_t root_count = 0;

  bool empty() const noexcept { return count == 0; }
  double measure() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < count; ++i) m += intervals[i].hi - intervals[i].lo;
    return m;
  }
};

CrossingSet crossing_set(const Polynomial& curve, double y);
CrossingSet crossing_set(const CoefMatrix& alpha, const Basis& basis,
                         const Eigen::Ref<const Eigen::RowVectorXd>& x, double y);

namespace kernels {

enum Parts : unsigned { kLoss = 1u, kScore = 2u, kHessian = 4u, kAll = 7u };

/// Weighted sums over observations of the integrated check loss, its gradient
/// with respect to Vec(alpha), and the Hessian (all unnormalized).
struct ObjectiveTerms {
  double loss = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd hessian;
};

struct ObjectiveInputs {
  const CoefMatrix& alpha;
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  const Eigen::VectorXd& weights;
  const Basis& basis;
  double derivative_floor = 1e-6;
};

/// Observations per accumulation block in the parallel kernel. The block
/// partition depends only on n, so results do not depend on the thread count.
inline constexpr Eigen::Index kBlockSize = 128;

/// Reference kernel: one sequential pass in observation order.
ObjectiveTerms accumulate_serial(const ObjectiveInputs& in, unsigned parts);

/// OpenMP kernel: fixed blocks summed in parallel, then combined in block order.
ObjectiveTerms accumulate_parallel(const ObjectiveInputs& in, unsigned parts);

/// Unweighted per-observation scores, one row per observation (n x pq).
Eigen::MatrixXd observation_scores_serial(const CoefMatrix& alpha, const Eigen::MatrixXd& X,
                                          const Eigen::VectorXd& y, const Basis& basis);
Eigen::MatrixXd observation_scores_parallel(const CoefMatrix& alpha, const Eigen::MatrixXd& X,
                                            const Eigen::VectorXd& y, const Basis& basis);

}  // namespace kernels
}  // namespace extremile
