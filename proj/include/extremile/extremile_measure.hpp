#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "extremile/basis.hpp"

namespace extremile {

/// Extremile order tau with its power exponents.
///
/// For tau >= 1/2 the weight distribution is H(t) = t^r with
/// r = log(1/2) / log(tau); for tau <= 1/2 it is H(t) = 1 - (1-t)^s with
/// s = log(1/2) / log(1 - tau). Both exponents equal 1 at tau = 1/2.
/// tau is clipped into [1e-6, 1 - 1e-6] on construction.
class ExtremileOrder {
 public:
  static constexpr double kClip = 1e-6;

  /// Throws DomainError unless 0 < tau < 1.
  explicit ExtremileOrder(double tau);

  double tau() const noexcept { return tau_; }
  /// True on the max-type branch (tau >= 1/2), where H(t) = t^r.
  bool upper() const noexcept { return tau_ >= 0.5; }
  double r() const noexcept { return r_; }
  double s() const noexcept { return s_; }

  /// H_tau(t), a distribution function on [0,1].
  double cdf(double t) const;
  /// J_tau(t) = dH_tau/dt.
  double density(double t) const;

 private:
  double tau_;
  double r_;
  double s_;
};

/// m_k = integral of t^k J_tau(t) over [0,1] for k = 0..max_k, in closed form.
Eigen::VectorXd monomial_moments(const ExtremileOrder& order, int max_k);

/// Integral of b(u) J_tau(u) over [0,1], assembled exactly from monomial moments.
Eigen::VectorXd weight_vector(const ExtremileOrder& order, const Basis& basis);

/// Riemann-sum approximation (1/n) sum_i b(i/n) J_tau(i/n). Kept as a cross-check.
Eigen::VectorXd weight_vector_riemann(const ExtremileOrder& order, const Basis& basis,
                                      int nodes);

/// Order-statistic weights w_i = H(i/n) - H((i-1)/n), i = 1..n.
std::vector<double> discrete_weights(const ExtremileOrder& order, std::size_t n);

/// Sample extremile: ascending order statistics dotted with discrete_weights.
/// Throws DataError on an empty sample.
double scalar_extremile(std::span<const double> sample, const ExtremileOrder& order);

}  // namespace extremile
