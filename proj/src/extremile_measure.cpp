#include "extremile/extremile_measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "extremile/error.hpp"

namespace extremile {

namespace {

void check_unit(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError("extremile weight evaluated outside [0,1]: t=" + std::to_string(t));
  }
}

// Neumaier-compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) noexcept {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  double value() const noexcept { return sum + c; }
};

}  // namespace

ExtremileOrder::ExtremileOrder(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw DomainError("extremile order must lie in (0,1), got " + std::to_string(tau));
  }
  tau_ = std::clamp(tau, kClip, 1.0 - kClip);
  const double log_half = std::log(0.5);
  r_ = tau_ >= 0.5 ? log_half / std::log(tau_) : 1.0;
  s_ = tau_ <= 0.5 ? log_half / std::log1p(-tau_) : 1.0;
}

double ExtremileOrder::cdf(double t) const {
  check_unit(t);
  if (upper()) return std::pow(t, r_);
  return 1.0 - std::pow(1.0 - t, s_);
}

double ExtremileOrder::density(double t) const {
  check_unit(t);
  if (upper()) return r_ * std::pow(t, r_ - 1.0);
  return s_ * std::pow(1.0 - t, s_ - 1.0);
}

Eigen::VectorXd monomial_moments(const ExtremileOrder& order, int max_k) {
  if (max_k < 0) throw DomainError("monomial_moments needs max_k >= 0");
  Eigen::VectorXd m(max_k + 1);
  m(0) = 1.0;
  if (order.upper()) {
    const double r = order.r();
    for (int k = 1; k <= max_k; ++k) m(k) = r / (r + k);
  } else {
    // s * Beta(k+1, s) = k! / prod_{j=1..k} (s + j)
    const double s = order.s();
    for (int k = 1; k <= max_k; ++k) m(k) = m(k - 1) * k / (s + k);
  }
  return m;
}

Eigen::VectorXd weight_vector(const ExtremileOrder& order, const Basis& basis) {
  const Eigen::VectorXd m = monomial_moments(order, basis.max_degree());
  return basis.monomial_matrix() * m;
}

Eigen::VectorXd weight_vector_riemann(const ExtremileOrder& order, const Basis& basis,
                                      int nodes) {
  if (nodes < 16) throw DomainError("Riemann weight vector needs at least 16 nodes");
  const auto q = static_cast<Eigen::Index>(basis.size());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd b(q);
  for (int i = 1; i <= nodes; ++i) {
    const double u = static_cast<double>(i) / nodes;
    basis.eval_into(u, b.data());
    acc += order.density(u) * b;
  }
  return acc / nodes;
}

std::vector<double> discrete_weights(const ExtremileOrder& order, std::size_t n) {
  if (n == 0) throw DomainError("discrete_weights needs n >= 1");
  std::vector<double> w(n);
  const double dn = static_cast<double>(n);
  if (order.upper()) {
    double prev = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      const double cur = i == n ? 1.0 : std::pow(static_cast<double>(i) / dn, order.r());
      w[i - 1] = cur - prev;
      prev = cur;
    }
  } else {
    // Survival form (1-t)^s keeps the small tail differences accurate.
    double prev = 1.0;
    for (std::size_t i = 1; i <= n; ++i) {
      const double cur =
          i == n ? 0.0 : std::pow(static_cast<double>(n - i) / dn, order.s());
      w[i - 1] = prev - cur;
      prev = cur;
    }
  }
  return w;
}

double scalar_extremile(std::span<const double> sample, const ExtremileOrder& order) {
  if (sample.empty()) throw DataError("scalar_extremile needs a nonempty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::stable_sort(sorted.begin(), sorted.end());
  const std::vector<double> w = discrete_weights(order, sorted.size());
  CompensatedSum acc;
  for (std::size_t i = 0; i < sorted.size(); ++i) acc.add(w[i] * sorted[i]);
  return acc.value();
}

}  // namespace extremile
