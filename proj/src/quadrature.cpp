#include "extremile/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "extremile/error.hpp"

namespace extremile {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("quadrature needs at least one node");
  QuadratureRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Legendre recurrence for P_n(x) and P_n'(x).
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1,1] to [0,1], ascending.
    rule.nodes(i) = 0.5 * (1.0 - x);
    rule.nodes(n - 1 - i) = 0.5 * (1.0 + x);
    rule.weights(i) = 0.5 * w;
    rule.weights(n - 1 - i) = 0.5 * w;
  }
  return rule;
}

}  // namespace extremile
