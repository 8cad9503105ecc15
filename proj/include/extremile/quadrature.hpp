#pragma once

#include <Eigen/Dense>

namespace extremile {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Gauss-Legendre rule with `n` nodes mapped to [0,1]. Nodes are Newton-refined
/// roots of the Legendre polynomial. Throws DomainError for n < 1.
QuadratureRule gauss_legendre(int n);

}  // namespace extremile
