#pragma once

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "extremile/basis.hpp"
#include "extremile/model.hpp"

namespace testing {

using namespace extremile;

// Monotone starting coefficients: intercept row carries a level plus spread.
inline CoefMatrix smooth_alpha(Eigen::Index p, std::mt19937_64& rng, double jitter = 0.1) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, 4);
  for (Eigen::Index j = 0; j < p; ++j) a(j, 0) = 1.0 + 0.5 * nd(rng);
  a(0, 1) = 1.5;
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index k = 1; k < 4; ++k) a(j, k) += jitter * nd(rng);
  return CoefMatrix(a);
}

// Design (1, U, U, ...) with response from a linear location-scale model.
inline LabeledDataset random_data(Eigen::Index n, Eigen::Index p, std::mt19937_64& rng,
                                  double noise = 1.0) {
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    double mu = 1.0;
    for (Eigen::Index j = 1; j < p; ++j) {
      X(i, j) = ud(rng);
      mu += static_cast<double>(j) * X(i, j);
    }
    y(i) = mu + noise * nd(rng);
  }
  return LabeledDataset(std::move(X), std::move(y));
}

// Midpoint-rule integral of rho_u(y - Q(u)) over (0,1).
inline double loss_quadrature(const Polynomial& q, double y, int nodes) {
  double s = 0.0;
  for (int k = 0; k < nodes; ++k) {
    const double u = (k + 0.5) / nodes;
    const double r = y - q(u);
    s += r * (u - (r < 0.0 ? 1.0 : 0.0));
  }
  return s / nodes;
}

inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Eigen::VectorXd a = x;
    Eigen::VectorXd b = x;
    a(k) += h;
    b(k) -= h;
    g(k) = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

inline double max_rel_error(const Eigen::MatrixXd& approx, const Eigen::MatrixXd& exact) {
  return (approx - exact).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff();
}

}  // namespace testing
