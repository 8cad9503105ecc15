#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "extremile/polynomial.hpp"

namespace extremile {

/// Polynomial basis b(u) over quantile levels u in [0,1] that parameterizes the
/// quantile coefficient process gamma(u) = alpha * b(u).
///
/// Components are stored by monomial coefficients so that derivatives,
/// antiderivatives and moment integrals are exact polynomial operations.
/// Immutable after construction.
class Basis {
 public:
  static constexpr int kMaxDegree = 8;

  /// Throws DomainError if a component exceeds kMaxDegree or the components are
  /// linearly dependent (including duplicates), or if the list is empty.
  explicit Basis(std::vector<Polynomial> components, std::string name = "custom");

  /// Legendre polynomials P1..P3 on [0,1], optionally preceded by the constant 1.
  static Basis legendre3(bool include_constant = true);

  std::size_t size() const noexcept { return components_.size(); }
  int max_degree() const noexcept { return max_degree_; }
  const std::string& name() const noexcept { return name_; }
  const Polynomial& component(std::size_t k) const { return components_.at(k); }
  const std::vector<Polynomial>& components() const noexcept { return components_; }

  /// q x (max_degree + 1) matrix; row k holds the monomial coefficients of b_k.
  const Eigen::MatrixXd& monomial_matrix() const noexcept { return monomials_; }

  Eigen::VectorXd eval(double u) const;
  Eigen::VectorXd eval_derivative(double u) const;
  /// B(u) = integral of b over [0, u].
  Eigen::VectorXd eval_antiderivative(double u) const;

  /// Unchecked variants for hot loops; `out` must have size() entries.
  void eval_into(double u, double* out) const noexcept;
  void eval_antiderivative_into(double u, double* out) const noexcept;

  /// Exact integral of u * b(u) over [0,1].
  const Eigen::VectorXd& first_moment() const noexcept { return first_moment_; }

  /// Polynomial x' alpha b(u) for coefficient row vector `row` = alpha' x (length q).
  Polynomial combine(const double* row) const noexcept;

 private:
  std::vector<Polynomial> components_;
  std::vector<Polynomial> derivatives_;
  std::vector<Polynomial> antiderivatives_;
  Eigen::MatrixXd monomials_;
  Eigen::VectorXd first_moment_;
  std::string name_;
  int max_degree_ = 0;
};

/// Resolves a basis by configuration name: "legendre3" or "legendre3_no_const".
Basis basis_from_name(const std::string& name);

}  // namespace extremile
