#include "extremile/basis.hpp"

#include <algorithm>
#include <cmath>

#include "extremile/error.hpp"

namespace extremile {

namespace {

void check_unit(double u) {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw DomainError("basis evaluated outside [0,1]: u=" + std::to_string(u));
  }
}

}  // namespace

Basis::Basis(std::vector<Polynomial> components, std::string name)
    : components_(std::move(components)), name_(std::move(name)) {
  if (components_.empty()) throw DomainError("basis needs at least one component");
  for (const auto& c : components_) {
    if (c.degree() > kMaxDegree) {
      throw DomainError("basis component degree exceeds cap " + std::to_string(kMaxDegree));
    }
    for (double v : c.coefficients()) {
      if (!std::isfinite(v)) throw DomainError("basis component has a non-finite coefficient");
    }
    max_degree_ = std::max(max_degree_, c.degree());
  }

  const auto q = static_cast<Eigen::Index>(components_.size());
  monomials_ = Eigen::MatrixXd::Zero(q, max_degree_ + 1);
  for (Eigen::Index k = 0; k < q; ++k) {
    const auto& c = components_[static_cast<std::size_t>(k)];
    for (int j = 0; j <= max_degree_; ++j) monomials_(k, j) = c[static_cast<std::size_t>(j)];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(monomials_);
  lu.setThreshold(1e-12);
  if (lu.rank() < q) throw DomainError("basis components are linearly dependent");

  first_moment_.resize(q);
  for (Eigen::Index k = 0; k < q; ++k) {
    const auto& c = components_[static_cast<std::size_t>(k)];
    derivatives_.push_back(c.derivative());
    antiderivatives_.push_back(c.antiderivative());
    first_moment_(k) = c.times_u().integral(0.0, 1.0);
  }
}

Basis Basis::legendre3(bool include_constant) {
  std::vector<Polynomial> comps;
  if (include_constant) comps.push_back(Polynomial{1.0});
  comps.push_back(Polynomial{0.0, 1.0});
  comps.push_back(Polynomial{-0.5, 0.0, 1.5});
  comps.push_back(Polynomial{0.0, -1.5, 0.0, 2.5});
  return Basis(std::move(comps), include_constant ? "legendre3" : "legendre3_no_const");
}

Eigen::VectorXd Basis::eval(double u) const {
  check_unit(u);
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  eval_into(u, out.data());
  return out;
}

Eigen::VectorXd Basis::eval_derivative(double u) const {
  check_unit(u);
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  for (std::size_t k = 0; k < size(); ++k) out(static_cast<Eigen::Index>(k)) = derivatives_[k](u);
  return out;
}

Eigen::VectorXd Basis::eval_antiderivative(double u) const {
  check_unit(u);
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  eval_antiderivative_into(u, out.data());
  return out;
}

void Basis::eval_into(double u, double* out) const noexcept {
  for (std::size_t k = 0; k < components_.size(); ++k) out[k] = components_[k](u);
}

void Basis::eval_antiderivative_into(double u, double* out) const noexcept {
  for (std::size_t k = 0; k < antiderivatives_.size(); ++k) out[k] = antiderivatives_[k](u);
}

Polynomial Basis::combine(const double* row) const noexcept {
  Polynomial p;
  for (int j = 0; j <= max_degree_; ++j) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < monomials_.rows(); ++k) acc += row[k] * monomials_(k, j);
    p.coef(static_cast<std::size_t>(j)) = acc;
  }
  return p;
}

Basis basis_from_name(const std::string& name) {
  if (name == "legendre3") return Basis::legendre3(true);
  if (name == "legendre3_no_const") return Basis::legendre3(false);
  throw ConfigError("unknown basis '" + name + "' (expected legendre3 or legendre3_no_const)");
}

}  // namespace extremile
