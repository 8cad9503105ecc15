#include "extremile/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <boost/math/tools/toms748_solve.hpp>

#include "extremile/error.hpp"

namespace extremile {

Polynomial::Polynomial(std::initializer_list<double> coefs)
    : Polynomial(std::span<const double>(coefs.begin(), coefs.size())) {}

Polynomial::Polynomial(std::span<const double> coefs) {
  if (coefs.size() > kCapacity) {
    throw DomainError("polynomial degree exceeds capacity " + std::to_string(kMaxDegree));
  }
  std::copy(coefs.begin(), coefs.end(), c_.begin());
  size_ = coefs.size();
}

int Polynomial::degree() const noexcept {
  for (std::size_t k = size_; k-- > 0;) {
    if (c_[k] != 0.0) return static_cast<int>(k);
  }
  return -1;
}

double& Polynomial::coef(std::size_t k) {
  if (k >= kCapacity) throw DomainError("polynomial coefficient index out of capacity");
  if (k >= size_) size_ = k + 1;
  return c_[k];
}

Polynomial Polynomial::derivative() const {
  Polynomial d;
  if (size_ <= 1) return d;
  d.size_ = size_ - 1;
  for (std::size_t k = 1; k < size_; ++k) d.c_[k - 1] = static_cast<double>(k) * c_[k];
  return d;
}

Polynomial Polynomial::antiderivative() const {
  if (size_ + 1 > kCapacity) throw DomainError("antiderivative exceeds polynomial capacity");
  Polynomial a;
  a.size_ = size_ + 1;
  for (std::size_t k = 0; k < size_; ++k) a.c_[k + 1] = c_[k] / static_cast<double>(k + 1);
  return a;
}

double Polynomial::integral(double lo, double hi) const {
  // Horner on the antiderivative without materializing it.
  auto prim = [this](double u) {
    double acc = 0.0;
    for (std::size_t k = size_; k-- > 0;) acc = acc * u + c_[k] / static_cast<double>(k + 1);
    return acc * u;
  };
  return prim(hi) - prim(lo);
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  size_ = std::max(size_, other.size_);
  for (std::size_t k = 0; k < other.size_; ++k) c_[k] += other.c_[k];
  return *this;
}

Polynomial& Polynomial::operator*=(double s) noexcept {
  for (std::size_t k = 0; k < size_; ++k) c_[k] *= s;
  return *this;
}

Polynomial Polynomial::times_u() const {
  if (size_ + 1 > kCapacity) throw DomainError("polynomial product exceeds capacity");
  Polynomial r;
  r.size_ = size_ + 1;
  for (std::size_t k = 0; k < size_; ++k) r.c_[k + 1] = c_[k];
  return r;
}

namespace {

// Bracketed root of a function that is monotone on [a, b] with fa * fb < 0.
double bracketed_root(const Polynomial& p, double a, double b, double fa, double fb) {
  std::uintmax_t max_iter = 100;
  boost::math::tools::eps_tolerance<double> tol(50);
  auto [lo, hi] = boost::math::tools::toms748_solve([&p](double u) { return p(u); }, a, b, fa,
                                                    fb, tol, max_iter);
  return 0.5 * (lo + hi);
}

std::size_t roots_of_degree(const Polynomial& p, int deg,
                            std::array<double, Polynomial::kMaxDegree>& out) {
  if (deg <= 0) return 0;
  if (deg == 1) {
    const double u = -p[0] / p[1];
    if (u > 0.0 && u < 1.0) {
      out[0] = u;
      return 1;
    }
    return 0;
  }
  // Split (0,1) at the sign changes of p'; p is monotone between them.
  std::array<double, Polynomial::kMaxDegree> crit{};
  const Polynomial dp = p.derivative();
  const std::size_t nc = roots_of_degree(dp, dp.degree(), crit);

  std::array<double, Polynomial::kMaxDegree + 2> knots{};
  std::size_t nk = 0;
  knots[nk++] = 0.0;
  for (std::size_t i = 0; i < nc; ++i) knots[nk++] = crit[i];
  knots[nk++] = 1.0;

  std::size_t count = 0;
  double fa = p(knots[0]);
  for (std::size_t i = 0; i + 1 < nk; ++i) {
    const double a = knots[i];
    const double b = knots[i + 1];
    const double fb = p(b);
    if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
      out[count++] = bracketed_root(p, a, b, fa, fb);
    }
    fa = fb;
  }
  return count;
}

}  // namespace

std::size_t sign_change_roots(const Polynomial& p, std::array<double, Polynomial::kMaxDegree>& out) {
  return roots_of_degree(p, p.degree(), out);
}

}  // namespace extremile
