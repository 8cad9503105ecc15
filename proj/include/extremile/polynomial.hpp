#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>

namespace extremile {

// Fixed-capacity dense polynomial in monomial form; coefficient k multiplies u^k.
// Capacity covers the basis degree cap (8) plus one antiderivative.
class Polynomial {
 public:
  static constexpr int kMaxDegree = 9;
  static constexpr std::size_t kCapacity = kMaxDegree + 1;

  Polynomial() = default;
  Polynomial(std::initializer_list<double> coefs);
  explicit Polynomial(std::span<const double> coefs);

  // Number of stored coefficients (degree bound + 1); 0 for the empty polynomial.
  std::size_t size() const noexcept { return size_; }
  // Highest index with a nonzero coefficient, -1 for the zero polynomial.
  int degree() const noexcept;

  double operator[](std::size_t k) const noexcept { return k < size_ ? c_[k] : 0.0; }
  double& coef(std::size_t k);
  std::span<const double> coefficients() const noexcept { return {c_.data(), size_}; }

  double operator()(double u) const noexcept {
    double acc = 0.0;
    for (std::size_t k = size_; k-- > 0;) acc = acc * u + c_[k];
    return acc;
  }

  Polynomial derivative() const;
  // Antiderivative vanishing at 0.
  Polynomial antiderivative() const;
  double integral(double lo, double hi) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator*=(double s) noexcept;
  friend Polynomial operator*(double s, Polynomial p) { return p *= s; }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }

  // Multiplies by u (raises every power by one).
  Polynomial times_u() const;

 private:
  std::array<double, kCapacity> c_{};
  std::size_t size_ = 0;
};

// Roots in the open interval (0,1) at which p changes sign, ascending.
// Returns the count written into `out`. Even-multiplicity (touching) roots are
// not reported because they do not change the sign set of p.
std::size_t sign_change_roots(const Polynomial& p, std::array<double, Polynomial::kMaxDegree>& out);

}  // namespace extremile
