#include <doctest.h>

#include <random>

#include "extremile/basis.hpp"
#include "extremile/error.hpp"

using namespace extremile;
using doctest::Approx;

namespace {

void check_vec(const Eigen::VectorXd& got, std::initializer_list<double> want, double eps = 1e-14) {
  REQUIRE(got.size() == static_cast<Eigen::Index>(want.size()));
  Eigen::Index k = 0;
  for (double w : want) {
    CHECK(std::abs(got(k) - w) <= eps);
    ++k;
  }
}

}  // namespace

TEST_CASE("polynomial arithmetic") {
  Polynomial p{1.0, -2.0, 3.0};  // 1 - 2u + 3u^2
  CHECK(p(0.5) == Approx(0.75));
  CHECK(p.degree() == 2);
  CHECK(p.derivative()(2.0) == Approx(10.0));
  CHECK(p.antiderivative()(1.0) == Approx(1.0));
  CHECK(p.integral(0.0, 2.0) == Approx(2.0 - 4.0 + 8.0));
  CHECK(p.times_u()(2.0) == Approx(2.0 * p(2.0)));
  CHECK((2.0 * p + p)(1.5) == Approx(3.0 * p(1.5)));
}

TEST_CASE("legendre3 values") {
  const Basis b = Basis::legendre3();
  CHECK(b.size() == 4);
  check_vec(b.eval(0.0), {1.0, 0.0, -0.5, 0.0});
  check_vec(b.eval(1.0), {1.0, 1.0, 1.0, 1.0});
  check_vec(b.eval(0.5), {1.0, 0.5, -0.125, -0.4375});

  const Basis lit = Basis::legendre3(false);
  CHECK(lit.size() == 3);
  check_vec(lit.eval(0.5), {0.5, -0.125, -0.4375});
  check_vec(lit.eval(1.0), {1.0, 1.0, 1.0});
}

TEST_CASE("legendre3 derivatives") {
  const Basis b = Basis::legendre3();
  // d/du of 1.5u^2 - 0.5 vanishes at 0.
  check_vec(b.eval_derivative(0.0), {0.0, 1.0, 0.0, -1.5});
  check_vec(Basis::legendre3(false).eval_derivative(1.0), {1.0, 3.0, 6.0});
  for (double u : {0.1, 0.4, 0.9}) CHECK(b.eval_derivative(u)(0) == 0.0);
}

TEST_CASE("antiderivative") {
  const Basis b = Basis::legendre3();
  CHECK(b.eval_antiderivative(0.0).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd one = b.eval_antiderivative(1.0);
  CHECK(one(0) == Approx(1.0));
  CHECK(one(1) == Approx(0.5));
  CHECK(std::abs(one(2)) < 1e-15);

  // Finite-difference derivative of B matches b.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(0.01, 0.99);
  const double h = 1e-5;
  for (int t = 0; t < 100; ++t) {
    const double u = ud(rng);
    const Eigen::VectorXd fd = (b.eval_antiderivative(u + h) - b.eval_antiderivative(u - h)) / (2 * h);
    const Eigen::VectorXd ex = b.eval(u);
    for (Eigen::Index k = 0; k < ex.size(); ++k)
      CHECK(std::abs(fd(k) - ex(k)) <= 1e-8 * std::max(1.0, std::abs(ex(k))));
  }

  // B(1) - B(0) equals the monomial integral of the stored coefficients.
  const Eigen::MatrixXd& m = b.monomial_matrix();
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    double s = 0.0;
    for (Eigen::Index d = 0; d < m.cols(); ++d) s += m(k, d) / static_cast<double>(d + 1);
    CHECK(one(k) - b.eval_antiderivative(0.0)(k) == Approx(s).epsilon(1e-14));
  }
}

TEST_CASE("first moment and combine") {
  const Basis b = Basis::legendre3();
  // int u * b(u) du: 1/2, 1/3, 1.5/4 - 0.5/2, 2.5/5 - 1.5/3.
  check_vec(b.first_moment(), {0.5, 1.0 / 3.0, 0.125, 0.0}, 1e-14);
  const double row[] = {1.0, 2.0, 0.0, 0.5};
  const Polynomial q = b.combine(row);
  for (double u : {0.0, 0.3, 1.0}) CHECK(q(u) == Approx(b.eval(u).dot(Eigen::Vector4d(1, 2, 0, 0.5))));
}

TEST_CASE("basis validation") {
  CHECK_THROWS_AS(Basis({Polynomial{0.0, 1.0}, Polynomial{0.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(Basis({Polynomial{1.0}, Polynomial{0.0, 1.0}, Polynomial{2.0, 3.0}}), DomainError);
  CHECK_THROWS_AS(Basis(std::vector<Polynomial>{}), DomainError);
  std::vector<double> high(Basis::kMaxDegree + 2, 0.0);
  high.back() = 1.0;
  CHECK_THROWS_AS(Basis({Polynomial(std::span<const double>(high))}), DomainError);
  CHECK(basis_from_name("legendre3").size() == 4);
  CHECK(basis_from_name("legendre3_no_const").size() == 3);
  CHECK_THROWS(basis_from_name("chebyshev"));
}
