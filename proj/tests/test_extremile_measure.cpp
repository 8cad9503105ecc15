#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "extremile/basis.hpp"
#include "extremile/error.hpp"
#include "extremile/extremile_measure.hpp"

using namespace extremile;
using doctest::Approx;

namespace {
const double kUpper = std::sqrt(0.5);
const double kLower = 1.0 - std::sqrt(0.5);
}  // namespace

TEST_CASE("exponents and H") {
  const ExtremileOrder mid(0.5);
  CHECK(mid.r() == Approx(1.0));
  CHECK(mid.s() == Approx(1.0));
  for (double t : {0.0, 0.2, 0.7, 1.0}) CHECK(mid.cdf(t) == Approx(t));

  const ExtremileOrder up(kUpper);
  CHECK(up.upper());
  CHECK(up.r() == Approx(2.0));
  CHECK(up.cdf(0.5) == Approx(0.25));
  for (double tau : {0.05, 0.3, 0.8, 0.95}) CHECK(ExtremileOrder(tau).cdf(1.0) == Approx(1.0));
}

TEST_CASE("J") {
  for (double t : {0.0, 0.25, 0.9}) CHECK(ExtremileOrder(0.5).density(t) == Approx(1.0));
  CHECK(ExtremileOrder(kUpper).density(0.5) == Approx(1.0));
  CHECK(ExtremileOrder(kLower).density(0.5) == Approx(1.0));
  CHECK(ExtremileOrder(kLower).density(0.2) == Approx(2.0 * 0.8));
}

TEST_CASE("order validation and clipping") {
  CHECK_THROWS_AS(ExtremileOrder(0.0), DomainError);
  CHECK_THROWS_AS(ExtremileOrder(1.0), DomainError);
  CHECK_THROWS_AS(ExtremileOrder(std::nan("")), DomainError);
  CHECK(ExtremileOrder(1e-9).tau() == Approx(1e-6));
  CHECK(std::isfinite(ExtremileOrder(1.0 - 1e-12).r()));
}

TEST_CASE("monomial moments") {
  const Eigen::VectorXd mid = monomial_moments(ExtremileOrder(0.5), 6);
  for (int k = 0; k <= 6; ++k) CHECK(mid(k) == Approx(1.0 / (k + 1)));
  CHECK(monomial_moments(ExtremileOrder(kUpper), 1)(1) == Approx(2.0 / 3.0));
  CHECK(monomial_moments(ExtremileOrder(kLower), 1)(1) == Approx(1.0 / 3.0));
  for (double tau : {0.05, 0.2, 0.5, 0.75, 0.95})
    CHECK(monomial_moments(ExtremileOrder(tau), 0)(0) == 1.0);

  // J integrates to one (midpoint rule on a fine grid).
  for (double tau : {0.1, 0.9}) {
    const ExtremileOrder o(tau);
    const int n = 200000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += o.density((i + 0.5) / n);
    CHECK(s / n == Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("weight vector") {
  const Basis b = Basis::legendre3();
  const Eigen::VectorXd w = weight_vector(ExtremileOrder(0.5), b);
  CHECK(w(0) == Approx(1.0));
  CHECK(w(1) == Approx(0.5));
  CHECK(std::abs(w(2)) < 1e-15);
  // int (2.5u^3 - 1.5u) du over [0,1].
  CHECK(w(3) == Approx(-0.125));
  CHECK(weight_vector(ExtremileOrder(kUpper), b)(1) == Approx(2.0 / 3.0));

  for (double tau : {0.05, 0.3, 0.7, 0.95}) {
    const ExtremileOrder o(tau);
    const Eigen::VectorXd exact = weight_vector(o, b);
    const Eigen::VectorXd riemann = weight_vector_riemann(o, b, 100000);
    CHECK((exact - riemann).cwiseAbs().maxCoeff() <= 1e-4);
  }
}

TEST_CASE("discrete weights") {
  const auto w4 = discrete_weights(ExtremileOrder(0.5), 4);
  for (double v : w4) CHECK(v == Approx(0.25));
  const auto w2 = discrete_weights(ExtremileOrder(kUpper), 2);
  CHECK(w2[0] == Approx(0.25));
  CHECK(w2[1] == Approx(0.75));
  CHECK(discrete_weights(ExtremileOrder(0.3), 1)[0] == Approx(1.0));
  for (double tau : {0.05, 0.5, 0.95}) {
    for (std::size_t n : {10u, 1000u, 1000000u}) {
      const auto w = discrete_weights(ExtremileOrder(tau), n);
      CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("scalar extremile") {
  const std::vector<double> two{1.0, 0.0};
  CHECK(scalar_extremile(two, ExtremileOrder(kUpper)) == Approx(0.75));
  const std::vector<double> s{3.0, -1.0, 2.5, 7.0};
  CHECK(scalar_extremile(s, ExtremileOrder(0.5)) == Approx(11.5 / 4.0));
  CHECK_THROWS_AS(scalar_extremile(std::vector<double>{}, ExtremileOrder(0.5)), DataError);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::vector<double> u(100000);
  for (double& v : u) v = ud(rng);
  CHECK(std::abs(scalar_extremile(u, ExtremileOrder(kUpper)) - 2.0 / 3.0) < 0.01);

  // Uniform symmetry: xi(tau) + xi(1 - tau) = 1 up to Monte-Carlo error.
  for (double tau : {0.1, 0.3}) {
    const double sum = scalar_extremile(u, ExtremileOrder(tau)) +
                       scalar_extremile(u, ExtremileOrder(1.0 - tau));
    // Each estimate has a standard error near 0.002 at this n.
    CHECK(std::abs(sum - 1.0) < 3.0 * std::sqrt(2.0) * 0.002);
  }
}
