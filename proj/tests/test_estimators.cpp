#include <doctest.h>

#include <random>

#include "extremile/error.hpp"
#include "extremile/estimators.hpp"
#include "extremile/iqr_solver.hpp"
#include "support.hpp"

using namespace extremile;
using doctest::Approx;

namespace {

Eigen::MatrixXd random_design(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd X(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) X.row(i) << 1.0, nd(rng), 0.5 + nd(rng);
  return X;
}

}  // namespace

TEST_CASE("surrogate construction") {
  Eigen::MatrixXd x(1, 3);
  x << 1.0, 0.2, 0.5;
  const auto z1 = build_surrogates(x, 1, std::vector<Eigen::Index>{1, 2});
  REQUIRE(z1.Z.cols() == 3);
  CHECK(z1.Z(0, 0) == 1.0);
  CHECK(z1.Z(0, 1) == 0.2);
  CHECK(z1.Z(0, 2) == 0.5);

  Eigen::MatrixXd x2(1, 2);
  x2 << 1.0, 2.0;
  const auto z2 = build_surrogates(x2, 2, std::vector<Eigen::Index>{1});
  REQUIRE(z2.Z.cols() == 3);
  CHECK(z2.Z(0, 1) == 2.0);
  CHECK(z2.Z(0, 2) == 4.0);
  CHECK(z2.labels.front() == "1");

  CHECK_THROWS_AS(build_surrogates(x2, 0, std::vector<Eigen::Index>{1}), ConfigError);

  std::mt19937_64 rng(2);
  Eigen::MatrixXd X = random_design(50, rng);
  CHECK(nonconstant_columns(X) == std::vector<Eigen::Index>{1, 2});
  CHECK(build_surrogates(X, 3).Z.cols() == 7);
  X.col(2) = X.col(1);
  CHECK_THROWS_AS(build_surrogates(X, 1), DataError);
}

TEST_CASE("omega identities") {
  std::mt19937_64 rng(3);
  const auto Zl = build_surrogates(random_design(200, rng), 2).Z;
  const auto Zu = build_surrogates(random_design(700, rng), 2).Z;

  const SslWeights none = ssl_weights(Zl, Eigen::MatrixXd(0, Zl.cols()));
  CHECK(none.omega == Eigen::VectorXd::Ones(200));
  CHECK(none.negative_count == 0);

  // With a leading one, sum omega = n + N for any unlabeled sample.
  const SslWeights w = ssl_weights(Zl, Zu);
  CHECK(w.sum == Approx(900.0).epsilon(1e-12));
  CHECK(w.omega.sum() == Approx(900.0).epsilon(1e-12));

  // Unlabeled mean equal to the labeled mean.
  Eigen::MatrixXd twice(400, Zl.cols());
  twice << Zl, Zl;
  const SslWeights same = ssl_weights(Zl, twice);
  CHECK((same.omega.array() - 3.0).abs().maxCoeff() < 1e-10);

  CHECK(std::abs(leading_one_identity(Zl) - 1.0) < 1e-10);
  CHECK(w.condition_number >= 1.0);

  Eigen::MatrixXd no_one = Zl;
  no_one.col(0).setConstant(2.0);
  CHECK_THROWS(ssl_weights(no_one, Zu));
}

TEST_CASE("mean weight for matching samples") {
  std::mt19937_64 rng(5);
  const auto Zl = build_surrogates(random_design(20000, rng), 2).Z;
  const auto Zu = build_surrogates(random_design(40000, rng), 2).Z;
  const SslWeights w = ssl_weights(Zl, Zu);
  CHECK(w.omega.mean() == Approx(3.0).epsilon(1e-10));
  // Weights concentrate near (n+N)/n when the covariate laws match.
  CHECK(std::abs(w.omega.array().log().mean() - std::log(3.0)) < 0.05);
}

TEST_CASE("no unlabeled data reproduces the supervised fit") {
  std::mt19937_64 rng(7);
  const Basis b = Basis::legendre3();
  const auto d = testing::random_data(300, 3, rng);
  const FitResult sl = fit_supervised(d, b);
  const SslFit ssl = fit_semisupervised(d, UnlabeledDataset(Eigen::MatrixXd(0, 3), 3), b);
  CHECK(ssl.fit.alpha.matrix() == sl.alpha.matrix());
  CHECK(ssl.fit.objective == sl.objective);
  CHECK(ssl.fit.iterations == sl.iterations);

  for (int t = 0; t < 5; ++t) {
    const CoefMatrix a = testing::smooth_alpha(3, rng);
    CHECK(loss(a, d, ssl.weights.omega, b) == loss(a, d, Eigen::VectorXd::Ones(d.n()), b));
  }
}

TEST_CASE("semi-supervised fit is invariant to affine maps of the surrogates") {
  std::mt19937_64 rng(11);
  const Basis b = Basis::legendre3();
  const auto d = testing::random_data(300, 3, rng);
  const auto Xu = testing::random_data(900, 3, rng).X();
  const auto Zl = build_surrogates(d.X(), 2).Z;
  const auto Zu = build_surrogates(Xu, 2).Z;
  const SslFit base = fit_semisupervised(d, Zl, Zu, b);
  REQUIRE(base.fit.converged);

  const Eigen::Index m = Zl.cols() - 1;
  const Eigen::MatrixXd M = Eigen::MatrixXd::Random(m, m) + 2.0 * Eigen::MatrixXd::Identity(m, m);
  const Eigen::RowVectorXd shift = Eigen::RowVectorXd::Random(m);
  auto remap = [&](const Eigen::MatrixXd& Z) {
    Eigen::MatrixXd out = Z;
    out.rightCols(m) = (Z.rightCols(m) * M.transpose()).rowwise() + shift;
    return out;
  };
  const SslFit moved = fit_semisupervised(d, remap(Zl), remap(Zu), b);
  CHECK((moved.weights.omega - base.weights.omega).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((moved.fit.alpha.matrix() - base.fit.alpha.matrix()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("shared target under a correct working model") {
  std::mt19937_64 rng(13);
  const Basis b = Basis::legendre3();
  const auto d = testing::random_data(2000, 3, rng);
  const auto Xu = testing::random_data(4000, 3, rng).X();
  const FitResult sl = fit_supervised(d, b);
  const SslFit ssl = fit_semisupervised(d, UnlabeledDataset(Xu, 3), b);
  REQUIRE(sl.converged);
  REQUIRE(ssl.fit.converged);
  for (double tau : {0.1, 0.5, 0.9}) {
    const auto a = beta_from_alpha(sl, ExtremileOrder(tau), b).beta;
    const auto c = beta_from_alpha(ssl.fit, ExtremileOrder(tau), b).beta;
    // A loose bound well beyond three standard errors at n = 2000.
    CHECK((a - c).cwiseAbs().maxCoeff() < 0.25);
  }
}
