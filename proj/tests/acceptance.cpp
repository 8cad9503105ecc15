// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status 1 if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "extremile/estimators.hpp"
#include "extremile/extremile_measure.hpp"
#include "extremile/iqr_solver.hpp"
#include "extremile/quadrature.hpp"
#include "extremile/simulation.hpp"
#include "support.hpp"

using namespace extremile;

namespace {

constexpr std::uint64_t kSeed = 20240501;

struct Outcome {
  bool pass;
  std::string detail;
};

std::vector<double> tau_grid_05() {
  std::vector<double> g;
  for (int i = 1; i <= 19; ++i) g.push_back(0.05 * i);
  return g;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. Closed-form moments against two numerical oracles.
Outcome moments() {
  const int riemann_nodes = 100000;
  const QuadratureRule gl = gauss_legendre(200);
  // Endpoint substitution t = v^m (or 1 - t = v^m) smooths t^(r-1) before Gauss-Legendre.
  const double m = 4.0;
  double worst_riemann = 0.0, worst_gl = 0.0, worst_plain = 0.0;
  for (double tau : tau_grid_05()) {
    const ExtremileOrder o(tau);
    const Eigen::VectorXd exact = monomial_moments(o, 6);
    for (int k = 0; k <= 6; ++k) {
      double r = 0.0;
      for (int i = 0; i < riemann_nodes; ++i) {
        const double t = (i + 0.5) / riemann_nodes;
        r += std::pow(t, k) * o.density(t);
      }
      worst_riemann = std::max(worst_riemann, std::abs(r / riemann_nodes - exact(k)));

      double g = 0.0, plain = 0.0;
      for (Eigen::Index j = 0; j < gl.nodes.size(); ++j) {
        const double v = gl.nodes(j);
        const double vm = std::pow(v, m);
        const double jac = m * std::pow(v, m - 1.0);
        const double t = o.upper() ? vm : 1.0 - vm;
        g += gl.weights(j) * std::pow(t, k) * o.density(t) * jac;
        plain += gl.weights(j) * std::pow(v, k) * o.density(v);
      }
      worst_gl = std::max(worst_gl, std::abs(g - exact(k)));
      worst_plain = std::max(worst_plain, std::abs(plain - exact(k)));
    }
  }
  const bool ok = worst_riemann <= 1e-4 && worst_gl <= 1e-10;
  return {ok, "max |riemann - exact| = " + fmt("%.2e", worst_riemann) +
                  ", max |gauss-legendre - exact| = " + fmt("%.2e", worst_gl) +
                  " (unsubstituted rule: " + fmt("%.2e", worst_plain) + ")"};
}

// 2. tau = 0.5 extremile is the sample mean.
Outcome mean_identity() {
  std::mt19937_64 rng(kSeed);
  std::normal_distribution<double> nd(0.0, 3.0);
  std::uniform_int_distribution<int> size(1, 2000);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> s(size(rng));
    for (double& v : s) v = nd(rng) + 5.0;
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    worst = std::max(worst, std::abs(scalar_extremile(s, ExtremileOrder(0.5)) - mean));
  }
  return {worst <= 1e-12, "max |extremile - mean| over 100 samples = " + fmt("%.2e", worst)};
}

// 3. Max/min-of-two representation for uniform data.
Outcome max_of_two() {
  std::mt19937_64 rng(kSeed + 3);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::vector<double> u(100000);
  for (double& v : u) v = ud(rng);
  const double up = scalar_extremile(u, ExtremileOrder(std::sqrt(0.5)));
  const double lo = scalar_extremile(u, ExtremileOrder(1.0 - std::sqrt(0.5)));
  double mx = 0.0, mn = 0.0;
  const int pairs = 1000000;
  for (int i = 0; i < pairs; ++i) {
    const double a = ud(rng), b = ud(rng);
    mx += std::max(a, b);
    mn += std::min(a, b);
  }
  mx /= pairs;
  mn /= pairs;
  const bool ok = std::abs(up - 2.0 / 3.0) <= 0.01 && std::abs(up - mx) <= 0.01 &&
                  std::abs(lo - 1.0 / 3.0) <= 0.01 && std::abs(lo - mn) <= 0.01;
  return {ok, "upper " + fmt("%.4f", up) + " (max-of-2 mean " + fmt("%.4f", mx) + "), lower " +
                  fmt("%.4f", lo) + " (min-of-2 mean " + fmt("%.4f", mn) + ")"};
}

// 4. Analytic score and Hessian against finite differences.
Outcome derivatives() {
  std::mt19937_64 rng(kSeed + 4);
  const Basis b = Basis::legendre3();
  double worst_g = 0.0, worst_h = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto d = testing::random_data(60, 3, rng);
    const CoefMatrix a = testing::smooth_alpha(3, rng, 0.3);
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(d.n());
    const Eigen::VectorXd v = a.vec();
    auto f = [&](const Eigen::VectorXd& x) { return loss(CoefMatrix::from_vec(x, 3, 4), d, w, b); };
    worst_g = std::max(worst_g, testing::max_rel_error(testing::central_difference(f, v, 1e-5),
                                                       score(a, d, w, b)));
    const Eigen::MatrixXd H = hessian(a, d, w, b);
    Eigen::MatrixXd fd(v.size(), v.size());
    const double h = 1e-6;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      Eigen::VectorXd p = v, m = v;
      p(k) += h;
      m(k) -= h;
      fd.col(k) = (score(CoefMatrix::from_vec(p, 3, 4), d, w, b) -
                   score(CoefMatrix::from_vec(m, 3, 4), d, w, b)) / (2 * h);
    }
    worst_h = std::max(worst_h, testing::max_rel_error(fd, H));
  }
  return {worst_g <= 1e-6 && worst_h <= 1e-4,
          "max relative error: score " + fmt("%.2e", worst_g) + ", hessian " + fmt("%.2e", worst_h)};
}

// 5. Linear design, desk scale.
Outcome linear_table() {
  ScenarioConfig normal;
  normal.name = "normal";
  normal.error_law = ErrorLaw::normal;
  normal.tau_grid = {0.1, 0.9};
  normal.replications = 100;
  normal.seed = kSeed;
  normal.run_oe = false;
  const auto rn = run_scenario(normal);
  const double t10 = *rn.taus[0].find(Estimator::SL)->tae_mean;
  const double t90 = *rn.taus[1].find(Estimator::SL)->tae_mean;

  ScenarioConfig uni = normal;
  uni.name = "uniform";
  uni.error_law = ErrorLaw::uniform01;
  uni.tau_grid = {0.1};
  uni.run_oe = true;
  const auto ru = run_scenario(uni);
  const double prtae = *ru.taus[0].prtae;

  const bool ok = std::abs(t10 - 0.250) <= 0.05 && std::abs(t90 - 0.259) <= 0.05 && prtae >= 100.0;
  return {ok, "normal TAE_SL tau=0.1 " + fmt("%.3f", t10) + ", tau=0.9 " + fmt("%.3f", t90) +
                  "; uniform PRTAE tau=0.1 " + fmt("%.1f%%", prtae) + " (failed reps " +
                  std::to_string(rn.failed + ru.failed) + ")"};
}

// 6. Semi-supervised efficiency on the nonlinear design.
Outcome ssl_efficiency() {
  ScenarioConfig c;
  c.dgp = Dgp::nonlinear_42;
  c.error_law = ErrorLaw::normal;
  c.replications = 100;
  c.seed = kSeed;
  c.run_oe = false;
  c.pair_sum = PairSum::diagonal_only;
  c.surrogate_degree = 3;
  auto mean_pare = [](const ReplicationReport& r) {
    double s = 0.0;
    int k = 0;
    for (const auto& t : r.taus)
      for (Eigen::Index j = 0; j < t.pare->size(); ++j, ++k) s += (*t.pare)(j);
    return s / k;
  };
  c.N_unlabeled = 2000;
  const auto big = run_scenario(c);
  c.N_unlabeled = 500;
  const auto small = run_scenario(c);

  const TauSummary* mid = nullptr;
  for (const auto& t : big.taus)
    if (std::abs(t.tau - 0.5) < 1e-12) mid = &t;
  int above = 0;
  std::string cells;
  for (Eigen::Index j = 0; j < mid->pare->size(); ++j) {
    above += (*mid->pare)(j) > 30.0;
    cells += (j ? ", " : "") + fmt("%.1f", (*mid->pare)(j));
  }
  const double m2000 = mean_pare(big), m500 = mean_pare(small);
  return {above >= 4 && m2000 > m500,
          "PARE at tau=0.5, N=2000: (" + cells + ")%, " + std::to_string(above) +
              "/5 above 30%; mean PARE N=2000 " + fmt("%.1f", m2000) + "% vs N=500 " +
              fmt("%.1f", m500) + "%"};
}

// 7. Sandwich standard errors against replication spread.
Outcome se_calibration() {
  ScenarioConfig c;
  c.error_law = ErrorLaw::normal;
  c.tau_grid = {0.3};
  c.replications = 200;
  c.seed = kSeed;
  c.run_oe = false;
  c.standard_errors = true;
  const auto r = run_scenario(c);
  const auto* sl = r.taus[0].find(Estimator::SL);
  bool ok = true;
  std::string cells;
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double ratio = sl->mean_se(j) / sl->sd(j);
    ok = ok && ratio >= 0.75 && ratio <= 1.25;
    cells += (j ? ", " : "") + fmt("%.3f", ratio);
  }
  return {ok, "mean SE / SD per coordinate: (" + cells + ")"};
}

// 8. Affine remaps of the non-constant surrogates.
Outcome affine_invariance() {
  ScenarioConfig c;
  c.dgp = Dgp::nonlinear_42;
  c.N_unlabeled = 2000;
  c.seed = kSeed;
  const auto [lab, unl] = gen_nonlinear_42(c, 0);
  const Basis b = Basis::legendre3();
  const auto Zl = build_surrogates(lab.X(), 2).Z;
  const auto Zu = build_surrogates(unl.X(), 2).Z;
  const SslFit base = fit_semisupervised(lab, Zl, Zu, b);
  std::mt19937_64 rng(kSeed + 8);
  std::normal_distribution<double> nd(0.0, 1.0);
  const Eigen::Index m = Zl.cols() - 1;
  double worst = 0.0;
  bool converged = base.fit.converged;
  for (int t = 0; t < 10; ++t) {
    Eigen::MatrixXd M(m, m);
    for (Eigen::Index i = 0; i < M.size(); ++i) M(i) = nd(rng);
    M += 3.0 * Eigen::MatrixXd::Identity(m, m);
    Eigen::RowVectorXd shift(m);
    for (Eigen::Index i = 0; i < m; ++i) shift(i) = 5.0 * nd(rng);
    auto remap = [&](const Eigen::MatrixXd& Z) {
      Eigen::MatrixXd out = Z;
      out.rightCols(m) = (Z.rightCols(m) * M.transpose()).rowwise() + shift;
      return out;
    };
    const SslFit moved = fit_semisupervised(lab, remap(Zl), remap(Zu), b);
    converged = converged && moved.fit.converged;
    worst = std::max(worst, (moved.fit.alpha.matrix() - base.fit.alpha.matrix()).cwiseAbs().maxCoeff());
  }
  return {converged && worst <= 1e-6,
          "max |alpha change| over 10 remaps = " + fmt("%.2e", worst)};
}

// 9. Extremile curves do not cross.
Outcome no_crossing() {
  ScenarioConfig c;
  c.error_law = ErrorLaw::student_t5;
  c.sigma_case = SigmaCase::hetero_sqrt;
  c.seed = kSeed;
  const auto d = gen_linear_41(c, 0, 0.5);
  const Basis b = Basis::legendre3();
  const FitResult f = fit_supervised(d, b);
  if (f.monotone_fraction < 1.0) return {false, "fit is not monotone at every training point"};
  Eigen::VectorXd prev = Eigen::VectorXd::Constant(d.n(), -INFINITY);
  double worst = 0.0;
  for (double tau : tau_grid_05()) {
    const Eigen::VectorXd cur = predict(beta_from_alpha(f, ExtremileOrder(tau), b), d.X());
    worst = std::max(worst, (prev - cur).maxCoeff());
    prev = cur;
  }
  return {worst <= 0.0, "largest decrease between adjacent levels = " + fmt("%.2e", std::max(worst, 0.0)) +
                            " over " + std::to_string(d.n()) + " points"};
}

// 10. Weight identities.
Outcome omega_identities() {
  ScenarioConfig c;
  c.seed = kSeed;
  const auto d = gen_linear_41(c, 0, 0.3);
  const Basis b = Basis::legendre3();
  const FitResult sl = fit_supervised(d, b);
  const SslFit ssl = fit_semisupervised(d, UnlabeledDataset(Eigen::MatrixXd(0, 3), 3), b);
  const bool same = ssl.fit.alpha.matrix() == sl.alpha.matrix() && ssl.fit.objective == sl.objective &&
                    ssl.fit.iterations == sl.iterations;

  std::mt19937_64 rng(kSeed + 10);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 5), deg(1, 3);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int p = dim(rng);
    Eigen::MatrixXd X(200, p + 1);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      X(i, 0) = 1.0;
      for (int j = 1; j <= p; ++j) X(i, j) = 2.0 * nd(rng) + j;
    }
    worst = std::max(worst, std::abs(leading_one_identity(build_surrogates(X, deg(rng)).Z) - 1.0));
  }
  return {same && worst <= 1e-10, std::string("N=0 fit ") + (same ? "bit-identical" : "differs") +
                                      "; max |Zbar' S^-1 Zbar - 1| = " + fmt("%.2e", worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"moment oracle", moments},
      {"mean identity", mean_identity},
      {"max-of-two representation", max_of_two},
      {"gradient and hessian oracles", derivatives},
      {"linear design TAE and PRTAE", linear_table},
      {"semi-supervised efficiency", ssl_efficiency},
      {"standard error calibration", se_calibration},
      {"affine invariance", affine_invariance},
      {"no crossing", no_crossing},
      {"weight identities", omega_identities}};
  const double limits[] = {1.0, 1.0, 5.0, 10.0, 0, 0, 0, 0, 0, 0};
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o = criteria[k].second();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limits[k] > 0 && secs > limits[k]) {
      o.pass = false;
      o.detail += "; exceeded " + fmt("%.0f s", limits[k]);
    }
    failures += !o.pass;
    std::printf("%s criterion %zu (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", k + 1,
                criteria[k].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
