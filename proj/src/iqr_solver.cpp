#include "extremile/iqr_solver.hpp"

#include <cmath>
#include <string>

#include "extremile/error.hpp"

namespace extremile {

namespace {

kernels::ObjectiveTerms evaluate(const CoefMatrix& alpha, const LabeledDataset& data,
                                 const Eigen::VectorXd& weights, const Basis& basis,
                                 double floor, unsigned parts) {
  if (weights.size() != data.n()) {
    throw DataError("weights have length " + std::to_string(weights.size()) + ", expected " +
                    std::to_string(data.n()));
  }
  return kernels::accumulate_parallel({alpha, data.X(), data.y(), weights, basis, floor}, parts);
}

void validate(const SolverConfig& c) {
  if (!(c.grad_tol > 0) || c.max_iter <= 0 || !(c.levenberg_lambda0 > 0) ||
      !(c.line_search_shrink > 0 && c.line_search_shrink < 1) || c.max_halvings <= 0 ||
      !(c.derivative_floor > 0) || c.quadrature_nodes <= 0) {
    throw ConfigError("solver configuration values must be positive (shrink in (0,1))");
  }
}

// Least-squares coefficients c with c' b(u) ~ f(u) on a level grid.
Eigen::VectorXd represent(const Basis& basis, double (*f)(double)) {
  constexpr int kGrid = 101;
  const auto q = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd B(kGrid, q);
  Eigen::VectorXd target(kGrid);
  for (int g = 0; g < kGrid; ++g) {
    const double u = static_cast<double>(g) / (kGrid - 1);
    B.row(g) = basis.eval(u).transpose();
    target(g) = f(u);
  }
  return B.colPivHouseholderQr().solve(target);
}

constexpr double kMaxLambda = 1e8;
constexpr double kMinLambda = 1e-12;

}  // namespace

double loss(const CoefMatrix& alpha, const LabeledDataset& data, const Eigen::VectorXd& weights,
            const Basis& basis) {
  return evaluate(alpha, data, weights, basis, 1e-6, kernels::kLoss).loss;
}

Eigen::VectorXd score(const CoefMatrix& alpha, const LabeledDataset& data,
                      const Eigen::VectorXd& weights, const Basis& basis) {
  return evaluate(alpha, data, weights, basis, 1e-6, kernels::kScore).score;
}

Eigen::MatrixXd hessian(const CoefMatrix& alpha, const LabeledDataset& data,
                        const Eigen::VectorXd& weights, const Basis& basis,
                        double derivative_floor) {
  return evaluate(alpha, data, weights, basis, derivative_floor, kernels::kHessian).hessian;
}

CoefMatrix initial_alpha(const LabeledDataset& data, const Basis& basis) {
  const Eigen::MatrixXd& X = data.X();
  const Eigen::VectorXd beta_ls = X.colPivHouseholderQr().solve(data.y());
  const Eigen::VectorXd resid = data.y() - X * beta_ls;
  const double dof = static_cast<double>(std::max<Eigen::Index>(data.n() - data.p(), 1));
  const double sigma = std::sqrt(resid.squaredNorm() / dof);

  const Eigen::VectorXd c_const = represent(basis, [](double) { return 1.0; });
  const Eigen::VectorXd c_lin = represent(basis, [](double u) { return u - 0.5; });

  Eigen::MatrixXd alpha = beta_ls * c_const.transpose();

  // The spread goes on the first constant design column (the intercept).
  Eigen::Index intercept = -1;
  for (Eigen::Index j = 0; j < X.cols() && intercept < 0; ++j) {
    const double v = X(0, j);
    if (v != 0.0 && (X.col(j).array() == v).all()) intercept = j;
  }
  if (intercept >= 0) {
    alpha.row(intercept) += (sigma / X(0, intercept)) * c_lin.transpose();
  } else {
    const Eigen::VectorXd mean = X.colwise().mean();
    Eigen::Index j;
    mean.cwiseAbs().maxCoeff(&j);
    if (mean(j) != 0.0) alpha.row(j) += (sigma / mean(j)) * c_lin.transpose();
  }
  return CoefMatrix(alpha);
}

FitResult solve(const LabeledDataset& data, const Eigen::VectorXd& weights, const Basis& basis,
                const SolverConfig& config, const std::optional<CoefMatrix>& alpha_init) {
  validate(config);
  if (weights.size() != data.n()) throw DataError("weights length does not match n");
  if (!weights.allFinite()) throw DataError("weights contain non-finite values");

  FitResult res;
  res.alpha = alpha_init ? *alpha_init : initial_alpha(data, basis);
  if (res.alpha.p() != data.p() || res.alpha.q() != static_cast<Eigen::Index>(basis.size())) {
    throw DataError("initial alpha has the wrong shape");
  }

  if ((weights.array() == 0.0).all()) {
    res.converged = true;
    res.monotone_fraction = monotone_fraction(res.alpha, basis, data.X());
    res.objective_history.push_back(0.0);
    return res;
  }

  const double inv_n = 1.0 / static_cast<double>(data.n());
  const double floor = config.derivative_floor;
  const bool nonnegative = (weights.array() >= 0.0).all();
  const double y_scale = 1.0 + data.y().cwiseAbs().mean();

  auto terms = evaluate(res.alpha, data, weights, basis, floor, kernels::kAll);
  double f = terms.loss * inv_n;
  Eigen::VectorXd g = terms.score * inv_n;
  Eigen::MatrixXd H = terms.hessian * inv_n;
  res.objective_history.push_back(f);

  double lambda = config.levenberg_lambda0;
  int it = 0;
  while (true) {
    const double gnorm = g.lpNorm<Eigen::Infinity>();
    if (gnorm <= config.grad_tol * (1.0 + std::abs(f))) {
      res.converged = true;
      break;
    }
    // Zero loss with nonnegative weights is a global minimum even where the
    // loss has a kink (noise-free data).
    if (nonnegative && f <= 1e-13 * y_scale) {
      res.converged = true;
      break;
    }
    if (it >= config.max_iter) break;

    const double diag_scale = H.diagonal().cwiseAbs().mean();
    const double scale = diag_scale > 0.0 ? diag_scale : 1.0;

    bool accepted = false;
    CoefMatrix trial;
    std::optional<kernels::ObjectiveTerms> trial_terms;
    while (!accepted && lambda <= kMaxLambda) {
      Eigen::MatrixXd A = H;
      A.diagonal().array() += lambda * scale;
      Eigen::LLT<Eigen::MatrixXd> llt(A);
      if (llt.info() != Eigen::Success) {
        res.nonconvex_detected = true;
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd step = -llt.solve(g);
      const double slope = g.dot(step);
      double t = 1.0;
      for (int h = 0; h <= config.max_halvings; ++h) {
        trial = CoefMatrix::from_vec(res.alpha.vec() + t * step, data.p(),
                                     static_cast<Eigen::Index>(basis.size()));
        const double ft =
            evaluate(trial, data, weights, basis, floor, kernels::kLoss).loss * inv_n;
        if (ft <= f + 1e-4 * t * slope) {
          accepted = true;
          break;
        }
        // At rounding-level loss differences fall back to gradient decrease.
        if (h == 0 && ft - f <= 1e-14 * (1.0 + std::abs(f))) {
          auto tt = evaluate(trial, data, weights, basis, floor, kernels::kAll);
          if ((tt.score * inv_n).lpNorm<Eigen::Infinity>() < gnorm) {
            trial_terms = std::move(tt);
            accepted = true;
            break;
          }
        }
        t *= config.line_search_shrink;
      }
      if (!accepted) lambda *= 10.0;
    }
    if (!accepted) break;

    res.alpha = std::move(trial);
    terms = trial_terms ? std::move(*trial_terms)
                        : evaluate(res.alpha, data, weights, basis, floor, kernels::kAll);
    f = terms.loss * inv_n;
    g = terms.score * inv_n;
    H = terms.hessian * inv_n;
    res.objective_history.push_back(f);
    lambda = std::max(lambda * 0.5, kMinLambda);
    ++it;
  }

  res.iterations = it;
  res.objective = f;
  res.grad_inf_norm = g.lpNorm<Eigen::Infinity>();
  res.final_lambda = lambda;
  res.monotone_fraction = monotone_fraction(res.alpha, basis, data.X());
  return res;
}

}  // namespace extremile
