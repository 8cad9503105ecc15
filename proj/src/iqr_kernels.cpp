#include "extremile/iqr_kernels.hpp"

#include "extremile/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace extremile {

CrossingSet crossing_set(const Polynomial& curve, double y) {
  CrossingSet cs;
  Polynomial diff = curve;
  diff.coef(0) -= y;
  cs.root_count = sign_change_roots(diff, cs.roots);

  double lo = 0.0;
  for (std::size_t r = 0; r <= cs.root_count; ++r) {
    const double hi = r < cs.root_count ? cs.roots[r] : 1.0;
    if (hi > lo && diff(0.5 * (lo + hi)) > 0.0) {
      if (cs.count > 0 && cs.intervals[cs.count - 1].hi == lo) {
        cs.intervals[cs.count - 1].hi = hi;
      } else {
        cs.intervals[cs.count++] = {lo, hi};
      }
    }
    lo = hi;
  }
  return cs;
}

CrossingSet crossing_set(const CoefMatrix& alpha, const Basis& basis,
                         const Eigen::Ref<const Eigen::RowVectorXd>& x, double y) {
  return crossing_set(quantile_curve(alpha, basis, x), y);
}

namespace kernels {

namespace {

constexpr std::size_t kMaxQ = 32;

// Accumulates one observation's weighted contributions. `score` has length pq,
// `hess` is pq x pq column-major.
struct ObservationAccumulator {
  const Basis& basis;
  const Eigen::MatrixXd& alpha;
  Eigen::Index p;
  Eigen::Index q;
  double floor;
  unsigned parts;

  void operator()(const double* xrow_strided, Eigen::Index stride, double y, double w,
                  double& loss, double* score, double* hess) const {
    if (w == 0.0) return;
    double x[64];
    for (Eigen::Index j = 0; j < p; ++j) x[j] = xrow_strided[j * stride];

    double row[kMaxQ];
    for (Eigen::Index k = 0; k < q; ++k) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) acc += x[j] * alpha(j, k);
      row[k] = acc;
    }
    const Polynomial curve = basis.combine(row);
    const CrossingSet cs = crossing_set(curve, y);

    if (parts & kLoss) {
      // L = int_0^1 u (y - Q) du - int_S (y - Q) du
      double li = 0.5 * y - curve.times_u().integral(0.0, 1.0);
      for (std::size_t s = 0; s < cs.count; ++s) {
        const auto [lo, hi] = cs.intervals[s];
        li -= y * (hi - lo) - curve.integral(lo, hi);
      }
      loss += w * li;
    }

    if (parts & kScore) {
      // g = sum_S [B(hi) - B(lo)] - int_0^1 u b(u) du ; score = g (x) x
      double g[kMaxQ];
      double bh[kMaxQ];
      double bl[kMaxQ];
      const Eigen::VectorXd& m1 = basis.first_moment();
      for (Eigen::Index k = 0; k < q; ++k) g[k] = -m1(k);
      for (std::size_t s = 0; s < cs.count; ++s) {
        basis.eval_antiderivative_into(cs.intervals[s].hi, bh);
        basis.eval_antiderivative_into(cs.intervals[s].lo, bl);
        for (Eigen::Index k = 0; k < q; ++k) g[k] += bh[k] - bl[k];
      }
      for (Eigen::Index k = 0; k < q; ++k) {
        const double wg = w * g[k];
        for (Eigen::Index j = 0; j < p; ++j) score[k * p + j] += wg * x[j];
      }
    }

    if ((parts & kHessian) && cs.root_count > 0) {
      // sum over crossings of (b b' / |Q'|) (x) x x'
      double G[kMaxQ * kMaxQ] = {};
      double b[kMaxQ];
      const Polynomial slope = curve.derivative();
      for (std::size_t r = 0; r < cs.root_count; ++r) {
        const double u = cs.roots[r];
        basis.eval_into(u, b);
        const double inv = 1.0 / std::max(std::abs(slope(u)), floor);
        for (Eigen::Index k = 0; k < q; ++k)
          for (Eigen::Index l = 0; l < q; ++l) G[k * q + l] += b[k] * b[l] * inv;
      }
      const Eigen::Index dim = p * q;
      for (Eigen::Index l = 0; l < q; ++l) {
        for (Eigen::Index k = 0; k < q; ++k) {
          const double gkl = w * G[k * q + l];
          if (gkl == 0.0) continue;
          for (Eigen::Index j2 = 0; j2 < p; ++j2) {
            double* col = hess + (l * p + j2) * dim + k * p;
            const double c = gkl * x[j2];
            for (Eigen::Index j1 = 0; j1 < p; ++j1) col[j1] += c * x[j1];
          }
        }
      }
    }
  }
};

void check_sizes(const ObjectiveInputs& in) {
  if (in.X.rows() != in.y.size() || in.X.rows() != in.weights.size()) {
    throw DataError("design, response and weights differ in length");
  }
  if (in.X.cols() != in.alpha.p()) throw DataError("alpha rows do not match design columns");
  if (in.alpha.q() != static_cast<Eigen::Index>(in.basis.size())) {
    throw DataError("alpha columns do not match basis size");
  }
  if (in.X.cols() > 64 || in.alpha.q() > static_cast<Eigen::Index>(kMaxQ)) {
    throw DataError("kernel supports at most 64 design columns and 32 basis components");
  }
}

ObjectiveTerms zero_terms(Eigen::Index dim, unsigned parts) {
  ObjectiveTerms t;
  if (parts & kScore) t.score = Eigen::VectorXd::Zero(dim);
  if (parts & kHessian) t.hessian = Eigen::MatrixXd::Zero(dim, dim);
  return t;
}

}  // namespace

ObjectiveTerms accumulate_serial(const ObjectiveInputs& in, unsigned parts) {
  check_sizes(in);
  const Eigen::Index p = in.X.cols();
  const Eigen::Index q = in.alpha.q();
  ObjectiveTerms t = zero_terms(p * q, parts);
  const ObservationAccumulator acc{in.basis, in.alpha.matrix(), p, q, in.derivative_floor, parts};
  const Eigen::Index stride = in.X.outerStride();
  for (Eigen::Index i = 0; i < in.X.rows(); ++i) {
    acc(&in.X(i, 0), stride, in.y(i), in.weights(i), t.loss, t.score.data(), t.hessian.data());
  }
  return t;
}

ObjectiveTerms accumulate_parallel(const ObjectiveInputs& in, unsigned parts) {
  check_sizes(in);
  const Eigen::Index p = in.X.cols();
  const Eigen::Index q = in.alpha.q();
  const Eigen::Index dim = p * q;
  const Eigen::Index n = in.X.rows();
  const Eigen::Index blocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<ObjectiveTerms> partial(static_cast<std::size_t>(blocks));
  const ObservationAccumulator acc{in.basis, in.alpha.matrix(), p, q, in.derivative_floor, parts};
  const Eigen::Index stride = in.X.outerStride();

#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    ObjectiveTerms t = zero_terms(dim, parts);
    const Eigen::Index end = std::min(n, (b + 1) * kBlockSize);
    for (Eigen::Index i = b * kBlockSize; i < end; ++i) {
      acc(&in.X(i, 0), stride, in.y(i), in.weights(i), t.loss, t.score.data(), t.hessian.data());
    }
    partial[static_cast<std::size_t>(b)] = std::move(t);
  }

  ObjectiveTerms total = zero_terms(dim, parts);
  for (const auto& t : partial) {
    total.loss += t.loss;
    if (parts & kScore) total.score += t.score;
    if (parts & kHessian) total.hessian += t.hessian;
  }
  return total;
}

namespace {

void fill_observation_score(const ObservationAccumulator& acc, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& y, Eigen::Index i, Eigen::MatrixXd& out) {
  double dummy = 0.0;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(out.cols());
  acc(&X(i, 0), X.outerStride(), y(i), 1.0, dummy, s.data(), nullptr);
  out.row(i) = s.transpose();
}

}  // namespace

Eigen::MatrixXd observation_scores_serial(const CoefMatrix& alpha, const Eigen::MatrixXd& X,
                                          const Eigen::VectorXd& y, const Basis& basis) {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(X.rows());
  check_sizes({alpha, X, y, ones, basis});
  Eigen::MatrixXd out(X.rows(), alpha.p() * alpha.q());
  const ObservationAccumulator acc{basis, alpha.matrix(), alpha.p(), alpha.q(), 1e-6, kScore};
  for (Eigen::Index i = 0; i < X.rows(); ++i) fill_observation_score(acc, X, y, i, out);
  return out;
}

Eigen::MatrixXd observation_scores_parallel(const CoefMatrix& alpha, const Eigen::MatrixXd& X,
                                            const Eigen::VectorXd& y, const Basis& basis) {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(X.rows());
  check_sizes({alpha, X, y, ones, basis});
  Eigen::MatrixXd out(X.rows(), alpha.p() * alpha.q());
  const ObservationAccumulator acc{basis, alpha.matrix(), alpha.p(), alpha.q(), 1e-6, kScore};
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < X.rows(); ++i) fill_observation_score(acc, X, y, i, out);
  return out;
}

}  // namespace kernels
}  // namespace extremile
