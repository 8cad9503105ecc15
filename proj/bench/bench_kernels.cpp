// Serial versus OpenMP accumulation of loss, score and Hessian.
#include <benchmark/benchmark.h>

#include <omp.h>

#include <random>

#include "extremile/iqr_kernels.hpp"

using namespace extremile;

namespace {

struct Problem {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd w;
  CoefMatrix alpha;
  Basis basis = Basis::legendre3();
};

Problem make_problem(Eigen::Index n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd(0.0, 1.0);
  Problem p;
  p.X.resize(n, 5);
  p.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.X(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < 5; ++j) p.X(i, j) = nd(rng);
    p.y(i) = 1.0 + p.X.row(i).tail(4).sum() * 0.5 + nd(rng);
  }
  p.w = Eigen::VectorXd::Ones(n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 4);
  a.col(0) << 1.0, 0.5, 0.5, 0.5, 0.5;
  a(0, 1) = 2.0;
  a(1, 2) = 0.1;
  p.alpha = CoefMatrix(a);
  return p;
}

void run(benchmark::State& state, bool parallel) {
  const Problem p = make_problem(state.range(0));
  if (parallel) omp_set_num_threads(static_cast<int>(state.range(1)));
  const kernels::ObjectiveInputs in{p.alpha, p.X, p.y, p.w, p.basis};
  for (auto _ : state) {
    auto t = parallel ? kernels::accumulate_parallel(in, kernels::kAll)
                      : kernels::accumulate_serial(in, kernels::kAll);
    benchmark::DoNotOptimize(t.loss);
    benchmark::DoNotOptimize(t.hessian.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Serial(benchmark::State& state) { run(state, false); }
void BM_Parallel(benchmark::State& state) { run(state, true); }

}  // namespace

BENCHMARK(BM_Serial)->Arg(1000)->Arg(10000)->Arg(100000)->ArgName("n")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Parallel)
    ->ArgsProduct({{1000, 10000, 100000}, {1, 2, 4, 8}})
    ->ArgNames({"n", "threads"})
    ->Unit(benchmark::kMicrosecond)
    ->UseRealTime();

BENCHMARK_MAIN();
