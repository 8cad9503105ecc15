#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "extremile/baseline_oe.hpp"
#include "extremile/iqr_solver.hpp"
#include "extremile/model.hpp"

namespace extremile {

enum class Dgp { linear_41, nonlinear_42 };
enum class ErrorLaw { normal, student_t5, uniform01 };
enum class SigmaCase { constant_05, hetero_sqrt };
/// Index convention for the pairwise-product term of the nonlinear design.
enum class PairSum { ordered_with_diagonal, ordered_off_diagonal, unordered_with_diagonal,
                     unordered_off_diagonal, diagonal_only };

std::string to_string(Dgp v);
std::string to_string(ErrorLaw v);
std::string to_string(SigmaCase v);
std::string to_string(PairSum v);
/// Parsers throw ConfigError on unknown names.
Dgp parse_dgp(const std::string& s);
ErrorLaw parse_error_law(const std::string& s);
SigmaCase parse_sigma_case(const std::string& s);
PairSum parse_pair_sum(const std::string& s);

struct ScenarioConfig {
  std::string name = "scenario";
  Dgp dgp = Dgp::linear_41;
  ErrorLaw error_law = ErrorLaw::normal;
  SigmaCase sigma_case = SigmaCase::constant_05;
  int n = 500;
  int N_unlabeled = 0;
  std::vector<double> tau_grid{0.1, 0.3, 0.5, 0.7, 0.9};
  int replications = 100;
  std::uint64_t seed = 1;
  int e_tau_sample_size = 1'000'000;

  PairSum pair_sum = PairSum::ordered_with_diagonal;
  bool run_oe = true;
  bool run_ssl = true;
  /// Sandwich standard errors for SL (and SSL) in every replication.
  bool standard_errors = false;
  int surrogate_degree = 2;
  std::string basis = "legendre3";
  SolverConfig solver;
  KernelConfig kernel;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

/// Independent generator for (seed, replication, stream); identical inputs give
/// identical streams regardless of call order.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t rep, std::uint64_t stream);

double draw_error(ErrorLaw law, std::mt19937_64& rng);

/// Scalar extremile of a simulated error sample of `sample_size` draws, cached
/// per (law, tau, seed, sample_size). Thread-safe.
double error_extremile(ErrorLaw law, double tau, std::uint64_t seed, int sample_size);

/// True coefficients of the linear design, (1, 2, 3).
Eigen::VectorXd linear_41_beta();

/// Linear design: X = (1, U, U), Y = X'beta0 + sigma(X)(eps - e_tau).
/// Covariates and errors depend only on (seed, rep); tau enters through e_tau.
LabeledDataset gen_linear_41(const ScenarioConfig& config, int rep, double tau);
/// Unlabeled covariates for the linear design (N_unlabeled rows).
UnlabeledDataset gen_linear_41_unlabeled(const ScenarioConfig& config, int rep);

/// Nonlinear design with working design (1, X1..X4).
std::pair<LabeledDataset, UnlabeledDataset> gen_nonlinear_42(const ScenarioConfig& config,
                                                             int rep);

enum class Estimator { SL, SSL, OE };
std::string to_string(Estimator e);

struct EstimatorSummary {
  Estimator estimator = Estimator::SL;
  /// Successful replications only, one row per replication.
  Eigen::MatrixXd estimates;
  /// Estimated standard errors per replication (empty unless requested).
  Eigen::MatrixXd standard_errors;
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  /// Empirical variance per coordinate (divisor count - 1).
  Eigen::VectorXd evar;
  Eigen::VectorXd mean_se;
  /// Present when the scenario has a known target.
  std::optional<double> tae_mean;
  std::optional<double> tae_sd;
};

struct TauSummary {
  double tau = 0.5;
  std::vector<EstimatorSummary> estimators;
  /// (mean TAE_OE - mean TAE_SL) / mean TAE_SL * 100.
  std::optional<double> prtae;
  /// (EVar_SL - EVar_SSL) / EVar_SSL * 100 per coordinate; NaN where EVar_SSL = 0.
  std::optional<Eigen::VectorXd> pare;

  const EstimatorSummary* find(Estimator e) const;
};

struct ReplicationReport {
  ScenarioConfig config;
  std::vector<TauSummary> taus;
  std::optional<Eigen::VectorXd> target;
  int succeeded = 0;
  int failed = 0;
  /// Replications with an unconverged solver, per estimator (SL, SSL).
  int sl_failures = 0;
  int ssl_failures = 0;
  int oe_failures = 0;
};

/// Runs all replications in parallel; output is independent of thread count.
ReplicationReport run_scenario(const ScenarioConfig& config);

struct PareBuckets {
  std::size_t cells = 0;
  double above_20 = 0.0;
  double below_10 = 0.0;
  double above_50 = 0.0;
};

PareBuckets pare_summary(const std::vector<double>& pare_values);
PareBuckets pare_summary(const std::vector<ReplicationReport>& reports);

/// TAE layout: one block per report (rows TAE_OE, TAE_SL, PRTAE) with a column per tau.
void write_tae_table(std::ostream& os, const std::vector<ReplicationReport>& reports);
/// Coefficient layout: rows (tau, coefficient), SL column, then SSL and PARE per
/// report. Reports must share the labeled design and differ only in N.
void write_ssl_table(std::ostream& os, const std::vector<ReplicationReport>& reports);
void write_pare_buckets(std::ostream& os, const PareBuckets& b);
/// Long format: scenario, tau, estimator, coordinate, mean, sd, evar, mean_se.
void write_summary_long(std::ostream& os, const std::vector<ReplicationReport>& reports);

}  // namespace extremile
