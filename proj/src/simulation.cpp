#include "extremile/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>

#include "extremile/error.hpp"
#include "extremile/estimators.hpp"
#include "extremile/extremile_measure.hpp"
#include "extremile/inference.hpp"

namespace extremile {

namespace {

template <typename E, std::size_t K>
E parse_enum(const std::string& s, const std::pair<const char*, E> (&table)[K], const char* what) {
  for (const auto& [name, v] : table)
    if (s == name) return v;
  std::string allowed;
  for (const auto& [name, v] : table) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  throw ConfigError(std::string("unknown ") + what + " '" + s + "' (expected one of: " + allowed +
                    ")");
}

template <typename E, std::size_t K>
std::string enum_name(E v, const std::pair<const char*, E> (&table)[K]) {
  for (const auto& [name, e] : table)
    if (e == v) return name;
  return "?";
}

constexpr std::pair<const char*, Dgp> kDgps[] = {{"linear_41", Dgp::linear_41},
                                                  {"nonlinear_42", Dgp::nonlinear_42}};
constexpr std::pair<const char*, ErrorLaw> kLaws[] = {{"normal", ErrorLaw::normal},
                                                       {"student_t5", ErrorLaw::student_t5},
                                                       {"uniform01", ErrorLaw::uniform01}};
constexpr std::pair<const char*, SigmaCase> kSigmas[] = {{"constant_0.5", SigmaCase::constant_05},
                                                          {"hetero_sqrt", SigmaCase::hetero_sqrt}};
constexpr std::pair<const char*, PairSum> kPairs[] = {
    {"ordered_with_diagonal", PairSum::ordered_with_diagonal},
    {"ordered_off_diagonal", PairSum::ordered_off_diagonal},
    {"unordered_with_diagonal", PairSum::unordered_with_diagonal},
    {"unordered_off_diagonal", PairSum::unordered_off_diagonal},
    {"diagonal_only", PairSum::diagonal_only}};

enum Stream : std::uint64_t { kLabeledX = 0, kLabeledEps = 1, kUnlabeledX = 2 };

double sigma_of(SigmaCase c, double x1, double x2) {
  return c == SigmaCase::constant_05 ? 0.5
                                     : 0.4 * std::sqrt(1.0 + std::abs(x1) + std::abs(x2));
}

Eigen::MatrixXd linear_design(std::mt19937_64& rng, int rows) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd X(rows, 3);
  for (int i = 0; i < rows; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = unif(rng);
    X(i, 2) = unif(rng);
  }
  return X;
}

Eigen::MatrixXd normal_design(std::mt19937_64& rng, int rows) {
  std::normal_distribution<double> norm(0.0, 1.0);
  Eigen::MatrixXd X(rows, 5);
  for (int i = 0; i < rows; ++i) {
    X(i, 0) = 1.0;
    for (int j = 1; j < 5; ++j) X(i, j) = norm(rng);
  }
  return X;
}

double pair_sum(PairSum ps, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const double s = x.sum();
  const double sq = x.squaredNorm();
  switch (ps) {
    case PairSum::ordered_with_diagonal: return s * s;
    case PairSum::ordered_off_diagonal: return s * s - sq;
    case PairSum::unordered_with_diagonal: return 0.5 * (s * s + sq);
    case PairSum::unordered_off_diagonal: return 0.5 * (s * s - sq);
    case PairSum::diagonal_only: return sq;
  }
  return 0.0;
}

struct Linear41Draw {
  Eigen::MatrixXd X;
  Eigen::VectorXd eps;
  Eigen::VectorXd sigma;
};

Linear41Draw draw_linear_41(const ScenarioConfig& c, int rep) {
  auto rx = make_rng(c.seed, static_cast<std::uint64_t>(rep), kLabeledX);
  auto re = make_rng(c.seed, static_cast<std::uint64_t>(rep), kLabeledEps);
  Linear41Draw d{linear_design(rx, c.n), Eigen::VectorXd(c.n), Eigen::VectorXd(c.n)};
  for (int i = 0; i < c.n; ++i) {
    d.eps(i) = draw_error(c.error_law, re);
    d.sigma(i) = sigma_of(c.sigma_case, d.X(i, 1), d.X(i, 2));
  }
  return d;
}

LabeledDataset realize_41(const ScenarioConfig& c, const Linear41Draw& d, double tau) {
  const double e_tau = error_extremile(c.error_law, tau, c.seed, c.e_tau_sample_size);
  Eigen::VectorXd y = d.X * linear_41_beta();
  y.array() += d.sigma.array() * (d.eps.array() - e_tau);
  return LabeledDataset(d.X, std::move(y));
}

// One replication's estimates: [tau][estimator] -> beta (and se).
struct RepOutcome {
  bool ok = true;
  bool sl_failed = false;
  bool ssl_failed = false;
  bool oe_failed = false;
  std::vector<std::vector<Eigen::VectorXd>> beta;
  std::vector<std::vector<Eigen::VectorXd>> se;
};

std::vector<Estimator> active_estimators(const ScenarioConfig& c) {
  std::vector<Estimator> es{Estimator::SL};
  if (c.run_ssl && c.N_unlabeled > 0) es.push_back(Estimator::SSL);
  if (c.run_oe) es.push_back(Estimator::OE);
  return es;
}

class ReplicationRunner {
 public:
  explicit ReplicationRunner(const ScenarioConfig& c)
      : c_(c), basis_(basis_from_name(c.basis)), estimators_(active_estimators(c)) {}

  const std::vector<Estimator>& estimators() const { return estimators_; }

  RepOutcome run(int rep) const {
    RepOutcome out;
    const std::size_t T = c_.tau_grid.size();
    out.beta.assign(T, std::vector<Eigen::VectorXd>(estimators_.size()));
    out.se.assign(T, std::vector<Eigen::VectorXd>(estimators_.size()));
    if (c_.dgp == Dgp::linear_41) {
      const Linear41Draw d = draw_linear_41(c_, rep);
      std::optional<UnlabeledDataset> unl;
      if (has(Estimator::SSL)) unl = gen_linear_41_unlabeled(c_, rep);
      for (std::size_t t = 0; t < T; ++t) {
        const LabeledDataset data = realize_41(c_, d, c_.tau_grid[t]);
        fit_all(data, unl ? &*unl : nullptr, out, t, t + 1);
      }
    } else {
      auto [data, unl] = gen_nonlinear_42(c_, rep);
      fit_all(data, has(Estimator::SSL) ? &unl : nullptr, out, 0, T);
    }
    out.ok = !(out.sl_failed || out.ssl_failed || out.oe_failed);
    return out;
  }

 private:
  bool has(Estimator e) const {
    for (Estimator x : estimators_)
      if (x == e) return true;
    return false;
  }

  std::size_t slot(Estimator e) const {
    for (std::size_t k = 0; k < estimators_.size(); ++k)
      if (estimators_[k] == e) return k;
    return 0;
  }

  // Fits every active estimator on one labeled sample and records betas for taus [t0, t1).
  void fit_all(const LabeledDataset& data, const UnlabeledDataset* unl, RepOutcome& out,
               std::size_t t0, std::size_t t1) const {
    try {
      const FitResult sl = fit_supervised(data, basis_, c_.solver);
      if (!sl.converged) throw ConvergenceError("supervised fit did not converge");
      std::optional<CovarianceReport> cov;
      if (c_.standard_errors) cov = supervised_covariance(sl.alpha, data, basis_);
      record(sl.alpha, cov, Estimator::SL, out, t0, t1);
    } catch (const Error&) {
      out.sl_failed = true;
    }
    if (unl) {
      try {
        const SslFit ssl =
            fit_semisupervised(data, *unl, basis_, c_.surrogate_degree, c_.solver);
        if (!ssl.fit.converged) throw ConvergenceError("semi-supervised fit did not converge");
        std::optional<CovarianceReport> cov;
        if (c_.standard_errors) {
          cov = semisupervised_covariance(ssl.fit.alpha, data, ssl.labeled_Z.Z,
                                          ssl.unlabeled_Z.Z, basis_);
        }
        record(ssl.fit.alpha, cov, Estimator::SSL, out, t0, t1);
      } catch (const Error&) {
        out.ssl_failed = true;
      }
    }
    if (has(Estimator::OE)) {
      try {
        const Eigen::VectorXd F = nw_cdf_at_data(data, c_.kernel);
        for (std::size_t t = t0; t < t1; ++t) {
          out.beta[t][slot(Estimator::OE)] = fit_oe(data, ExtremileOrder(c_.tau_grid[t]), F);
        }
      } catch (const Error&) {
        out.oe_failed = true;
      }
    }
  }

  void record(const CoefMatrix& alpha, const std::optional<CovarianceReport>& cov, Estimator e,
              RepOutcome& out, std::size_t t0, std::size_t t1) const {
    for (std::size_t t = t0; t < t1; ++t) {
      const ExtremileOrder order(c_.tau_grid[t]);
      out.beta[t][slot(e)] = beta_from_alpha(alpha, order, basis_).beta;
      if (cov) out.se[t][slot(e)] = cov->beta(order, basis_).se;
    }
  }

  const ScenarioConfig& c_;
  Basis basis_;
  std::vector<Estimator> estimators_;
};

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

EstimatorSummary summarize(Estimator e, std::vector<Eigen::VectorXd> betas,
                           const std::vector<Eigen::VectorXd>& ses,
                           const std::optional<Eigen::VectorXd>& target, Eigen::Index p) {
  EstimatorSummary s;
  s.estimator = e;
  const auto m = static_cast<Eigen::Index>(betas.size());
  s.estimates.resize(m, p);
  for (Eigen::Index r = 0; r < m; ++r) s.estimates.row(r) = betas[static_cast<std::size_t>(r)];
  if (!ses.empty()) {
    s.standard_errors.resize(m, p);
    for (Eigen::Index r = 0; r < m; ++r) s.standard_errors.row(r) = ses[static_cast<std::size_t>(r)];
    s.mean_se = s.standard_errors.colwise().mean().transpose();
  }
  if (m == 0) {
    s.mean = s.sd = s.evar = Eigen::VectorXd::Constant(p, nan());
    return s;
  }
  s.mean = s.estimates.colwise().mean().transpose();
  if (m > 1) {
    s.evar = ((s.estimates.rowwise() - s.mean.transpose()).array().square().colwise().sum() /
              static_cast<double>(m - 1))
                 .transpose();
  } else {
    s.evar = Eigen::VectorXd::Constant(p, nan());
  }
  s.sd = s.evar.cwiseSqrt();
  if (target) {
    Eigen::VectorXd tae(m);
    for (Eigen::Index r = 0; r < m; ++r)
      tae(r) = (s.estimates.row(r).transpose() - *target).cwiseAbs().sum();
    s.tae_mean = tae.mean();
    s.tae_sd = m > 1 ? std::sqrt((tae.array() - *s.tae_mean).square().sum() / (m - 1)) : nan();
  }
  return s;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string mean_sd(double mean, double sd) {
  return fmt("%.3f", mean) + " (" + fmt("%.3f", sd) + ")";
}

std::string pct(double v) { return fmt("%.1f", v) + "%"; }

}  // namespace

std::string to_string(Dgp v) { return enum_name(v, kDgps); }
std::string to_string(ErrorLaw v) { return enum_name(v, kLaws); }
std::string to_string(SigmaCase v) { return enum_name(v, kSigmas); }
std::string to_string(PairSum v) { return enum_name(v, kPairs); }
Dgp parse_dgp(const std::string& s) { return parse_enum(s, kDgps, "dgp"); }
ErrorLaw parse_error_law(const std::string& s) { return parse_enum(s, kLaws, "error_law"); }
SigmaCase parse_sigma_case(const std::string& s) { return parse_enum(s, kSigmas, "sigma_case"); }
PairSum parse_pair_sum(const std::string& s) { return parse_enum(s, kPairs, "pair_sum"); }

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::SL: return "SL";
    case Estimator::SSL: return "SSL";
    case Estimator::OE: return "OE";
  }
  return "?";
}

void ScenarioConfig::validate() const {
  if (n < 50) throw ConfigError("n must be at least 50");
  if (N_unlabeled < 0) throw ConfigError("N_unlabeled must be non-negative");
  if (replications < 1) throw ConfigError("replications must be at least 1");
  if (tau_grid.empty()) throw ConfigError("tau_grid must not be empty");
  for (double t : tau_grid)
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("tau_grid values must lie in (0,1)");
  if (e_tau_sample_size < 1) throw ConfigError("e_tau_sample_size must be positive");
  if (surrogate_degree < 1) throw ConfigError("surrogate_degree must be at least 1");
  basis_from_name(basis);
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t rep, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

double draw_error(ErrorLaw law, std::mt19937_64& rng) {
  switch (law) {
    case ErrorLaw::normal: return std::normal_distribution<double>(0.0, 1.0)(rng);
    case ErrorLaw::student_t5: return std::student_t_distribution<double>(5.0)(rng);
    case ErrorLaw::uniform01: return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  }
  return 0.0;
}

double error_extremile(ErrorLaw law, double tau, std::uint64_t seed, int sample_size) {
  using Key = std::tuple<int, double, std::uint64_t, int>;
  static std::mutex mu;
  static std::map<Key, double> cache;
  static std::map<std::tuple<int, std::uint64_t, int>, std::vector<double>> samples;
  std::lock_guard<std::mutex> lock(mu);
  const Key key{static_cast<int>(law), tau, seed, sample_size};
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  auto& sample = samples[{static_cast<int>(law), seed, sample_size}];
  if (sample.empty()) {
    // Stream ids above the replication range keep this sample apart from the data.
    auto rng = make_rng(seed, ~std::uint64_t{0}, 16 + static_cast<std::uint64_t>(law));
    sample.resize(static_cast<std::size_t>(sample_size));
    for (double& e : sample) e = draw_error(law, rng);
  }
  const double e = scalar_extremile(sample, ExtremileOrder(tau));
  cache.emplace(key, e);
  return e;
}

Eigen::VectorXd linear_41_beta() { return Eigen::Vector3d(1.0, 2.0, 3.0); }

LabeledDataset gen_linear_41(const ScenarioConfig& config, int rep, double tau) {
  return realize_41(config, draw_linear_41(config, rep), tau);
}

UnlabeledDataset gen_linear_41_unlabeled(const ScenarioConfig& config, int rep) {
  auto rng = make_rng(config.seed, static_cast<std::uint64_t>(rep), kUnlabeledX);
  return UnlabeledDataset(linear_design(rng, config.N_unlabeled), 3);
}

std::pair<LabeledDataset, UnlabeledDataset> gen_nonlinear_42(const ScenarioConfig& config,
                                                             int rep) {
  const auto r = static_cast<std::uint64_t>(rep);
  auto rx = make_rng(config.seed, r, kLabeledX);
  auto re = make_rng(config.seed, r, kLabeledEps);
  auto ru = make_rng(config.seed, r, kUnlabeledX);
  Eigen::MatrixXd X = normal_design(rx, config.n);
  Eigen::VectorXd y(config.n);
  const Eigen::Vector4d a1(0.5, 0.5, 0.5, 0.5);
  const Eigen::Vector4d a3(0.5, 0.5, 0.0, 0.0);
  for (int i = 0; i < config.n; ++i) {
    const Eigen::RowVector4d x = X.block<1, 4>(i, 1);
    const double eps = draw_error(config.error_law, re);
    y(i) = 1.0 + x.dot(a1) + 1.0 * pair_sum(config.pair_sum, x) + (1.0 + x.dot(a3)) * eps;
  }
  return {LabeledDataset(std::move(X), std::move(y)),
          UnlabeledDataset(normal_design(ru, config.N_unlabeled), 5)};
}

const EstimatorSummary* TauSummary::find(Estimator e) const {
  for (const auto& s : estimators)
    if (s.estimator == e) return &s;
  return nullptr;
}

ReplicationReport run_scenario(const ScenarioConfig& config) {
  config.validate();
  const ReplicationRunner runner(config);
  if (config.dgp == Dgp::linear_41) {
    // Fill the centering cache before the parallel section.
    for (double t : config.tau_grid)
      error_extremile(config.error_law, t, config.seed, config.e_tau_sample_size);
  }

  const int R = config.replications;
  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(R));
  std::exception_ptr failure;
  std::mutex failure_mu;
#pragma omp parallel for schedule(dynamic)
  for (int rep = 0; rep < R; ++rep) {
    try {
      outcomes[static_cast<std::size_t>(rep)] = runner.run(rep);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  ReplicationReport report;
  report.config = config;
  if (config.dgp == Dgp::linear_41) report.target = linear_41_beta();
  const Eigen::Index p = config.dgp == Dgp::linear_41 ? 3 : 5;
  for (const auto& o : outcomes) {
    (o.ok ? report.succeeded : report.failed) += 1;
    report.sl_failures += o.sl_failed;
    report.ssl_failures += o.ssl_failed;
    report.oe_failures += o.oe_failed;
  }

  const auto& ests = runner.estimators();
  for (std::size_t t = 0; t < config.tau_grid.size(); ++t) {
    TauSummary ts;
    ts.tau = config.tau_grid[t];
    for (std::size_t k = 0; k < ests.size(); ++k) {
      std::vector<Eigen::VectorXd> betas;
      std::vector<Eigen::VectorXd> ses;
      for (const auto& o : outcomes) {
        if (!o.ok) continue;
        betas.push_back(o.beta[t][k]);
        if (o.se[t][k].size() > 0) ses.push_back(o.se[t][k]);
      }
      ts.estimators.push_back(summarize(ests[k], std::move(betas), ses, report.target, p));
    }
    const auto* sl = ts.find(Estimator::SL);
    if (const auto* oe = ts.find(Estimator::OE); oe && sl->tae_mean && oe->tae_mean) {
      ts.prtae = (*oe->tae_mean - *sl->tae_mean) / *sl->tae_mean * 100.0;
    }
    if (const auto* ssl = ts.find(Estimator::SSL)) {
      Eigen::VectorXd pare(p);
      for (Eigen::Index j = 0; j < p; ++j) {
        pare(j) = ssl->evar(j) > 0.0 ? (sl->evar(j) - ssl->evar(j)) / ssl->evar(j) * 100.0 : nan();
      }
      ts.pare = pare;
    }
    report.taus.push_back(std::move(ts));
  }
  return report;
}

PareBuckets pare_summary(const std::vector<double>& pare_values) {
  PareBuckets b;
  std::size_t a20 = 0;
  std::size_t b10 = 0;
  std::size_t a50 = 0;
  for (double v : pare_values) {
    if (!std::isfinite(v)) continue;
    ++b.cells;
    a20 += v > 20.0;
    b10 += v < 10.0;
    a50 += v > 50.0;
  }
  if (b.cells > 0) {
    const auto c = static_cast<double>(b.cells);
    b.above_20 = static_cast<double>(a20) / c;
    b.below_10 = static_cast<double>(b10) / c;
    b.above_50 = static_cast<double>(a50) / c;
  }
  return b;
}

PareBuckets pare_summary(const std::vector<ReplicationReport>& reports) {
  std::vector<double> values;
  for (const auto& r : reports)
    for (const auto& t : r.taus)
      if (t.pare)
        for (Eigen::Index j = 0; j < t.pare->size(); ++j) values.push_back((*t.pare)(j));
  return pare_summary(values);
}

void write_tae_table(std::ostream& os, const std::vector<ReplicationReport>& reports) {
  if (reports.empty()) return;
  os << "scenario,error,sigma,method";
  for (double t : reports.front().config.tau_grid) os << ",tau=" << fmt("%g", t);
  os << '\n';
  for (const auto& r : reports) {
    const std::string head = r.config.name + "," + to_string(r.config.error_law) + "," +
                             to_string(r.config.sigma_case) + ",";
    for (Estimator e : {Estimator::OE, Estimator::SL, Estimator::SSL}) {
      if (!r.taus.front().find(e) || !r.taus.front().find(e)->tae_mean) continue;
      os << head << "TAE_" << to_string(e);
      for (const auto& t : r.taus) {
        const auto* s = t.find(e);
        os << ',' << mean_sd(*s->tae_mean, *s->tae_sd);
      }
      os << '\n';
    }
    if (r.taus.front().prtae) {
      os << head << "PRTAE";
      for (const auto& t : r.taus) os << ',' << pct(*t.prtae);
      os << '\n';
    }
  }
}

void write_ssl_table(std::ostream& os, const std::vector<ReplicationReport>& reports) {
  if (reports.empty()) return;
  os << "tau,coefficient,SL";
  for (const auto& r : reports) os << ",SSL N=" << r.config.N_unlabeled;
  for (const auto& r : reports) os << ",PARE N=" << r.config.N_unlabeled;
  os << '\n';
  const auto& base = reports.front();
  for (std::size_t t = 0; t < base.taus.size(); ++t) {
    const auto* sl = base.taus[t].find(Estimator::SL);
    for (Eigen::Index j = 0; j < sl->mean.size(); ++j) {
      os << fmt("%g", base.taus[t].tau) << ",beta" << j << ',' << mean_sd(sl->mean(j), sl->sd(j));
      for (const auto& r : reports) {
        const auto* s = r.taus[t].find(Estimator::SSL);
        os << ',' << (s ? mean_sd(s->mean(j), s->sd(j)) : std::string("NA"));
      }
      for (const auto& r : reports) {
        os << ',' << (r.taus[t].pare ? pct((*r.taus[t].pare)(j)) : std::string("NA"));
      }
      os << '\n';
    }
  }
}

void write_pare_buckets(std::ostream& os, const PareBuckets& b) {
  os << "bucket,fraction\n";
  os << "cells," << b.cells << '\n';
  os << "PARE>20%," << fmt("%.3f", b.above_20) << '\n';
  os << "PARE<10%," << fmt("%.3f", b.below_10) << '\n';
  os << "PARE>50%," << fmt("%.3f", b.above_50) << '\n';
}

void write_summary_long(std::ostream& os, const std::vector<ReplicationReport>& reports) {
  os << "scenario,tau,estimator,coordinate,mean,sd,evar,mean_se,succeeded,failed\n";
  for (const auto& r : reports) {
    for (const auto& t : r.taus) {
      for (const auto& s : t.estimators) {
        for (Eigen::Index j = 0; j < s.mean.size(); ++j) {
          os << r.config.name << ',' << fmt("%g", t.tau) << ',' << to_string(s.estimator) << ','
             << j << ',' << fmt("%.6f", s.mean(j)) << ',' << fmt("%.6f", s.sd(j)) << ','
             << fmt("%.6f", s.evar(j)) << ','
             << (s.mean_se.size() ? fmt("%.6f", s.mean_se(j)) : std::string("NA")) << ','
             << r.succeeded << ',' << r.failed << '\n';
        }
      }
    }
  }
}

}  // namespace extremile
