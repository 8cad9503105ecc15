#include "extremile/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "extremile/baseline_oe.hpp"
#include "extremile/error.hpp"
#include "extremile/estimators.hpp"
#include "extremile/inference.hpp"
#include "extremile/io.hpp"
#include "extremile/simulation.hpp"

namespace extremile {

using nlohmann::json;

namespace {

struct DataOptions {
  std::string data;
  std::string response;
  std::vector<std::string> covariates;
  bool no_intercept = false;
};

struct FitOptions {
  DataOptions d;
  std::vector<double> taus{0.1, 0.3, 0.5, 0.7, 0.9};
  std::string basis = "legendre3";
  bool no_se = false;
  std::string output;
  SolverConfig solver;
  InferenceConfig inference;
  int surrogate_degree = 2;
  std::vector<double> bandwidths;
  bool leave_one_out = false;
  bool no_clip = false;
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--data", d.data, "CSV file with a header row")->required();
  cmd->add_option("--response", d.response, "Response column (blank cells mark unlabeled rows)")
      ->required();
  cmd->add_option("--covariates", d.covariates, "Covariate columns (default: all others)")
      ->delimiter(',');
  cmd->add_flag("--no-intercept", d.no_intercept, "Do not prepend an intercept column");
}

void add_fit_options(CLI::App* cmd, FitOptions& o, bool iqr) {
  add_data_options(cmd, o.d);
  cmd->add_option("--taus", o.taus, "Extremile levels in (0,1)")->delimiter(',');
  cmd->add_option("--output,-o", o.output, "Write the fit artifact here instead of stdout");
  if (!iqr) return;
  cmd->add_option("--basis", o.basis, "Quantile-level basis")->capture_default_str();
  cmd->add_flag("--no-se", o.no_se, "Skip sandwich standard errors");
  cmd->add_option("--max-iter", o.solver.max_iter)->capture_default_str();
  cmd->add_option("--grad-tol", o.solver.grad_tol)->capture_default_str();
  cmd->add_option("--derivative-floor", o.solver.derivative_floor)->capture_default_str();
  cmd->add_option("--grid-nodes", o.inference.grid_nodes, "Quadrature nodes for the bread matrix")
      ->capture_default_str();
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

LabeledDataset require_labeled(const LoadedData& ld) {
  if (!ld.labeled) throw DataError("no labeled rows");
  return *ld.labeled;
}

void check_floor(const CovarianceReport& cov, json& diag, std::ostream& err) {
  diag["floored_fraction"] = cov.bread.floored_fraction;
  if (cov.bread.floored_fraction > 0.01) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "warning: derivative floor applied at %.1f%% of bread quadrature points; "
                  "standard errors may be unreliable\n",
                  100.0 * cov.bread.floored_fraction);
    err << buf;
  }
}

std::vector<ExtremileCoef> coefficients(const CoefMatrix& alpha, const Basis& basis,
                                        const std::vector<double>& taus,
                                        const std::optional<CovarianceReport>& cov) {
  std::vector<ExtremileCoef> out;
  for (double t : taus) {
    const ExtremileOrder order(t);
    ExtremileCoef c = beta_from_alpha(alpha, order, basis);
    c.tau = t;
    if (cov) c.se = cov->beta(order, basis).se;
    out.push_back(std::move(c));
  }
  return out;
}

json fit_diagnostics(const FitResult& f, Eigen::Index n, Eigen::Index N) {
  return {{"n", n},
          {"N", N},
          {"converged", f.converged},
          {"iterations", f.iterations},
          {"objective", f.objective},
          {"grad_inf_norm", f.grad_inf_norm},
          {"monotone_fraction", f.monotone_fraction},
          {"nonconvex_detected", f.nonconvex_detected}};
}

int finish_fit(const FitArtifact& a, const FitResult& f, const FitOptions& o, std::ostream& out) {
  emit(o.output, to_json(a).dump(2) + "\n", out);
  if (!f.converged) {
    throw ConvergenceError("solver stopped after " + std::to_string(f.iterations) +
                           " iterations with gradient norm " + std::to_string(f.grad_inf_norm));
  }
  return 0;
}

int cmd_fit(const FitOptions& o, std::ostream& out, std::ostream& err) {
  const LoadedData ld = load_csv(o.d.data, o.d.response, o.d.covariates, !o.d.no_intercept);
  const LabeledDataset data = require_labeled(ld);
  const Basis basis = basis_from_name(o.basis);
  const FitResult f = fit_supervised(data, basis, o.solver);
  FitArtifact a;
  a.estimator = "SL";
  a.basis = o.basis;
  a.design_columns = ld.design_columns;
  a.alpha = f.alpha.matrix();
  a.diagnostics = fit_diagnostics(f, data.n(), 0);
  a.diagnostics["unlabeled_rows_ignored"] = ld.unlabeled.N();
  std::optional<CovarianceReport> cov;
  if (!o.no_se && f.converged) {
    cov = supervised_covariance(f.alpha, data, basis, o.inference);
    check_floor(*cov, a.diagnostics, err);
  }
  a.coefficients = coefficients(f.alpha, basis, o.taus, cov);
  return finish_fit(a, f, o, out);
}

int cmd_ssl_fit(const FitOptions& o, std::ostream& out, std::ostream& err) {
  const LoadedData ld = load_csv(o.d.data, o.d.response, o.d.covariates, !o.d.no_intercept);
  const LabeledDataset data = require_labeled(ld);
  const Basis basis = basis_from_name(o.basis);
  const SslFit s = fit_semisupervised(data, ld.unlabeled, basis, o.surrogate_degree, o.solver);
  FitArtifact a;
  a.estimator = "SSL";
  a.basis = o.basis;
  a.design_columns = ld.design_columns;
  a.alpha = s.fit.alpha.matrix();
  a.diagnostics = fit_diagnostics(s.fit, data.n(), ld.unlabeled.N());
  a.diagnostics["surrogate_degree"] = o.surrogate_degree;
  a.diagnostics["omega_sum"] = s.weights.sum;
  a.diagnostics["negative_omega_count"] = s.weights.negative_count;
  a.diagnostics["surrogate_condition_number"] = s.weights.condition_number;
  std::optional<CovarianceReport> cov;
  if (!o.no_se && s.fit.converged) {
    cov = semisupervised_covariance(s.fit.alpha, data, s.labeled_Z.Z, s.unlabeled_Z.Z, basis,
                                    o.inference);
    check_floor(*cov, a.diagnostics, err);
  }
  a.coefficients = coefficients(s.fit.alpha, basis, o.taus, cov);
  return finish_fit(a, s.fit, o, out);
}

int cmd_oe_fit(const FitOptions& o, std::ostream& out) {
  const LoadedData ld = load_csv(o.d.data, o.d.response, o.d.covariates, !o.d.no_intercept);
  const LabeledDataset data = require_labeled(ld);
  KernelConfig k;
  k.bandwidths = o.bandwidths;
  k.leave_one_out = o.leave_one_out;
  k.clip = !o.no_clip;
  const Eigen::VectorXd F = nw_cdf_at_data(data, k);
  FitArtifact a;
  a.estimator = "OE";
  a.basis = "none";
  a.design_columns = ld.design_columns;
  a.diagnostics = {{"n", data.n()}, {"leave_one_out", k.leave_one_out}, {"clip", k.clip}};
  for (double t : o.taus) {
    ExtremileCoef c;
    c.tau = t;
    c.beta = fit_oe(data, ExtremileOrder(t), F);
    a.coefficients.push_back(std::move(c));
  }
  emit(o.output, to_json(a).dump(2) + "\n", out);
  return 0;
}

std::string format_g(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

int cmd_predict(const std::string& fit_path, const std::string& data_path,
                const std::string& output, std::ostream& out) {
  const FitArtifact a = fit_artifact_from_json(read_json_file(fit_path));
  const Eigen::MatrixXd X = design_from_table(read_csv(data_path), a.design_columns);
  std::string text = "row";
  for (const auto& c : a.coefficients) text += ",tau=" + format_g(c.tau, 15);
  text += '\n';
  std::vector<Eigen::VectorXd> preds;
  for (const auto& c : a.coefficients) preds.push_back(predict(c, X));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    text += std::to_string(i + 1);
    for (const auto& p : preds) text += "," + format_g(p(i), 17);
    text += '\n';
  }
  emit(output, text, out);
  return 0;
}

// Reports that can share one coefficient table: same design, differing only in N.
std::string ssl_group_key(const ScenarioConfig& c) {
  json k = to_json(c);
  k.erase("N_unlabeled");
  k.erase("name");
  return k.dump();
}

std::vector<std::string> write_tables(const std::vector<ReplicationReport>& reports,
                                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  auto open = [&](const std::string& name) {
    written.push_back((dir / name).string());
    auto f = std::make_unique<std::ofstream>(dir / name, std::ios::binary);
    if (!*f) throw ConfigError("cannot write " + written.back());
    return f;
  };

  std::vector<ReplicationReport> linear;
  std::map<std::string, std::vector<ReplicationReport>> ssl_groups;
  std::vector<std::string> group_order;
  for (const auto& r : reports) {
    if (r.config.dgp == Dgp::linear_41) linear.push_back(r);
    bool has_ssl = false;
    for (const auto& t : r.taus) has_ssl = has_ssl || t.pare.has_value();
    if (has_ssl) {
      const std::string key = ssl_group_key(r.config);
      if (!ssl_groups.count(key)) group_order.push_back(key);
      ssl_groups[key].push_back(r);
    }
  }
  if (!linear.empty()) write_tae_table(*open("tae_table.csv"), linear);
  for (std::size_t g = 0; g < group_order.size(); ++g) {
    auto& group = ssl_groups[group_order[g]];
    std::stable_sort(group.begin(), group.end(), [](const auto& a, const auto& b) {
      return a.config.N_unlabeled < b.config.N_unlabeled;
    });
    write_ssl_table(*open("ssl_table_" + std::to_string(g + 1) + "_" +
                          to_string(group.front().config.error_law) + ".csv"),
                    group);
  }
  if (!group_order.empty()) write_pare_buckets(*open("pare_buckets.csv"), pare_summary(reports));
  write_summary_long(*open("summary.csv"), reports);
  return written;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir,
                 std::optional<int> replications, std::optional<std::uint64_t> seed,
                 bool full_scale, std::ostream& out, std::ostream& err) {
  std::vector<ScenarioConfig> scenarios = scenarios_from_json(read_json_file(scenario_path));
  std::vector<ReplicationReport> reports;
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  std::map<std::string, int> seen;
  for (auto& c : scenarios) {
    if (full_scale) c.replications = 500;
    if (replications) c.replications = *replications;
    if (seed) c.seed = *seed;
    c.validate();
    if (seen[c.name]++ > 0) c.name += "_" + std::to_string(seen[c.name]);
    reports.push_back(run_scenario(c));
    const auto& r = reports.back();
    const std::string path = (dir / (c.name + ".report.json")).string();
    write_json_file(path, to_json(r));
    out << path << '\n';
    if (r.failed > 0) {
      err << "warning: " << c.name << ": " << r.failed << " of " << c.replications
          << " replications excluded after estimator failures\n";
    }
  }
  for (const auto& p : write_tables(reports, dir)) out << p << '\n';
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_dir,
               std::ostream& out) {
  std::vector<ReplicationReport> reports;
  for (const auto& p : inputs) reports.push_back(report_from_json(read_json_file(p)));
  for (const auto& p : write_tables(reports, out_dir)) out << p << '\n';
  const PareBuckets b = pare_summary(reports);
  if (b.cells > 0) write_pare_buckets(out, b);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Integrated quantile regression estimators of conditional extremiles", "extremile"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (0: runtime default)");

  FitOptions fit;
  FitOptions ssl;
  FitOptions oe;
  add_fit_options(app.add_subcommand("fit", "Supervised fit"), fit, true);
  auto* ssl_cmd = app.add_subcommand("ssl-fit", "Semi-supervised fit (blank responses = unlabeled)");
  add_fit_options(ssl_cmd, ssl, true);
  ssl_cmd->add_option("--surrogate-degree", ssl.surrogate_degree)->capture_default_str();
  ssl_cmd->add_flag("--literal-unlabeled-term", ssl.inference.literal_unlabeled_term,
                    "Use (1/N) instead of (n/N)(1/N) on the unlabeled covariance term");
  auto* oe_cmd = app.add_subcommand("oe-fit", "Kernel-weighted least-squares baseline");
  add_fit_options(oe_cmd, oe, false);
  oe_cmd->add_option("--bandwidths", oe.bandwidths, "One per non-constant covariate")
      ->delimiter(',');
  oe_cmd->add_flag("--leave-one-out", oe.leave_one_out);
  oe_cmd->add_flag("--no-clip", oe.no_clip);

  std::string fit_path;
  std::string pred_data;
  std::string pred_out;
  auto* pred_cmd = app.add_subcommand("predict", "Apply a fit artifact to new covariate rows");
  pred_cmd->add_option("--fit", fit_path, "Fit artifact JSON")->required();
  pred_cmd->add_option("--data", pred_data, "CSV with the artifact's covariate columns")
      ->required();
  pred_cmd->add_option("--output,-o", pred_out);

  std::string scenario_path;
  std::string sim_dir = ".";
  std::optional<int> sim_reps;
  std::optional<std::uint64_t> sim_seed;
  bool full_scale = false;
  auto* sim_cmd = app.add_subcommand("simulate", "Run simulation scenarios");
  sim_cmd->add_option("--scenario", scenario_path, "Scenario JSON (object or array)")->required();
  sim_cmd->add_option("--out-dir", sim_dir)->capture_default_str();
  sim_cmd->add_option("--replications", sim_reps, "Override replications");
  sim_cmd->add_option("--seed", sim_seed, "Override the master seed");
  sim_cmd->add_flag("--full", full_scale, "Use 500 replications");

  std::vector<std::string> report_inputs;
  std::string report_dir = ".";
  auto* rep_cmd = app.add_subcommand("report", "Tables and PARE buckets from saved reports");
  rep_cmd->add_option("inputs", report_inputs, "Report JSON files")->required();
  rep_cmd->add_option("--out-dir", report_dir)->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: E_CONFIG: " << e.what() << '\n';
    return 4;
  }

  try {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif
    if (app.got_subcommand("fit")) return cmd_fit(fit, out, err);
    if (app.got_subcommand("ssl-fit")) return cmd_ssl_fit(ssl, out, err);
    if (app.got_subcommand("oe-fit")) return cmd_oe_fit(oe, out);
    if (app.got_subcommand("predict")) return cmd_predict(fit_path, pred_data, pred_out, out);
    if (app.got_subcommand("simulate")) {
      return cmd_simulate(scenario_path, sim_dir, sim_reps, sim_seed, full_scale, out, err);
    }
    if (app.got_subcommand("report")) return cmd_report(report_inputs, report_dir, out);
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: E_CONFIG: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    err << "error: E_INTERNAL: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace extremile
