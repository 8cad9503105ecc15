#include "extremile/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "extremile/error.hpp"

namespace extremile {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw DataError("unterminated quote on line " + std::to_string(line_no));
  out.push_back(trim(cur));
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::size_t column_index(const CsvTable& t, const std::string& name) {
  for (std::size_t j = 0; j < t.header.size(); ++j)
    if (t.header[j] == name) return j;
  throw DataError("column \"" + name + "\" not found in CSV header");
}

double cell_value(const CsvTable& t, std::size_t row, std::size_t col) {
  const std::string& s = t.rows[row][col];
  const auto v = parse_number(s);
  if (!v) {
    throw DataError((s.empty() ? std::string("missing value") : "non-numeric value '" + s + "'") +
                    " at row " + std::to_string(row + 1) + ", column \"" + t.header[col] + "\"");
  }
  return *v;
}

// NaN is stored as null so the output stays valid JSON.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double get_number(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

Eigen::VectorXd vec_from(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_number(j[i]);
  return v;
}

json mat_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

Eigen::MatrixXd mat_from(const json& j) {
  if (j.empty()) return {};
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != cols) {
      throw ConfigError("ragged matrix in JSON");
    }
    m.row(i) = vec_from(j[static_cast<std::size_t>(i)]).transpose();
  }
  return m;
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_line(line, line_no);
    if (t.header.empty()) {
      if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw DataError("line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw DataError("CSV input has no header row");
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

LoadedData load_csv(const CsvTable& table, const std::optional<std::string>& response,
                    const std::vector<std::string>& covariates, bool add_intercept) {
  std::optional<std::size_t> ycol;
  if (response) ycol = column_index(table, *response);
  std::vector<std::size_t> xcols;
  if (covariates.empty()) {
    for (std::size_t j = 0; j < table.header.size(); ++j)
      if (!ycol || j != *ycol) xcols.push_back(j);
  } else {
    for (const auto& c : covariates) xcols.push_back(column_index(table, c));
  }

  LoadedData out;
  if (add_intercept) out.design_columns.push_back("(intercept)");
  for (std::size_t j : xcols) out.design_columns.push_back(table.header[j]);
  const auto p = static_cast<Eigen::Index>(out.design_columns.size());
  if (p == 0) throw DataError("no covariate columns selected");

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    (ycol && !table.rows[r][*ycol].empty() ? out.labeled_rows : out.unlabeled_rows)
        .push_back(r + 1);
  }
  auto design = [&](const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), p);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      Eigen::Index c = 0;
      if (add_intercept) X(static_cast<Eigen::Index>(i), c++) = 1.0;
      for (std::size_t j : xcols) X(static_cast<Eigen::Index>(i), c++) = cell_value(table, rows[i] - 1, j);
    }
    return X;
  };

  if (ycol) {
    if (out.labeled_rows.empty()) throw DataError("no labeled rows: response column is empty");
    Eigen::VectorXd y(static_cast<Eigen::Index>(out.labeled_rows.size()));
    for (std::size_t i = 0; i < out.labeled_rows.size(); ++i)
      y(static_cast<Eigen::Index>(i)) = cell_value(table, out.labeled_rows[i] - 1, *ycol);
    out.labeled.emplace(design(out.labeled_rows), std::move(y));
  }
  out.unlabeled = UnlabeledDataset(design(out.unlabeled_rows), p);
  return out;
}

LoadedData load_csv(const std::string& path, const std::optional<std::string>& response,
                    const std::vector<std::string>& covariates, bool add_intercept) {
  return load_csv(read_csv(path), response, covariates, add_intercept);
}

Eigen::MatrixXd design_from_table(const CsvTable& table,
                                  const std::vector<std::string>& design_columns) {
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(design_columns.size()));
  for (std::size_t c = 0; c < design_columns.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    if (design_columns[c] == "(intercept)") {
      X.col(col).setOnes();
      continue;
    }
    const std::size_t j = column_index(table, design_columns[c]);
    for (Eigen::Index i = 0; i < n; ++i) X(i, col) = cell_value(table, static_cast<std::size_t>(i), j);
  }
  return X;
}

json to_json(const FitArtifact& a) {
  json coefs = json::array();
  for (const auto& c : a.coefficients) {
    json e = {{"tau", c.tau}, {"beta", vec_json(c.beta)}};
    if (c.se) e["se"] = vec_json(*c.se);
    coefs.push_back(std::move(e));
  }
  json j = {{"format", "extremile-fit"},
            {"version", 1},
            {"estimator", a.estimator},
            {"basis", a.basis},
            {"design_columns", a.design_columns},
            {"coefficients", std::move(coefs)},
            {"diagnostics", a.diagnostics}};
  if (a.alpha.size() > 0) j["alpha"] = mat_json(a.alpha);
  return j;
}

FitArtifact fit_artifact_from_json(const json& j) {
  return guarded("fit artifact", [&] {
    if (j.value("format", "") != "extremile-fit") throw ConfigError("not a fit artifact");
    FitArtifact a;
    a.estimator = j.at("estimator").get<std::string>();
    a.basis = j.at("basis").get<std::string>();
    a.design_columns = j.at("design_columns").get<std::vector<std::string>>();
    if (j.contains("alpha")) a.alpha = mat_from(j.at("alpha"));
    for (const auto& e : j.at("coefficients")) {
      ExtremileCoef c;
      c.tau = e.at("tau").get<double>();
      c.beta = vec_from(e.at("beta"));
      if (c.beta.size() != static_cast<Eigen::Index>(a.design_columns.size())) {
        throw ConfigError("coefficient length does not match design columns");
      }
      if (e.contains("se")) c.se = vec_from(e.at("se"));
      a.coefficients.push_back(std::move(c));
    }
    if (j.contains("diagnostics")) a.diagnostics = j.at("diagnostics");
    return a;
  });
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << '\n';
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
}

json to_json(const ScenarioConfig& c) {
  return {{"name", c.name},
          {"dgp", to_string(c.dgp)},
          {"error_law", to_string(c.error_law)},
          {"sigma_case", to_string(c.sigma_case)},
          {"n", c.n},
          {"N_unlabeled", c.N_unlabeled},
          {"tau_grid", c.tau_grid},
          {"replications", c.replications},
          {"seed", c.seed},
          {"e_tau_sample_size", c.e_tau_sample_size},
          {"pair_sum", to_string(c.pair_sum)},
          {"run_oe", c.run_oe},
          {"run_ssl", c.run_ssl},
          {"standard_errors", c.standard_errors},
          {"surrogate_degree", c.surrogate_degree},
          {"basis", c.basis},
          {"solver",
           {{"grad_tol", c.solver.grad_tol},
            {"max_iter", c.solver.max_iter},
            {"levenberg_lambda0", c.solver.levenberg_lambda0},
            {"line_search_shrink", c.solver.line_search_shrink},
            {"max_halvings", c.solver.max_halvings},
            {"derivative_floor", c.solver.derivative_floor}}},
          {"kernel",
           {{"bandwidths", c.kernel.bandwidths},
            {"clip", c.kernel.clip},
            {"leave_one_out", c.kernel.leave_one_out}}}};
}

ScenarioConfig scenario_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  return guarded("scenario", [&] {
    ScenarioConfig c;
    for (const auto& [key, v] : j.items()) {
      if (key == "name") c.name = v.get<std::string>();
      else if (key == "dgp") c.dgp = parse_dgp(v.get<std::string>());
      else if (key == "error_law") c.error_law = parse_error_law(v.get<std::string>());
      else if (key == "sigma_case") c.sigma_case = parse_sigma_case(v.get<std::string>());
      else if (key == "n") c.n = v.get<int>();
      else if (key == "N_unlabeled") c.N_unlabeled = v.get<int>();
      else if (key == "tau_grid") c.tau_grid = v.get<std::vector<double>>();
      else if (key == "replications") c.replications = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "e_tau_sample_size") c.e_tau_sample_size = v.get<int>();
      else if (key == "pair_sum") c.pair_sum = parse_pair_sum(v.get<std::string>());
      else if (key == "run_oe") c.run_oe = v.get<bool>();
      else if (key == "run_ssl") c.run_ssl = v.get<bool>();
      else if (key == "standard_errors") c.standard_errors = v.get<bool>();
      else if (key == "surrogate_degree") c.surrogate_degree = v.get<int>();
      else if (key == "basis") c.basis = v.get<std::string>();
      else if (key == "solver") {
        for (const auto& [sk, sv] : v.items()) {
          if (sk == "grad_tol") c.solver.grad_tol = sv.get<double>();
          else if (sk == "max_iter") c.solver.max_iter = sv.get<int>();
          else if (sk == "levenberg_lambda0") c.solver.levenberg_lambda0 = sv.get<double>();
          else if (sk == "line_search_shrink") c.solver.line_search_shrink = sv.get<double>();
          else if (sk == "max_halvings") c.solver.max_halvings = sv.get<int>();
          else if (sk == "derivative_floor") c.solver.derivative_floor = sv.get<double>();
          else throw ConfigError("unknown solver key '" + sk + "'");
        }
      } else if (key == "kernel") {
        for (const auto& [kk, kv] : v.items()) {
          if (kk == "bandwidths") c.kernel.bandwidths = kv.get<std::vector<double>>();
          else if (kk == "clip") c.kernel.clip = kv.get<bool>();
          else if (kk == "leave_one_out") c.kernel.leave_one_out = kv.get<bool>();
          else throw ConfigError("unknown kernel key '" + kk + "'");
        }
      } else {
        throw ConfigError("unknown scenario key '" + key + "'");
      }
    }
    c.validate();
    return c;
  });
}

std::vector<ScenarioConfig> scenarios_from_json(const json& j) {
  std::vector<ScenarioConfig> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(scenario_from_json(e));
  } else {
    out.push_back(scenario_from_json(j));
  }
  if (out.empty()) throw ConfigError("scenario file holds no scenarios");
  return out;
}

json to_json(const ReplicationReport& r) {
  json taus = json::array();
  for (const auto& t : r.taus) {
    json ests = json::array();
    for (const auto& s : t.estimators) {
      json e = {{"estimator", to_string(s.estimator)},
                {"estimates", mat_json(s.estimates)},
                {"mean", vec_json(s.mean)},
                {"sd", vec_json(s.sd)},
                {"evar", vec_json(s.evar)}};
      if (s.standard_errors.size() > 0) {
        e["standard_errors"] = mat_json(s.standard_errors);
        e["mean_se"] = vec_json(s.mean_se);
      }
      if (s.tae_mean) e["tae_mean"] = number(*s.tae_mean);
      if (s.tae_sd) e["tae_sd"] = number(*s.tae_sd);
      ests.push_back(std::move(e));
    }
    json tj = {{"tau", t.tau}, {"estimators", std::move(ests)}};
    if (t.prtae) tj["prtae"] = number(*t.prtae);
    if (t.pare) tj["pare"] = vec_json(*t.pare);
    taus.push_back(std::move(tj));
  }
  json j = {{"format", "extremile-report"},
            {"scenario", to_json(r.config)},
            {"succeeded", r.succeeded},
            {"failed", r.failed},
            {"sl_failures", r.sl_failures},
            {"ssl_failures", r.ssl_failures},
            {"oe_failures", r.oe_failures},
            {"taus", std::move(taus)}};
  if (r.target) j["target"] = vec_json(*r.target);
  return j;
}

ReplicationReport report_from_json(const json& j) {
  return guarded("report", [&] {
    if (j.value("format", "") != "extremile-report") throw ConfigError("not a simulation report");
    ReplicationReport r;
    r.config = scenario_from_json(j.at("scenario"));
    r.succeeded = j.at("succeeded").get<int>();
    r.failed = j.at("failed").get<int>();
    r.sl_failures = j.value("sl_failures", 0);
    r.ssl_failures = j.value("ssl_failures", 0);
    r.oe_failures = j.value("oe_failures", 0);
    if (j.contains("target")) r.target = vec_from(j.at("target"));
    for (const auto& tj : j.at("taus")) {
      TauSummary t;
      t.tau = tj.at("tau").get<double>();
      if (tj.contains("prtae")) t.prtae = get_number(tj.at("prtae"));
      if (tj.contains("pare")) t.pare = vec_from(tj.at("pare"));
      for (const auto& e : tj.at("estimators")) {
        EstimatorSummary s;
        const auto name = e.at("estimator").get<std::string>();
        s.estimator = name == "SL" ? Estimator::SL : name == "SSL" ? Estimator::SSL : Estimator::OE;
        s.estimates = mat_from(e.at("estimates"));
        s.mean = vec_from(e.at("mean"));
        s.sd = vec_from(e.at("sd"));
        s.evar = vec_from(e.at("evar"));
        if (e.contains("standard_errors")) {
          s.standard_errors = mat_from(e.at("standard_errors"));
          s.mean_se = vec_from(e.at("mean_se"));
        }
        if (e.contains("tae_mean")) s.tae_mean = get_number(e.at("tae_mean"));
        if (e.contains("tae_sd")) s.tae_sd = get_number(e.at("tae_sd"));
        t.estimators.push_back(std::move(s));
      }
      r.taus.push_back(std::move(t));
    }
    return r;
  });
}

}  // namespace extremile
