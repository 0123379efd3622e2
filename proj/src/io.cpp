#include "lowrank/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lowrank/error.hpp"

namespace lowrank::io {

namespace {

[[noreturn]] void throw_io(const std::string& code, const std::string& message) {
  throw Error(ErrorKind::kIo, code, message);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

Json nullable(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::string format_number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

Matrix parse_matrix_csv(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const std::size_t comma = rest.find(',');
      const std::string field(trim(rest.substr(0, comma)));
      char* end = nullptr;
      errno = 0;
      const double value = std::strtod(field.c_str(), &end);
      if (field.empty() || end != field.c_str() + field.size() || errno == ERANGE) {
        throw_io("malformed-csv", source + ":" + std::to_string(line_no) + ": cannot parse '" + field + "' as a number");
      }
      row.push_back(value);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw_io("malformed-csv", source + ":" + std::to_string(line_no) + ": expected " +
                                    std::to_string(rows.front().size()) + " columns, found " +
                                    std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw_io("malformed-csv", source + ": no data rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_io("io-error", "cannot open " + path.string());
  return parse_matrix_csv(in, path.string());
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_number(m(i, j));
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ostringstream text;
  write_matrix_csv(text, m);
  write_text(path, text.str());
}

void write_skf_csv(std::ostream& out, const kyfan::SkfTable& table) {
  out << "r,s\n";
  for (int r = 1; r <= table.max_rank(); ++r) out << r << ',' << format_number(table.at(r)) << '\n';
}

Json to_json(const kyfan::SkfTable& table) {
  Json j;
  j["q"] = table.q;
  j["n"] = table.n;
  j["method"] = std::string(kyfan::to_string(table.method));
  j["nsim"] = table.nsim ? Json(*table.nsim) : Json(nullptr);
  j["seed"] = table.seed ? Json(*table.seed) : Json(nullptr);
  j["eps"] = nullable(table.eps);
  Json ranks = Json::array();
  for (int r = 1; r <= table.max_rank(); ++r) ranks.push_back(r);
  j["r"] = ranks;
  j["s"] = table.values;
  j["std_error"] = table.std_errors.empty() ? Json(nullptr) : Json(table.std_errors);
  return j;
}

Json to_json(const selection::SelectionReport& report) {
  Json j;
  j["method"] = std::string(selection::to_string(report.method));
  j["r_hat"] = report.r_hat;
  j["K"] = nullable(report.k);
  j["lambda"] = nullable(report.lambda);
  j["sigma2"] = nullable(report.sigma2);
  j["r_min"] = report.r_min;
  j["r_max"] = report.r_max;
  j["q"] = report.q;
  j["n"] = report.n;
  j["m"] = report.m;
  j["penalty_kind"] = std::string(selection::to_string(report.penalty_kind));
  j["skf_method"] = report.skf_method ? Json(std::string(kyfan::to_string(*report.skf_method))) : Json(nullptr);
  j["r"] = report.ranks();
  j["rss"] = report.rss;
  j["penalty"] = report.penalty;
  j["criterion"] = report.criterion;
  return j;
}

Json to_json(const selection::CvResult& result) {
  Json j;
  const bool lambda = result.report.method == selection::Method::kRsc;
  j["parameter"] = lambda ? "lambda" : "K";
  j["chosen"] = result.best;
  j["grid"] = result.grid;
  Json errors = Json::array();
  for (const auto& e : result.cv_error) errors.push_back(nullable(e));
  j["cv_error"] = errors;
  j["folds"] = result.folds;
  j["seed"] = result.seed;
  j["warnings"] = result.warnings;
  j["report"] = to_json(result.report);
  return j;
}

namespace {

std::vector<double> number_or_array(const Json& j, const char* key) {
  const Json& v = j.at(key);
  if (v.is_number()) return {v.get<double>()};
  return v.get<std::vector<double>>();
}

sim::EstimatorSpec estimator_from_json(const Json& j) {
  static const std::vector<std::string> known = {"label", "method", "k", "lambda", "grid", "folds",
                                                 "alpha", "r_max", "allow_minimal_violation"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw_argument("unknown estimator key '" + key + "'");
    }
  }
  sim::EstimatorSpec e;
  e.method = selection::parse_method(j.at("method").get<std::string>());
  const char* tuning_key = e.method == selection::Method::kRsc ? "lambda" : "k";
  if (j.contains(tuning_key)) {
    const Json& t = j.at(tuning_key);
    if (t.is_string()) {
      if (t.get<std::string>() != "cv") throw_argument(std::string(tuning_key) + " must be a number or \"cv\"");
      if (j.contains("grid")) {
        e.grid = j.at("grid").get<std::vector<double>>();
      } else if (e.method == selection::Method::kRsc) {
        throw_argument("cross-validated RSC needs an explicit lambda grid");
      } else {
        e.grid = selection::default_k_grid();
      }
      if (e.grid.empty()) throw_argument("cross-validation grid is empty");
    } else if (e.method == selection::Method::kRsc) {
      e.lambda = t.get<double>();
    } else {
      e.k = t.get<double>();
    }
  } else if (e.method == selection::Method::kRsc) {
    throw_argument("RSC estimator needs lambda");
  }
  if (j.contains("folds")) e.folds = j.at("folds").get<int>();
  if (j.contains("alpha")) e.alpha = j.at("alpha").get<double>();
  if (j.contains("r_max") && !j.at("r_max").is_null()) e.r_max = j.at("r_max").get<int>();
  if (j.contains("allow_minimal_violation")) e.allow_minimal_violation = j.at("allow_minimal_violation").get<bool>();
  return e;
}

Json to_json(const sim::EstimatorSpec& e) {
  Json j;
  j["label"] = e.label();
  std::string method(selection::to_string(e.method));
  std::transform(method.begin(), method.end(), method.begin(), [](unsigned char c) { return std::tolower(c); });
  j["method"] = method;
  const char* tuning_key = e.method == selection::Method::kRsc ? "lambda" : "k";
  if (e.cross_validated()) {
    j[tuning_key] = "cv";
    j["grid"] = e.grid;
    j["folds"] = e.folds;
  } else {
    j[tuning_key] = e.method == selection::Method::kRsc ? e.lambda : e.k;
  }
  j["alpha"] = e.alpha;
  j["r_max"] = e.r_max ? Json(*e.r_max) : Json(nullptr);
  j["allow_minimal_violation"] = e.allow_minimal_violation;
  return j;
}

}  // namespace

sim::ExperimentConfig experiment_config_from_json(const Json& j) {
  try {
    static const std::vector<std::string> known = {"m", "p", "n", "r", "rho", "b", "sigma",
                                                   "replicates", "seed", "estimators", "skf"};
    for (const auto& [key, value] : j.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw_argument("unknown config key '" + key + "'");
      }
    }
    sim::ExperimentConfig c;
    c.m = j.at("m").get<int>();
    c.p = j.at("p").get<int>();
    c.n = j.at("n").get<int>();
    c.r_true = j.at("r").get<int>();
    c.rho = number_or_array(j, "rho");
    c.b = number_or_array(j, "b");
    c.sigma = j.value("sigma", 1.0);
    c.replicates = j.value("replicates", 100);
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("estimators")) {
      for (const Json& e : j.at("estimators")) c.estimators.push_back(estimator_from_json(e));
    } else {
      sim::EstimatorSpec kf;
      sim::EstimatorSpec rsci;
      rsci.method = selection::Method::kRsci;
      c.estimators = {kf, rsci};
    }
    if (j.contains("skf")) {
      const Json& s = j.at("skf");
      c.skf.policy = kyfan::parse_policy(s.value("method", std::string("auto")));
      c.skf.nsim = s.value("nsim", kyfan::kDefaultNsim);
      c.skf.seed = s.value("seed", std::uint64_t{0});
      c.skf.eps = s.value("eps", kyfan::kDefaultEps);
    }
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw_argument(std::string("invalid experiment config: ") + e.what());
  }
}

Json to_json(const sim::ExperimentConfig& c) {
  Json j;
  j["m"] = c.m;
  j["p"] = c.p;
  j["n"] = c.n;
  j["r"] = c.r_true;
  j["rho"] = c.rho;
  j["b"] = c.b;
  j["sigma"] = c.sigma;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  Json estimators = Json::array();
  for (const auto& e : c.estimators) estimators.push_back(to_json(e));
  j["estimators"] = estimators;
  j["skf"] = {{"method", std::string(kyfan::to_string(c.skf.policy))},
              {"nsim", c.skf.nsim},
              {"seed", c.skf.seed},
              {"eps", c.skf.eps}};
  return j;
}

Json to_json(const sim::ExperimentResult& result) {
  Json j;
  j["config"] = to_json(result.config);
  j["record_count"] = result.records.size();
  Json aggregates = Json::array();
  for (const sim::Aggregate& a : result.aggregates) {
    Json entry;
    entry["rho"] = a.rho;
    entry["b"] = a.b;
    entry["estimator"] = a.estimator;
    entry["available"] = a.available;
    entry["unavailable_reason"] = a.available ? Json(nullptr) : Json(a.unavailable_reason);
    entry["records"] = a.records;
    entry["flagged"] = a.flagged;
    const bool has_ratios = a.records > a.flagged;
    entry["ratio"] = {{"q10", has_ratios ? finite_or_null(a.q10) : Json(nullptr)},
                      {"q25", has_ratios ? finite_or_null(a.q25) : Json(nullptr)},
                      {"median", has_ratios ? finite_or_null(a.median) : Json(nullptr)},
                      {"q75", has_ratios ? finite_or_null(a.q75) : Json(nullptr)},
                      {"q90", has_ratios ? finite_or_null(a.q90) : Json(nullptr)}};
    entry["mean_r_hat"] = a.available ? Json(a.mean_r_hat) : Json(nullptr);
    entry["se_r_hat"] = a.available ? Json(a.se_r_hat) : Json(nullptr);
    aggregates.push_back(entry);
  }
  j["aggregates"] = aggregates;
  return j;
}

void write_records_csv(std::ostream& out, const sim::ExperimentResult& result) {
  out << "replicate,estimator,ratio,r_hat,rho,b\n";
  for (const sim::ReplicateRecord& r : result.records) {
    out << r.replicate << ',' << r.estimator << ',' << (r.ratio ? format_number(*r.ratio) : "NA") << ','
        << r.r_hat << ',' << format_number(r.rho) << ',' << format_number(r.b) << '\n';
  }
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_io("io-error", "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw_io("malformed-json", path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_io("io-error", "cannot write " + path.string());
  out << text;
  if (!out) throw_io("io-error", "write failed for " + path.string());
}

}  // namespace lowrank::io
