#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "lowrank/error.hpp"
#include "lowrank/io.hpp"
#include "lowrank/kyfan.hpp"
#include "lowrank/parallel.hpp"
#include "lowrank/reduced_rank.hpp"
#include "lowrank/rng.hpp"
#include "lowrank/selection.hpp"
#include "lowrank/simd.hpp"
#include "lowrank/simulation.hpp"

namespace lowrank::cli {

using io::Json;

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  const auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw_argument("cannot parse grid value '" + s + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw_argument("grid range must be start:stop:step");
    const double start = number(parts[0]);
    const double stop = number(parts[1]);
    const double step = number(parts[2]);
    if (!(step > 0.0) || stop < start) throw_argument("grid range needs step > 0 and stop >= start");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= count; ++i) {
      // Rounded to 12 significant digits so 1.2 + 2 * 0.2 prints as 1.6.
      grid.push_back(std::stod(io::format_number(start + static_cast<double>(i) * step)));
    }
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) grid.push_back(number(p));
  }
  if (grid.empty()) throw_argument("grid is empty");
  return grid;
}

namespace {

int exit_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kArgument:
    case ErrorKind::kConfiguration: return kExitArgument;
    case ErrorKind::kInfeasible: return kExitInfeasible;
    case ErrorKind::kIo: return kExitIo;
    case ErrorKind::kNumerical: return kExitFailure;
  }
  return kExitFailure;
}

void report_error(std::ostream& err, std::string_view kind, const std::string& code, const std::string& message) {
  Json j;
  j["error"] = code;
  j["kind"] = std::string(kind);
  j["message"] = message;
  err << j.dump() << '\n';
}

struct SkfFlags {
  std::string method = "auto";
  int nsim = kyfan::kDefaultNsim;
  std::optional<std::uint64_t> seed;
  double eps = kyfan::kDefaultEps;

  void add(CLI::App& app, bool prefixed) {
    app.add_option(prefixed ? "--skf-method" : "--method", method, "S table method: auto, mc or mp")
        ->check(CLI::IsMember({"auto", "mc", "mp", "monte-carlo", "marchenko-pastur"}))
        ->capture_default_str();
    app.add_option("--nsim", nsim, "Monte Carlo replicates")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option(prefixed ? "--skf-seed" : "--seed", seed, "Monte Carlo seed (drawn when omitted)");
    app.add_option("--eps", eps, "Marchenko-Pastur bisection width")->check(CLI::PositiveNumber)->capture_default_str();
  }

  kyfan::SkfOptions resolve() {
    if (!seed) seed = rng::entropy_seed();
    return {kyfan::parse_policy(method), nsim, *seed, eps};
  }

  Json to_json() const {
    return {{"method", method}, {"nsim", nsim}, {"seed", seed ? Json(*seed) : Json(nullptr)}, {"eps", eps}};
  }
};

struct Context {
  std::ostream& out;
  Json summary = Json::object();
};

void run_skf(Context& ctx, int q, int n, SkfFlags& skf, const std::string& out_csv, const std::string& out_json) {
  const kyfan::SkfOptions options = skf.resolve();
  const kyfan::SkfTable table = kyfan::skf_auto(q, n, options);
  std::ostringstream csv;
  io::write_skf_csv(csv, table);
  io::write_text(out_csv, csv.str());
  Json config = {{"q", q}, {"n", n}, {"skf", skf.to_json()}};
  if (!out_json.empty()) {
    Json j = io::to_json(table);
    j["config"] = config;
    io::write_text(out_json, j.dump(2) + "\n");
  }
  ctx.summary["config"] = config;
  ctx.summary["method"] = std::string(kyfan::to_string(table.method));
  ctx.summary["outputs"] = out_json.empty() ? Json::array({out_csv}) : Json::array({out_csv, out_json});
}

void run_fit(Context& ctx, const std::string& x_path, const std::string& y_path, int rank,
             std::optional<double> tol, const std::string& out_coef, const std::string& out_fitted) {
  const Matrix x = io::read_matrix_csv(x_path);
  const Matrix y = io::read_matrix_csv(y_path);
  const FitPath path(x, y, tol);
  if (rank > path.max_rank()) {
    throw_argument("rank " + std::to_string(rank) + " exceeds min(rank(X), n) = " + std::to_string(path.max_rank()));
  }
  io::write_matrix_csv(out_coef, path.coefficients(rank));
  Json outputs = Json::array({out_coef});
  if (!out_fitted.empty()) {
    io::write_matrix_csv(out_fitted, path.fitted(rank));
    outputs.push_back(out_fitted);
  }
  ctx.summary["config"] = {{"x", x_path}, {"y", y_path}, {"rank", rank},
                           {"tol", tol ? Json(*tol) : Json("auto")}};
  ctx.summary["design_rank"] = path.design_rank();
  ctx.summary["effective_rank"] = path.effective_rank();
  ctx.summary["rss"] = path.rss(rank);
  ctx.summary["outputs"] = outputs;
}

struct SelectFlags {
  std::string x_path;
  std::string y_path;
  std::string method;
  double k = selection::kDefaultK;
  std::optional<double> sigma2;
  std::optional<double> lambda;
  double alpha = selection::kDefaultAlpha;
  std::optional<int> r_max;
  bool allow_minimal_violation = false;
  SkfFlags skf;
  std::string out;
};

selection::SelectorConfig selector_config(SelectFlags& f) {
  selection::SelectorConfig cfg;
  cfg.method = selection::parse_method(f.method);
  cfg.k = f.k;
  cfg.alpha = f.alpha;
  cfg.r_max = f.r_max;
  cfg.sigma2 = f.sigma2;
  cfg.allow_minimal_violation = f.allow_minimal_violation;
  if (cfg.method == selection::Method::kRsc) {
    if (!f.lambda) throw_argument("--lambda is required for --method rsc");
    cfg.lambda = *f.lambda;
  }
  if (cfg.method == selection::Method::kKfKnown && !f.sigma2) {
    throw_argument("--sigma2 is required for --method kf-known");
  }
  if (cfg.method == selection::Method::kKf || cfg.method == selection::Method::kKfKnown) {
    cfg.skf = f.skf.resolve();
  }
  return cfg;
}

Json select_config_json(const SelectFlags& f) {
  return {{"x", f.x_path},
          {"y", f.y_path},
          {"method", f.method},
          {"k", f.k},
          {"sigma2", f.sigma2 ? Json(*f.sigma2) : Json(nullptr)},
          {"lambda", f.lambda ? Json(*f.lambda) : Json(nullptr)},
          {"alpha", f.alpha},
          {"r_max", f.r_max ? Json(*f.r_max) : Json("default")},
          {"allow_minimal_violation", f.allow_minimal_violation},
          {"skf", f.skf.to_json()}};
}

void run_select(Context& ctx, SelectFlags& f) {
  const Matrix x = io::read_matrix_csv(f.x_path);
  const Matrix y = io::read_matrix_csv(f.y_path);
  const selection::SelectorConfig cfg = selector_config(f);
  const FitPath path(x, y);
  const selection::SelectionReport report = selection::select_rank(path, y, cfg);
  Json j = io::to_json(report);
  j["config"] = select_config_json(f);
  io::write_text(f.out, j.dump(2) + "\n");
  ctx.summary["config"] = j["config"];
  ctx.summary["r_hat"] = report.r_hat;
  ctx.summary["outputs"] = Json::array({f.out});
}

void run_cv(Context& ctx, SelectFlags& f, const std::string& grid_text, int folds, std::optional<std::uint64_t> seed) {
  const Matrix x = io::read_matrix_csv(f.x_path);
  const Matrix y = io::read_matrix_csv(f.y_path);
  if (!f.lambda) f.lambda = 0.0;
  selection::SelectorConfig cfg = selector_config(f);
  const std::vector<double> grid = parse_grid(grid_text);
  if (!seed) seed = rng::entropy_seed();
  const selection::CvResult result = selection::cv_select_k(x, y, cfg, grid, folds, *seed);
  for (const std::string& w : result.warnings) std::cerr << "warning: " << w << '\n';
  Json j = io::to_json(result);
  Json config = select_config_json(f);
  config.erase("k");
  config.erase("lambda");
  config["grid"] = grid;
  config["folds"] = folds;
  config["seed"] = *seed;
  j["config"] = config;
  io::write_text(f.out, j.dump(2) + "\n");
  ctx.summary["config"] = config;
  ctx.summary["chosen"] = result.best;
  ctx.summary["r_hat"] = result.report.r_hat;
  ctx.summary["outputs"] = Json::array({f.out});
}

void run_simulate(Context& ctx, const std::string& config_path, const std::string& out_json, const std::string& out_csv) {
  Json raw = io::read_json(config_path);
  if (!raw.is_object()) throw_argument("experiment config must be a JSON object");
  if (!raw.contains("seed")) raw["seed"] = rng::entropy_seed();
  const sim::ExperimentConfig config = io::experiment_config_from_json(raw);
  const sim::ExperimentResult result = sim::run_experiment(config);
  io::write_text(out_json, io::to_json(result).dump(2) + "\n");
  std::ostringstream csv;
  io::write_records_csv(csv, result);
  io::write_text(out_csv, csv.str());
  ctx.summary["config"] = io::to_json(config);
  ctx.summary["records"] = result.records.size();
  ctx.summary["outputs"] = Json::array({out_json, out_csv});
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reduced-rank regression with Ky-Fan rank-selection penalties"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // skf
  auto* skf_cmd = app.add_subcommand("skf", "Tabulate S(r) = E||G||_(2,r) for a q x n Gaussian matrix");
  int q = 0, n = 0;
  SkfFlags skf_flags;
  std::string skf_out, skf_json;
  skf_cmd->add_option("--q", q, "rows of G")->required()->check(CLI::Range(1, 1 << 20));
  skf_cmd->add_option("--n", n, "columns of G")->required()->check(CLI::Range(1, 1 << 20));
  skf_flags.add(*skf_cmd, false);
  skf_cmd->add_option("--out", skf_out, "CSV output (r,s)")->required();
  skf_cmd->add_option("--out-json", skf_json, "JSON output with method metadata");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Rank-constrained least-squares fit at a given rank");
  std::string fit_x, fit_y, fit_coef, fit_fitted;
  int fit_rank = 0;
  std::optional<double> fit_tol;
  fit_cmd->add_option("--x", fit_x, "design matrix CSV")->required();
  fit_cmd->add_option("--y", fit_y, "response matrix CSV")->required();
  fit_cmd->add_option("--rank", fit_rank, "rank of the fit")->required()->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--tol", fit_tol, "singular-value threshold for rank(X)");
  fit_cmd->add_option("--out-coef", fit_coef, "coefficient CSV (p x n)")->required();
  fit_cmd->add_option("--out-fitted", fit_fitted, "fitted values CSV (m x n)");

  const auto add_common = [](CLI::App& cmd, SelectFlags& f) {
    cmd.add_option("--x", f.x_path, "design matrix CSV")->required();
    cmd.add_option("--y", f.y_path, "response matrix CSV")->required();
    cmd.add_option("--alpha", f.alpha, "fraction in the default KF r_max")->capture_default_str();
    cmd.add_option("--r-max", f.r_max, "largest candidate rank");
    cmd.add_flag("--allow-minimal-violation", f.allow_minimal_violation, "permit K <= 1");
    f.skf.add(cmd, true);
    cmd.add_option("--out", f.out, "JSON report")->required();
  };

  // select
  auto* select_cmd = app.add_subcommand("select", "Select the rank with a penalized criterion");
  SelectFlags select_flags;
  add_common(*select_cmd, select_flags);
  select_cmd->add_option("--method", select_flags.method, "kf, kf-known, rsc or rsci")
      ->required()
      ->check(CLI::IsMember({"kf", "kf-known", "rsc", "rsci"}));
  select_cmd->add_option("--k", select_flags.k, "penalty constant K")->capture_default_str();
  select_cmd->add_option("--sigma2", select_flags.sigma2, "known noise variance (kf-known)");
  select_cmd->add_option("--lambda", select_flags.lambda, "RSC penalty level");

  // cv
  auto* cv_cmd = app.add_subcommand("cv", "Tune K by V-fold cross-validation, then select");
  SelectFlags cv_flags;
  std::string grid_text = "1.2:3.0:0.2";
  int folds = selection::kDefaultFolds;
  std::optional<std::uint64_t> cv_seed;
  add_common(*cv_cmd, cv_flags);
  cv_cmd->add_option("--method", cv_flags.method, "kf, rsci or rsc (grid over lambda)")
      ->required()
      ->check(CLI::IsMember({"kf", "rsci", "rsc"}));
  cv_cmd->add_option("--grid", grid_text, "start:stop:step or comma list")->capture_default_str();
  cv_cmd->add_option("--folds", folds, "number of folds")->capture_default_str();
  cv_cmd->add_option("--seed", cv_seed, "fold shuffle seed (drawn when omitted)");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Run a replicated synthetic experiment");
  std::string sim_config, sim_json, sim_csv;
  sim_cmd->add_option("--config", sim_config, "experiment JSON")->required();
  sim_cmd->add_option("--out-json", sim_json, "aggregate results JSON")->required();
  sim_cmd->add_option("--out-csv", sim_csv, "per-replicate records CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "argument", "invalid-argument", e.what());
    return kExitArgument;
  }

  Context ctx{out};
  try {
    if (*skf_cmd) {
      ctx.summary["command"] = "skf";
      run_skf(ctx, q, n, skf_flags, skf_out, skf_json);
    } else if (*fit_cmd) {
      ctx.summary["command"] = "fit";
      run_fit(ctx, fit_x, fit_y, fit_rank, fit_tol, fit_coef, fit_fitted);
    } else if (*select_cmd) {
      ctx.summary["command"] = "select";
      run_select(ctx, select_flags);
    } else if (*cv_cmd) {
      ctx.summary["command"] = "cv";
      run_cv(ctx, cv_flags, grid_text, folds, cv_seed);
    } else if (*sim_cmd) {
      ctx.summary["command"] = "simulate";
      run_simulate(ctx, sim_config, sim_json, sim_csv);
    }
  } catch (const Error& e) {
    report_error(err, to_string(e.kind()), e.code(), e.what());
    return exit_status(e.kind());
  } catch (const std::exception& e) {
    report_error(err, "internal", "internal-error", e.what());
    return kExitFailure;
  }
  ctx.summary["threads"] = thread_count();
  ctx.summary["simd"] = std::string(simd::to_string(simd::active().isa));
  out << ctx.summary.dump() << '\n';
  return kExitOk;
}

}  // namespace lowrank::cli
