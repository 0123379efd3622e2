#include "lowrank/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lowrank/error.hpp"
#include "lowrank/parallel.hpp"
#include "lowrank/reduced_rank.hpp"

namespace lowrank::sim {

Matrix gen_design(int m, int p, double rho, rng::Stream& stream) {
  if (m < 1 || p < 1) throw_argument("design dimensions must be positive");
  if (!(std::abs(rho) < 1.0)) throw_argument("|rho| must be below 1 for an AR(1) covariance");
  // Row-wise: x_1 = z_1, x_j = ρ x_{j-1} + sqrt(1 - ρ²) z_j, which is z Lᵀ for
  // the Cholesky factor L of the AR(1) Toeplitz matrix.
  Matrix z(m, p);
  stream.fill_normal({z.data(), static_cast<std::size_t>(z.size())});
  const double scale = std::sqrt(1.0 - rho * rho);
  Matrix x(m, p);
  x.col(0) = z.col(0);
  for (int j = 1; j < p; ++j) x.col(j) = rho * x.col(j - 1) + scale * z.col(j);
  return x;
}

Matrix gen_design(int m, int p, double rho, std::uint64_t seed) {
  rng::Stream stream(seed, 0);
  return gen_design(m, p, rho, stream);
}

Matrix gen_coef(int p, int n, int r, double b, rng::Stream& stream) {
  if (p < 1 || n < 1) throw_argument("coefficient dimensions must be positive");
  if (r < 0 || r > std::min(p, n)) {
    throw_argument("rank " + std::to_string(r) + " outside 0..min(p, n) = " + std::to_string(std::min(p, n)));
  }
  Matrix left(p, r);
  Matrix right(r, n);
  stream.fill_normal({left.data(), static_cast<std::size_t>(left.size())});
  stream.fill_normal({right.data(), static_cast<std::size_t>(right.size())});
  if (r == 0) return Matrix::Zero(p, n);
  return b * (left * right);
}

Matrix gen_coef(int p, int n, int r, double b, std::uint64_t seed) {
  rng::Stream stream(seed, 0);
  return gen_coef(p, n, r, b, stream);
}

Matrix gen_response(const Matrix& x, const Matrix& a, double sigma, rng::Stream& stream) {
  if (x.cols() != a.rows()) throw_argument("X columns and A rows differ");
  if (!(sigma >= 0.0)) throw_argument("sigma must be nonnegative");
  Matrix noise(x.rows(), a.cols());
  stream.fill_normal({noise.data(), static_cast<std::size_t>(noise.size())});
  return x * a + sigma * noise;
}

Matrix gen_response(const Matrix& x, const Matrix& a, double sigma, std::uint64_t seed) {
  rng::Stream stream(seed, 0);
  return gen_response(x, a, sigma, stream);
}

std::optional<double> ratio_metric(const Matrix& xa_hat, const Matrix& xa_oracle, const Matrix& xa_true) {
  const double denominator = squared_distance(xa_true, xa_oracle);
  const double numerator = squared_distance(xa_true, xa_hat);
  if (!(denominator > 0.0)) return std::nullopt;
  return std::min(numerator / denominator, kRatioCap);
}

std::string EstimatorSpec::label() const {
  std::ostringstream out;
  out << selection::to_string(method) << '[' << (method == selection::Method::kRsc ? "lambda" : "K") << '=';
  if (cross_validated()) {
    out << "CV";
  } else {
    out << (method == selection::Method::kRsc ? lambda : k);
  }
  out << ']';
  return out.str();
}

void ExperimentConfig::validate() const {
  if (m < 1 || p < 1 || n < 1) throw_argument("m, p and n must be positive");
  if (r_true < 1 || r_true > std::min(n, p)) throw_argument("r must lie in 1..min(n, p)");
  if (rho.empty() || b.empty()) throw_argument("rho and b grids must be non-empty");
  for (double v : rho) {
    if (!(v >= 0.0 && v < 1.0)) throw_argument("rho values must lie in [0, 1)");
  }
  for (double v : b) {
    if (!(v >= 0.0)) throw_argument("b values must be nonnegative");
  }
  if (!(sigma > 0.0)) throw_argument("sigma must be positive");
  if (replicates < 1) throw_argument("replicates must be positive");
  if (estimators.empty()) throw_argument("no estimators configured");
  for (const EstimatorSpec& e : estimators) {
    if (e.method == selection::Method::kFamily) throw_argument("family selection is not a simulation estimator");
    if (e.cross_validated() && e.folds < 2) throw_argument("cross-validation needs at least 2 folds");
  }
}

const Aggregate* ExperimentResult::find(double rho, double b, const std::string& estimator) const {
  for (const Aggregate& a : aggregates) {
    if (a.rho == rho && a.b == b && a.estimator == estimator) return &a;
  }
  return nullptr;
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

struct Outcome {
  bool available = false;
  std::string reason;
  std::optional<double> ratio;
  int r_hat = 0;
};

selection::SelectorConfig selector_for(const EstimatorSpec& e, const ExperimentConfig& config) {
  selection::SelectorConfig cfg;
  cfg.method = e.method;
  cfg.k = e.k;
  cfg.lambda = e.lambda;
  cfg.alpha = e.alpha;
  cfg.r_max = e.r_max;
  cfg.allow_minimal_violation = e.allow_minimal_violation;
  cfg.skf = config.skf;
  if (e.method == selection::Method::kKfKnown) cfg.sigma2 = config.sigma * config.sigma;
  return cfg;
}

// All estimators on one (cell, replicate) draw.
std::vector<Outcome> run_unit(const ExperimentConfig& config, double rho, double b, int replicate) {
  const auto rep = static_cast<std::uint64_t>(replicate);
  rng::Stream design_stream(config.seed, rng::stream_id(rep, kDesign));
  rng::Stream coef_stream(config.seed, rng::stream_id(rep, kCoefficients));
  rng::Stream noise_stream(config.seed, rng::stream_id(rep, kNoise));
  const Matrix x = gen_design(config.m, config.p, rho, design_stream);
  const Matrix a = gen_coef(config.p, config.n, config.r_true, b, coef_stream);
  const Matrix y = gen_response(x, a, config.sigma, noise_stream);
  const Matrix xa = x * a;

  const FitPath path(x, y);
  const Matrix oracle = path.fitted(std::min(config.r_true, path.max_rank()));
  const std::uint64_t cv_seed = rng::Stream(config.seed, rng::stream_id(rep, kCrossValidation)).next_u64();

  std::vector<Outcome> outcomes;
  for (const EstimatorSpec& e : config.estimators) {
    Outcome out;
    try {
      const selection::SelectorConfig cfg = selector_for(e, config);
      const int r_hat = e.cross_validated()
                            ? selection::cv_select_k(x, y, cfg, e.grid, e.folds, cv_seed).report.r_hat
                            : selection::select_rank(path, y, cfg).r_hat;
      out.available = true;
      out.r_hat = r_hat;
      out.ratio = ratio_metric(path.fitted(r_hat), oracle, xa);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::kInfeasible && err.kind() != ErrorKind::kConfiguration) throw;
      out.reason = err.code() + ": " + err.what();
    }
    outcomes.push_back(std::move(out));
  }
  return outcomes;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  struct Cell {
    double rho;
    double b;
  };
  std::vector<Cell> cells;
  for (double rho : config.rho) {
    for (double b : config.b) cells.push_back({rho, b});
  }
  const std::size_t reps = static_cast<std::size_t>(config.replicates);
  std::vector<std::vector<Outcome>> units(cells.size() * reps);
  parallel_for(units.size(), [&](std::size_t u) {
    const Cell& cell = cells[u / reps];
    units[u] = run_unit(config, cell.rho, cell.b, static_cast<int>(u % reps));
  });

  ExperimentResult result;
  result.config = config;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t e = 0; e < config.estimators.size(); ++e) {
      Aggregate agg;
      agg.rho = cells[c].rho;
      agg.b = cells[c].b;
      agg.estimator = config.estimators[e].label();
      std::vector<double> ratios;
      std::vector<double> ranks;
      for (std::size_t i = 0; i < reps; ++i) {
        const Outcome& out = units[c * reps + i][e];
        if (!out.available) {
          if (agg.unavailable_reason.empty()) agg.unavailable_reason = out.reason;
          continue;
        }
        result.records.push_back({cells[c].rho, cells[c].b, static_cast<int>(i), agg.estimator, out.ratio, out.r_hat});
        ++agg.records;
        ranks.push_back(out.r_hat);
        if (out.ratio) {
          ratios.push_back(*out.ratio);
        } else {
          ++agg.flagged;
        }
      }
      agg.available = agg.records > 0;
      if (agg.available) agg.unavailable_reason.clear();
      if (!ratios.empty()) {
        agg.q10 = quantile(ratios, 0.10);
        agg.q25 = quantile(ratios, 0.25);
        agg.median = quantile(ratios, 0.50);
        agg.q75 = quantile(ratios, 0.75);
        agg.q90 = quantile(ratios, 0.90);
      }
      if (!ranks.empty()) {
        double mean = 0.0;
        for (double r : ranks) mean += r;
        mean /= static_cast<double>(ranks.size());
        double var = 0.0;
        for (double r : ranks) var += (r - mean) * (r - mean);
        agg.mean_r_hat = mean;
        if (ranks.size() > 1) {
          agg.se_r_hat = std::sqrt(var / static_cast<double>(ranks.size() - 1) / static_cast<double>(ranks.size()));
        }
      }
      result.aggregates.push_back(std::move(agg));
    }
  }
  return result;
}

}  // namespace lowrank::sim
