#include <algorithm>
#include <numeric>
#include <string>

#include "lowrank/error.hpp"
#include "lowrank/parallel.hpp"
#include "lowrank/rng.hpp"
#include "lowrank/selection.hpp"

namespace lowrank::selection {

std::vector<int> fold_assignment(int rows, int folds, std::uint64_t seed) {
  if (folds < 2) throw_argument("cross-validation needs at least 2 folds");
  if (rows < folds) {
    throw_argument("cannot split " + std::to_string(rows) + " rows into " + std::to_string(folds) + " folds");
  }
  std::vector<int> order(static_cast<std::size_t>(rows));
  std::iota(order.begin(), order.end(), 0);
  rng::Stream stream(seed, 0);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[stream.below(i + 1)]);
  }
  std::vector<int> fold_of_row(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    fold_of_row[static_cast<std::size_t>(order[i])] =
        static_cast<int>(i * static_cast<std::size_t>(folds) / order.size());
  }
  return fold_of_row;
}

std::vector<double> default_k_grid() {
  std::vector<double> grid;
  for (int i = 6; i <= 15; ++i) grid.push_back(i / 5.0);
  return grid;
}

namespace {

struct FoldOutcome {
  std::vector<double> error;
  std::vector<std::string> skipped;  // reason per grid point, empty if evaluated
};

SelectorConfig with_value(SelectorConfig cfg, double value) {
  if (cfg.method == Method::kRsc) {
    cfg.lambda = value;
  } else {
    cfg.k = value;
  }
  return cfg;
}

bool skippable(const Error& e) {
  return e.kind() == ErrorKind::kInfeasible || e.kind() == ErrorKind::kConfiguration;
}

}  // namespace

CvResult cv_select_k(const Matrix& x, const Matrix& y, const SelectorConfig& base,
                     std::span<const double> grid, int folds, std::uint64_t seed) {
  if (grid.empty()) throw_argument("cross-validation grid is empty");
  if (x.rows() != y.rows()) throw_argument("X and Y row counts differ");
  if (base.method == Method::kFamily) throw_argument("family selection is not cross-validated");
  const int rows = static_cast<int>(x.rows());
  const std::vector<int> fold_of_row = fold_assignment(rows, folds, seed);
  const std::size_t points = grid.size();

  std::vector<FoldOutcome> outcomes(static_cast<std::size_t>(folds));
  parallel_for(static_cast<std::size_t>(folds), [&](std::size_t f) {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
    for (int i = 0; i < rows; ++i) {
      (fold_of_row[static_cast<std::size_t>(i)] == static_cast<int>(f) ? test : train).push_back(i);
    }
    const Matrix x_train = x(train, Eigen::all);
    const Matrix y_train = y(train, Eigen::all);
    const Matrix x_test = x(test, Eigen::all);
    const Matrix y_test = y(test, Eigen::all);
    const FitPath path(x_train, y_train);

    FoldOutcome& out = outcomes[f];
    out.error.assign(points, 0.0);
    out.skipped.assign(points, {});
    for (std::size_t g = 0; g < points; ++g) {
      try {
        const SelectionReport report = select_rank(path, y_train, with_value(base, grid[g]));
        const Matrix prediction = x_test * path.coefficients(report.r_hat);
        out.error[g] = squared_distance(y_test, prediction);
      } catch (const Error& e) {
        if (!skippable(e)) throw;
        out.skipped[g] = e.what();
      }
    }
  });

  CvResult result;
  result.grid.assign(grid.begin(), grid.end());
  result.folds = folds;
  result.seed = seed;
  result.cv_error.assign(points, std::nullopt);
  std::optional<std::size_t> best;
  for (std::size_t g = 0; g < points; ++g) {
    double total = 0.0;
    std::string reason;
    for (int f = 0; f < folds && reason.empty(); ++f) {
      reason = outcomes[static_cast<std::size_t>(f)].skipped[g];
      total += outcomes[static_cast<std::size_t>(f)].error[g];
    }
    if (!reason.empty()) {
      result.warnings.push_back("skipping grid value " + std::to_string(grid[g]) + ": " + reason);
      continue;
    }
    result.cv_error[g] = total;
    if (!best || total < *result.cv_error[*best] ||
        (total == *result.cv_error[*best] && grid[g] < grid[*best])) {
      best = g;
    }
  }
  if (!best) {
    throw_infeasible("penalty-infeasible",
                     "every grid value is infeasible at the training dimensions" +
                         (result.warnings.empty() ? std::string() : ": " + result.warnings.front()));
  }

  result.best = grid[*best];
  const FitPath full(x, y);
  result.report = select_rank(full, y, with_value(base, result.best));
  return result;
}

}  // namespace lowrank::selection
