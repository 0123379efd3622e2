#pragma once

// Replicated synthetic experiments: Gaussian AR(1) designs, planted low-rank
// coefficients, and the risk ratio of each selector against the fit at the
// true rank.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lowrank/kyfan.hpp"
#include "lowrank/matrix.hpp"
#include "lowrank/rng.hpp"
#include "lowrank/selection.hpp"

namespace lowrank::sim {

inline constexpr double kRatioCap = 10.0;

// Stream purposes within one replicate.
enum Purpose : std::uint64_t { kDesign = 0, kCoefficients = 1, kNoise = 2, kCrossValidation = 3 };

// Rows i.i.d. N(0, Σ) with Σ_ij = ρ^|i-j|, generated as Z Lᵀ where L is the
// lower Cholesky factor of Σ (applied as the AR(1) recursion).
Matrix gen_design(int m, int p, double rho, rng::Stream& stream);
Matrix gen_design(int m, int p, double rho, std::uint64_t seed);

// A = b B₁ B₂ with B₁ (p×r) and B₂ (r×n) standard Gaussian.
Matrix gen_coef(int p, int n, int r, double b, rng::Stream& stream);
Matrix gen_coef(int p, int n, int r, double b, std::uint64_t seed);

// Y = XA + σE.
Matrix gen_response(const Matrix& x, const Matrix& a, double sigma, rng::Stream& stream);
Matrix gen_response(const Matrix& x, const Matrix& a, double sigma, std::uint64_t seed);

// min(‖XA - XÂ‖² / ‖XA - XÂ_oracle‖², 10); nullopt when the denominator is 0.
std::optional<double> ratio_metric(const Matrix& xa_hat, const Matrix& xa_oracle, const Matrix& xa_true);

struct EstimatorSpec {
  selection::Method method = selection::Method::kKf;
  double k = selection::kDefaultK;
  double lambda = 0.0;
  std::vector<double> grid;  // non-empty: tune K (λ for RSC) by cross-validation
  int folds = selection::kDefaultFolds;
  double alpha = selection::kDefaultAlpha;
  std::optional<int> r_max;
  bool allow_minimal_violation = false;

  bool cross_validated() const noexcept { return !grid.empty(); }
  // "KF[K=2]", "RSCI[K=CV]", "RSC[lambda=CV]", ...
  std::string label() const;
};

struct ExperimentConfig {
  int m = 0;
  int p = 0;
  int n = 0;
  int r_true = 0;
  std::vector<double> rho;
  std::vector<double> b;
  double sigma = 1.0;
  int replicates = 1;
  std::uint64_t seed = 0;
  std::vector<EstimatorSpec> estimators;
  kyfan::SkfOptions skf;

  void validate() const;
};

struct ReplicateRecord {
  double rho = 0.0;
  double b = 0.0;
  int replicate = 0;
  std::string estimator;
  std::optional<double> ratio;  // nullopt: flagged zero-denominator record
  int r_hat = 0;
};

struct Aggregate {
  double rho = 0.0;
  double b = 0.0;
  std::string estimator;
  bool available = true;
  std::string unavailable_reason;
  int records = 0;
  int flagged = 0;
  // Type-7 sample quantiles of the ratio over unflagged records.
  double q10 = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, q90 = 0.0;
  double mean_r_hat = 0.0;
  double se_r_hat = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ReplicateRecord> records;
  std::vector<Aggregate> aggregates;

  const Aggregate* find(double rho, double b, const std::string& estimator) const;
};

// Replicate i of every (ρ, b) cell uses rng streams stream_id(i, purpose)
// under config.seed, so cells share their Gaussian draws and results do not
// depend on the number of worker threads.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Linear-interpolation quantile of a sample (R type 7); values are copied.
double quantile(std::vector<double> values, double prob);

}  // namespace lowrank::sim
