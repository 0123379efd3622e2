#pragma once

// Rank selection along a reduced-rank path.
//
// Known variance:    Crit(r)  = rss(r) + pen(r) σ²,          pen(r) = K S(r)²
// Unknown variance:  Crit'(r) = rss(r) (1 + pen'(r) / (nm)),
//                    pen'(r)  = K S(r)² / (1 - (1 + K S(r)²) / (nm))
// Linear (RSC):      Crit(r)  = rss(r) + λ (n + q) r,        RSCI: λ = K σ̂²
//
// Minimizers are taken over a contiguous candidate set; ties go to the
// smallest rank.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lowrank/kyfan.hpp"
#include "lowrank/matrix.hpp"
#include "lowrank/reduced_rank.hpp"

namespace lowrank::selection {

inline constexpr double kDefaultK = 2.0;
inline constexpr double kDefaultAlpha = 0.9;
inline constexpr int kDefaultFolds = 10;

enum class PenaltyKind {
  kKnownVariance,       // K S²
  kUnknownPrime,        // pen'(r) at equality
  kUnknownSubminimal,   // K S² / (1 - K S² / nm), for overfitting experiments
  kUnknownLog,          // -log(1 - K S² / (nm - 1))
  kRscLinear,           // λ (n + q) r
};

std::string_view to_string(PenaltyKind kind) noexcept;

struct PenaltyTable {
  PenaltyKind kind = PenaltyKind::kKnownVariance;
  double k = 0.0;  // K, or λ for kRscLinear
  int q = 0;
  int n = 0;
  int m = 0;
  // values[r] for r = 0..max_rank(); values[0] = 0.
  std::vector<double> values;

  int max_rank() const noexcept { return static_cast<int>(values.size()) - 1; }
  double at(int r) const;
  double nm() const noexcept { return static_cast<double>(n) * m; }
};

// K <= 1 throws a configuration error unless allow_minimal_violation is set.
PenaltyTable pen_known(const kyfan::SkfTable& skf, double k, bool allow_minimal_violation = false);

// Requires 1 + K S(r)² < nm for every r <= r_max; the error names the first
// offending rank.
PenaltyTable pen_prime(const kyfan::SkfTable& skf, double k, int m, int r_max,
                       bool allow_minimal_violation = false);

// The sub-minimal unknown-variance penalty K S² / (1 - K S² / nm), meant for
// K < 1 overfitting demonstrations. Requires K S(r)² < nm.
PenaltyTable pen_prime_subminimal(const kyfan::SkfTable& skf, double k, int m, int r_max);

// Requires K S(r)² < nm - 1.
PenaltyTable pen_log(const kyfan::SkfTable& skf, double k, int m, int r_max,
                     bool allow_minimal_violation = false);

// min(min(q, n), floor(α (nm - 1) / (K (√q + √n)²))); infeasible below 1.
int r_max_default(int q, int n, int m, double k, double alpha = kDefaultAlpha);

// Largest r <= max rank with K S(r)² + 1 < nm, or 0 when none.
int r_max_feasible(const kyfan::SkfTable& skf, double k, int m);

enum class Method { kKfKnown, kKf, kRsc, kRsci, kFamily };

std::string_view to_string(Method method) noexcept;
// Accepts "kf", "kf-known", "rsc", "rsci".
Method parse_method(std::string_view text);

struct SelectionReport {
  Method method = Method::kKf;
  int r_hat = 0;
  int r_min = 0;  // candidate set is r_min..r_max
  int r_max = 0;
  std::vector<double> rss;        // over the candidate set
  std::vector<double> penalty;    // penalty values over the candidate set
  std::vector<double> criterion;  // criterion values over the candidate set
  PenaltyKind penalty_kind = PenaltyKind::kKnownVariance;
  std::optional<double> k;
  std::optional<double> lambda;
  std::optional<double> sigma2;
  int q = 0;
  int n = 0;
  int m = 0;
  std::optional<kyfan::SkfMethod> skf_method;

  std::vector<int> ranks() const;
  double criterion_at(int r) const { return criterion.at(static_cast<std::size_t>(r - r_min)); }
};

// Candidate set {0..r_max}.
SelectionReport select_known_variance(std::span<const double> rss, const PenaltyTable& pen,
                                      double sigma2, int r_max);

// Candidate set {1..r_max}; nm taken from the penalty table.
SelectionReport select_unknown_variance(std::span<const double> rss, const PenaltyTable& pen_prime,
                                        int r_max);

// log(rss(r)) + pen(r): the logarithmic form of the unknown-variance
// criterion, for reporting only.
double log_criterion(std::span<const double> rss, const PenaltyTable& pen_log, int r);

// ‖Y - PY‖² / (mn - qn). Throws "variance-not-estimable" when q >= m.
double sigma_hat2(const Matrix& y, const Projector& proj);

// Candidate set {0..r_max}.
SelectionReport rsc_select(std::span<const double> rss, double lambda, int n, int rank_x, int r_max);

// rsc_select with λ = K σ̂².
SelectionReport rsci_select(std::span<const double> rss, const Matrix& y, const Projector& proj,
                            double k, int r_max);

// One rank-selection procedure with its tuning, as used by the CLI, the
// cross-validation loop and the simulation harness.
struct SelectorConfig {
  Method method = Method::kKf;
  double k = kDefaultK;
  double lambda = 0.0;               // kRsc
  std::optional<double> sigma2;      // kKfKnown
  double alpha = kDefaultAlpha;      // KF default r_max
  std::optional<int> r_max;          // overrides the method's default
  bool allow_minimal_violation = false;
  kyfan::SkfOptions skf;
};

// Runs the configured selector on a fitted path. Defaults: r_max from
// r_max_default for kKf, min(q, n) otherwise. For kKf with K <= 1 under
// allow_minimal_violation the sub-minimal penalty is used over
// {1..min(q, n) - 1}.
SelectionReport select_rank(const FitPath& path, const Matrix& y, const SelectorConfig& config);

struct FamilyCandidate {
  Matrix coefficients;  // p×n
  Matrix fitted;        // m×n
  double rss = 0.0;
};

struct FamilySelection {
  std::size_t index = 0;
  std::vector<int> ranks;
  std::vector<double> criterion;
};

// argmin over candidates of rss (1 + pen(rank(Â)) / (nm)), rank measured
// numerically; first index wins ties.
FamilySelection select_family(std::span<const FamilyCandidate> candidates, const PenaltyTable& pen,
                              std::optional<double> rank_tol = std::nullopt);

// Cross-validated tuning of K (or λ for kRsc).
struct CvResult {
  double best = 0.0;
  SelectionReport report;  // refit on all rows with the chosen value
  std::vector<double> grid;
  std::vector<std::optional<double>> cv_error;  // nullopt where skipped
  std::vector<std::string> warnings;
  int folds = 0;
  std::uint64_t seed = 0;
};

// fold_of_row[i] in [0, folds); block sizes differ by at most one.
std::vector<int> fold_assignment(int rows, int folds, std::uint64_t seed);

// Default grid 1.2, 1.4, ..., 3.0.
std::vector<double> default_k_grid();

CvResult cv_select_k(const Matrix& x, const Matrix& y, const SelectorConfig& base,
                     std::span<const double> grid, int folds = kDefaultFolds, std::uint64_t seed = 0);

}  // namespace lowrank::selection
