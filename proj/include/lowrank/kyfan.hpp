#pragma once

// Expected Ky-Fan (2,r)-norms of Gaussian matrices,
//
//   S_{q×n}(r) = E ‖G‖_{(2,r)},  ‖G‖_{(2,r)}² = Σ_{k≤r} σ_k(G)²,
//
// for a q×n matrix G with i.i.d. N(0,1) entries. Every rank penalty in this
// library is a function of these values. Two evaluators are provided: a
// seeded Monte Carlo average and the Marchenko-Pastur large-dimension
// approximation, plus the closed-form envelope that brackets S².

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace lowrank::kyfan {

inline constexpr int kDefaultNsim = 200;
inline constexpr double kDefaultEps = 1e-9;
// Above this value of n·q the automatic policy uses Marchenko-Pastur.
inline constexpr long kAutoMpThreshold = 1000;

enum class SkfMethod { kMonteCarlo, kMarchenkoPastur };
enum class SkfPolicy { kAuto, kMonteCarlo, kMarchenkoPastur };

std::string_view to_string(SkfMethod method) noexcept;
std::string_view to_string(SkfPolicy policy) noexcept;
// Accepts "auto", "mc"/"monte-carlo", "mp"/"marchenko-pastur".
SkfPolicy parse_policy(std::string_view text);

struct SkfTable {
  int q = 0;
  int n = 0;
  SkfMethod method = SkfMethod::kMonteCarlo;
  // values[r - 1] = S(r) for r = 1..min(q, n).
  std::vector<double> values;
  // Standard error of each Monte Carlo mean; empty for Marchenko-Pastur.
  std::vector<double> std_errors;
  std::optional<int> nsim;
  std::optional<std::uint64_t> seed;
  std::optional<double> eps;

  int max_rank() const noexcept { return static_cast<int>(values.size()); }
  // S(r) for 1 <= r <= max_rank(); S(0) = 0.
  double at(int r) const;
  double squared(int r) const {
    const double s = at(r);
    return s * s;
  }
};

// Support of the Marchenko-Pastur law with aspect ratio beta in (0, 1].
struct MpParams {
  double beta;
  double support_lo;  // (1 - √β)²
  double support_hi;  // (1 + √β)²

  static MpParams from_beta(double beta);
  // beta = min(q, n) / max(q, n).
  static MpParams for_dims(int q, int n);
};

// Monte Carlo average of sqrt(cumulative squared singular values) over
// nsim Gaussian draws. Replicate i draws from rng stream i under `seed`, so
// the table is reproducible and independent of thread count.
SkfTable skf_monte_carlo(int q, int n, int nsim = kDefaultNsim, std::uint64_t seed = 0);

// Marchenko-Pastur density f_β(x); zero outside the support.
double mp_density(double x, double beta);
// ∫_x^{hi} f_β  and  ∫_x^{hi} t f_β(t) dt, x clamped to the support.
double mp_tail_mass(double x, double beta);
double mp_tail_moment(double x, double beta);

// x_α with upper-tail mass α, by bisection until the bracket is narrower
// than eps. Throws ErrorKind::kNumerical if eps is unreachable.
double mp_quantile(double alpha, double beta, double eps = kDefaultEps);

// S(r)² ≈ nq ∫_{x_α}^{hi} x f_β(x) dx with α = r / min(q, n).
SkfTable skf_marchenko_pastur(int q, int n, double eps = kDefaultEps);

// Envelope for S(r)² (q and n may be given in either order).
struct SkfBounds {
  double lower;
  double upper;
};
SkfBounds skf_bounds(int q, int n, int r);

struct SkfOptions {
  SkfPolicy policy = SkfPolicy::kAuto;
  int nsim = kDefaultNsim;
  std::uint64_t seed = 0;
  double eps = kDefaultEps;
};

SkfMethod resolve_policy(int q, int n, SkfPolicy policy) noexcept;

// Policy-resolved table, memoized per (q, n, method, nsim, seed, eps).
// Thread-safe.
SkfTable skf_auto(int q, int n, const SkfOptions& options = {});

}  // namespace lowrank::kyfan
