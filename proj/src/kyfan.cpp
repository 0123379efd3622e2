#include "lowrank/kyfan.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "lowrank/error.hpp"
#include "lowrank/parallel.hpp"
#include "lowrank/rng.hpp"
#include "lowrank/simd.hpp"

namespace lowrank::kyfan {

std::string_view to_string(SkfMethod method) noexcept {
  return method == SkfMethod::kMonteCarlo ? "monte-carlo" : "marchenko-pastur";
}

std::string_view to_string(SkfPolicy policy) noexcept {
  switch (policy) {
    case SkfPolicy::kAuto: return "auto";
    case SkfPolicy::kMonteCarlo: return "monte-carlo";
    case SkfPolicy::kMarchenkoPastur: return "marchenko-pastur";
  }
  return "auto";
}

SkfPolicy parse_policy(std::string_view text) {
  if (text == "auto") return SkfPolicy::kAuto;
  if (text == "mc" || text == "monte-carlo") return SkfPolicy::kMonteCarlo;
  if (text == "mp" || text == "marchenko-pastur") return SkfPolicy::kMarchenkoPastur;
  throw_argument("unknown S table method '" + std::string(text) + "' (expected auto, mc or mp)");
}

double SkfTable::at(int r) const {
  if (r == 0) return 0.0;
  if (r < 0 || r > max_rank()) {
    throw_argument("rank " + std::to_string(r) + " outside S table range 0.." +
                   std::to_string(max_rank()));
  }
  return values[static_cast<std::size_t>(r - 1)];
}

namespace {

void check_dims(int q, int n) {
  if (q < 1 || n < 1) {
    throw_argument("S table dimensions must be positive (got q=" + std::to_string(q) +
                   ", n=" + std::to_string(n) + ")");
  }
}

// Root-cumulative squared singular values of one Gaussian draw. The k =
// min(q, n) squared singular values are the eigenvalues of the k×k Gram
// matrix of a large×k sample.
void one_replicate(std::size_t large, std::size_t small, rng::Stream& stream,
                   Eigen::MatrixXd& sample, Eigen::MatrixXd& gram, double* out) {
  stream.fill_normal({sample.data(), static_cast<std::size_t>(sample.size())});
  simd::active().gram_upper(sample.data(), large, small, large, gram.data());
  gram.triangularView<Eigen::StrictlyLower>() = gram.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ascending = eig.eigenvalues();
  double cumulative = 0.0;
  for (std::size_t r = 0; r < small; ++r) {
    cumulative += std::max(0.0, ascending(static_cast<Eigen::Index>(small - 1 - r)));
    out[r] = std::sqrt(cumulative);
  }
}

}  // namespace

SkfTable skf_monte_carlo(int q, int n, int nsim, std::uint64_t seed) {
  check_dims(q, n);
  if (nsim < 1) throw_argument("nsim must be at least 1");

  const std::size_t small = static_cast<std::size_t>(std::min(q, n));
  const std::size_t large = static_cast<std::size_t>(std::max(q, n));
  const std::size_t reps = static_cast<std::size_t>(nsim);

  // Row i holds replicate i; reduced in index order below.
  std::vector<double> roots(reps * small);
  const unsigned workers = std::max(1u, std::min<unsigned>(thread_count(), static_cast<unsigned>(reps)));
  const std::size_t chunk = (reps + workers - 1) / workers;
  parallel_for(workers, [&](std::size_t w) {
    Eigen::MatrixXd sample(static_cast<Eigen::Index>(large), static_cast<Eigen::Index>(small));
    Eigen::MatrixXd gram(static_cast<Eigen::Index>(small), static_cast<Eigen::Index>(small));
    const std::size_t end = std::min(reps, (w + 1) * chunk);
    for (std::size_t i = w * chunk; i < end; ++i) {
      rng::Stream stream(seed, i);
      one_replicate(large, small, stream, sample, gram, roots.data() + i * small);
    }
  });

  SkfTable table;
  table.q = q;
  table.n = n;
  table.method = SkfMethod::kMonteCarlo;
  table.nsim = nsim;
  table.seed = seed;
  table.values.assign(small, 0.0);
  table.std_errors.assign(small, 0.0);
  for (std::size_t r = 0; r < small; ++r) {
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < reps; ++i) {
      const double x = roots[i * small + r];
      const double delta = x - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (x - mean);
    }
    table.values[r] = mean;
    if (reps > 1) {
      table.std_errors[r] = std::sqrt(m2 / static_cast<double>(reps - 1) / static_cast<double>(reps));
    }
  }
  return table;
}

SkfBounds skf_bounds(int q, int n, int r) {
  check_dims(q, n);
  if (q > n) std::swap(q, n);
  if (r < 1 || r > q) {
    throw_argument("rank " + std::to_string(r) + " outside 1.." + std::to_string(q));
  }
  const double dn = n;
  const double dq = q;
  const double sqrt_n = std::sqrt(dn);
  const double sqrt_q = std::sqrt(dq);

  const double linear = r * (sqrt_n + sqrt_q) * (sqrt_n + sqrt_q);

  double tail = 0.0;
  for (int k = r + 1; k <= q; ++k) {
    const double d = sqrt_n - std::sqrt(static_cast<double>(k));
    tail += d * d;
  }
  const double interlacing = dn * dq - tail;

  double head = r;
  for (int k = 1; k <= r; ++k) {
    const double s = sqrt_n + std::sqrt(static_cast<double>(q - k + 1));
    head += s * s;
  }

  return {r * (dn - 1.0 / dq), std::min({linear, interlacing, head})};
}

SkfMethod resolve_policy(int q, int n, SkfPolicy policy) noexcept {
  switch (policy) {
    case SkfPolicy::kMonteCarlo: return SkfMethod::kMonteCarlo;
    case SkfPolicy::kMarchenkoPastur: return SkfMethod::kMarchenkoPastur;
    case SkfPolicy::kAuto: break;
  }
  return static_cast<long>(q) * n > kAutoMpThreshold ? SkfMethod::kMarchenkoPastur
                                                      : SkfMethod::kMonteCarlo;
}

SkfTable skf_auto(int q, int n, const SkfOptions& options) {
  check_dims(q, n);
  const SkfMethod method = resolve_policy(q, n, options.policy);
  const bool mc = method == SkfMethod::kMonteCarlo;
  using Key = std::tuple<int, int, int, int, std::uint64_t, double>;
  const Key key{q, n, static_cast<int>(method), mc ? options.nsim : 0, mc ? options.seed : 0,
                mc ? 0.0 : options.eps};

  static std::mutex mutex;
  static std::map<Key, SkfTable> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  // Computed outside the lock; a concurrent duplicate computes the same
  // deterministic table.
  SkfTable table = mc ? skf_monte_carlo(q, n, options.nsim, options.seed)
                      : skf_marchenko_pastur(q, n, options.eps);
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(table)).first->second;
}

}  // namespace lowrank::kyfan
