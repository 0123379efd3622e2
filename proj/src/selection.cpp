#include "lowrank/selection.hpp"

#include <cmath>
#include <string>

#include "lowrank/error.hpp"

namespace lowrank::selection {

std::string_view to_string(PenaltyKind kind) noexcept {
  switch (kind) {
    case PenaltyKind::kKnownVariance: return "known-variance";
    case PenaltyKind::kUnknownPrime: return "unknown-variance-prime";
    case PenaltyKind::kUnknownSubminimal: return "unknown-variance-subminimal";
    case PenaltyKind::kUnknownLog: return "unknown-variance-log";
    case PenaltyKind::kRscLinear: return "rsc-linear";
  }
  return "unknown";
}

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::kKfKnown: return "KF-known";
    case Method::kKf: return "KF";
    case Method::kRsc: return "RSC";
    case Method::kRsci: return "RSCI";
    case Method::kFamily: return "family";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  if (text == "kf" || text == "KF") return Method::kKf;
  if (text == "kf-known" || text == "KF-known") return Method::kKfKnown;
  if (text == "rsc" || text == "RSC") return Method::kRsc;
  if (text == "rsci" || text == "RSCI") return Method::kRsci;
  throw_argument("unknown selection method '" + std::string(text) + "'");
}

double PenaltyTable::at(int r) const {
  if (r < 0 || r > max_rank()) {
    throw_argument("rank " + std::to_string(r) + " outside penalty table range 0.." +
                   std::to_string(max_rank()));
  }
  return values[static_cast<std::size_t>(r)];
}

std::vector<int> SelectionReport::ranks() const {
  std::vector<int> out;
  for (int r = r_min; r <= r_max; ++r) out.push_back(r);
  return out;
}

namespace {

void require_k_above_one(double k, bool allow_minimal_violation) {
  if (!(k > 0.0)) throw_argument("K must be positive");
  if (k <= 1.0 && !allow_minimal_violation) {
    throw Error(ErrorKind::kConfiguration, "minimal-penalty-violation",
                "K = " + std::to_string(k) +
                    " is at or below the minimal penalty level K = 1, where selection provably "
                    "overfits; enable allow-minimal-violation to run it deliberately");
  }
}

void require_r_max(const kyfan::SkfTable& skf, int r_max) {
  if (r_max < 1 || r_max > skf.max_rank()) {
    throw_argument("r_max = " + std::to_string(r_max) + " outside 1.." + std::to_string(skf.max_rank()));
  }
}

PenaltyTable make_table(PenaltyKind kind, double k, const kyfan::SkfTable& skf, int m, int r_max) {
  PenaltyTable t;
  t.kind = kind;
  t.k = k;
  t.q = skf.q;
  t.n = skf.n;
  t.m = m;
  t.values.assign(static_cast<std::size_t>(r_max) + 1, 0.0);
  return t;
}

void require_path(std::span<const double> rss, int r_max) {
  if (r_max < 0) throw_argument("empty candidate set (r_max < 0)");
  if (rss.size() < static_cast<std::size_t>(r_max) + 1) {
    throw_argument("rss path covers ranks 0.." + std::to_string(static_cast<int>(rss.size()) - 1) +
                   " but r_max = " + std::to_string(r_max));
  }
}

// Fills criterion and r_hat; strict comparison keeps the smallest minimizer.
void finish(SelectionReport& report) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < report.criterion.size(); ++i) {
    if (report.criterion[i] < report.criterion[best]) best = i;
  }
  report.r_hat = report.r_min + static_cast<int>(best);
}

}  // namespace

PenaltyTable pen_known(const kyfan::SkfTable& skf, double k, bool allow_minimal_violation) {
  require_k_above_one(k, allow_minimal_violation);
  PenaltyTable t = make_table(PenaltyKind::kKnownVariance, k, skf, 0, skf.max_rank());
  for (int r = 1; r <= skf.max_rank(); ++r) t.values[static_cast<std::size_t>(r)] = k * skf.squared(r);
  return t;
}

PenaltyTable pen_prime(const kyfan::SkfTable& skf, double k, int m, int r_max, bool allow_minimal_violation) {
  require_k_above_one(k, allow_minimal_violation);
  require_r_max(skf, r_max);
  if (m < 1) throw_argument("sample size m must be positive");
  PenaltyTable t = make_table(PenaltyKind::kUnknownPrime, k, skf, m, r_max);
  const double nm = t.nm();
  for (int r = 1; r <= r_max; ++r) {
    const double ks2 = k * skf.squared(r);
    if (!(1.0 + ks2 < nm)) {
      throw_infeasible("penalty-infeasible",
                       "K S(r)^2 + 1 < nm fails at r = " + std::to_string(r) + " (K S^2 + 1 = " +
                           std::to_string(1.0 + ks2) + ", nm = " + std::to_string(nm) + ")");
    }
    t.values[static_cast<std::size_t>(r)] = ks2 / (1.0 - (1.0 + ks2) / nm);
  }
  return t;
}

PenaltyTable pen_prime_subminimal(const kyfan::SkfTable& skf, double k, int m, int r_max) {
  if (!(k > 0.0)) throw_argument("K must be positive");
  require_r_max(skf, r_max);
  if (m < 1) throw_argument("sample size m must be positive");
  PenaltyTable t = make_table(PenaltyKind::kUnknownSubminimal, k, skf, m, r_max);
  const double nm = t.nm();
  for (int r = 1; r <= r_max; ++r) {
    const double ks2 = k * skf.squared(r);
    if (!(ks2 < nm)) {
      throw_infeasible("penalty-infeasible", "K S(r)^2 < nm fails at r = " + std::to_string(r));
    }
    t.values[static_cast<std::size_t>(r)] = ks2 / (1.0 - ks2 / nm);
  }
  return t;
}

PenaltyTable pen_log(const kyfan::SkfTable& skf, double k, int m, int r_max, bool allow_minimal_violation) {
  require_k_above_one(k, allow_minimal_violation);
  require_r_max(skf, r_max);
  if (m < 1) throw_argument("sample size m must be positive");
  PenaltyTable t = make_table(PenaltyKind::kUnknownLog, k, skf, m, r_max);
  const double denom = t.nm() - 1.0;
  for (int r = 1; r <= r_max; ++r) {
    const double u = k * skf.squared(r) / denom;
    if (!(u < 1.0)) {
      throw_infeasible("penalty-infeasible",
                       "K S(r)^2 < nm - 1 fails at r = " + std::to_string(r) + "; log penalty undefined");
    }
    t.values[static_cast<std::size_t>(r)] = -std::log1p(-u);
  }
  return t;
}

int r_max_default(int q, int n, int m, double k, double alpha) {
  if (q < 1 || n < 1 || m < 1) throw_argument("dimensions must be positive");
  require_k_above_one(k, false);
  if (!(alpha > 0.0 && alpha < 1.0)) throw_argument("alpha must lie in (0, 1)");
  const double root = std::sqrt(static_cast<double>(q)) + std::sqrt(static_cast<double>(n));
  const double bound = alpha * (static_cast<double>(n) * m - 1.0) / (k * root * root);
  const double capped = std::min(static_cast<double>(std::min(q, n)), std::floor(bound));
  if (capped < 1.0) {
    throw_infeasible("penalty-infeasible",
                     "penalty regime infeasible at these dimensions: r_max bound " + std::to_string(bound) +
                         " < 1 (q=" + std::to_string(q) + ", n=" + std::to_string(n) +
                         ", m=" + std::to_string(m) + ", K=" + std::to_string(k) + ")");
  }
  return static_cast<int>(capped);
}

int r_max_feasible(const kyfan::SkfTable& skf, double k, int m) {
  const double nm = static_cast<double>(skf.n) * m;
  int r = 0;
  while (r < skf.max_rank() && k * skf.squared(r + 1) + 1.0 < nm) ++r;
  return r;
}

SelectionReport select_known_variance(std::span<const double> rss, const PenaltyTable& pen,
                                      double sigma2, int r_max) {
  if (!(sigma2 > 0.0)) throw_argument("sigma2 must be positive");
  require_path(rss, r_max);
  if (r_max > pen.max_rank()) throw_argument("penalty table does not cover r_max");
  SelectionReport report;
  report.method = Method::kKfKnown;
  report.penalty_kind = pen.kind;
  report.k = pen.k;
  report.sigma2 = sigma2;
  report.q = pen.q;
  report.n = pen.n;
  report.r_min = 0;
  report.r_max = r_max;
  for (int r = 0; r <= r_max; ++r) {
    const double p = pen.at(r);
    report.rss.push_back(rss[static_cast<std::size_t>(r)]);
    report.penalty.push_back(p);
    report.criterion.push_back(rss[static_cast<std::size_t>(r)] + p * sigma2);
  }
  finish(report);
  return report;
}

SelectionReport select_unknown_variance(std::span<const double> rss, const PenaltyTable& pen_prime,
                                        int r_max) {
  if (r_max < 1) throw_argument("empty candidate set {1..r_max}");
  require_path(rss, r_max);
  if (r_max > pen_prime.max_rank()) throw_argument("penalty table does not cover r_max");
  SelectionReport report;
  report.method = Method::kKf;
  report.penalty_kind = pen_prime.kind;
  report.k = pen_prime.k;
  report.q = pen_prime.q;
  report.n = pen_prime.n;
  report.m = pen_prime.m;
  report.r_min = 1;
  report.r_max = r_max;
  const double nm = pen_prime.nm();
  for (int r = 1; r <= r_max; ++r) {
    const double p = pen_prime.at(r);
    const double value = rss[static_cast<std::size_t>(r)];
    report.rss.push_back(value);
    report.penalty.push_back(p);
    report.criterion.push_back(value * (1.0 + p / nm));
  }
  finish(report);
  return report;
}

double log_criterion(std::span<const double> rss, const PenaltyTable& pen_log, int r) {
  return std::log(rss[static_cast<std::size_t>(r)]) + pen_log.at(r);
}

double sigma_hat2(const Matrix& y, const Projector& proj) {
  const Eigen::Index m = y.rows();
  const Eigen::Index n = y.cols();
  if (proj.matrix.rows() != m) throw_argument("projector and response row counts differ");
  if (proj.q >= m) {
    throw_infeasible("variance-not-estimable",
                     "variance not estimable: design has full row rank (rank(X) = m = " +
                         std::to_string(m) + ")");
  }
  const Matrix fitted = proj.q > 0 ? Matrix(proj.basis * (proj.basis.transpose() * y)) : Matrix::Zero(m, n);
  return squared_distance(y, fitted) / static_cast<double>((m - proj.q) * n);
}

SelectionReport rsc_select(std::span<const double> rss, double lambda, int n, int rank_x, int r_max) {
  if (!(lambda >= 0.0)) throw_argument("lambda must be nonnegative");
  require_path(rss, r_max);
  SelectionReport report;
  report.method = Method::kRsc;
  report.penalty_kind = PenaltyKind::kRscLinear;
  report.lambda = lambda;
  report.q = rank_x;
  report.n = n;
  report.r_min = 0;
  report.r_max = r_max;
  for (int r = 0; r <= r_max; ++r) {
    const double p = lambda * static_cast<double>(n + rank_x) * r;
    report.rss.push_back(rss[static_cast<std::size_t>(r)]);
    report.penalty.push_back(p);
    report.criterion.push_back(rss[static_cast<std::size_t>(r)] + p);
  }
  finish(report);
  return report;
}

SelectionReport rsci_select(std::span<const double> rss, const Matrix& y, const Projector& proj,
                            double k, int r_max) {
  if (!(k > 0.0)) throw_argument("K must be positive");
  const double s2 = sigma_hat2(y, proj);
  SelectionReport report = rsc_select(rss, k * s2, static_cast<int>(y.cols()), proj.q, r_max);
  report.method = Method::kRsci;
  report.k = k;
  report.sigma2 = s2;
  report.m = static_cast<int>(y.rows());
  return report;
}

SelectionReport select_rank(const FitPath& path, const Matrix& y, const SelectorConfig& config) {
  const int q = path.design_rank();
  const int n = static_cast<int>(path.responses());
  const int m = static_cast<int>(path.rows());
  const int cap = path.max_rank();
  if (config.r_max && (*config.r_max < 0 || *config.r_max > cap)) {
    throw_argument("r_max = " + std::to_string(*config.r_max) + " outside 0.." + std::to_string(cap));
  }

  SelectionReport report;
  switch (config.method) {
    case Method::kKf: {
      if (q == 0) throw_infeasible("design-rank-zero", "design has rank 0; no rank can be selected");
      const kyfan::SkfTable skf = kyfan::skf_auto(q, n, config.skf);
      if (config.allow_minimal_violation && config.k <= 1.0) {
        int r_max = config.r_max.value_or(0);
        if (!config.r_max) {
          const double nm = static_cast<double>(n) * m;
          while (r_max < cap - 1 && config.k * skf.squared(r_max + 1) < nm) ++r_max;
        }
        if (r_max < 1) throw_infeasible("penalty-infeasible", "no feasible rank for the sub-minimal penalty");
        report = select_unknown_variance(path.rss_path(), pen_prime_subminimal(skf, config.k, m, r_max), r_max);
      } else {
        const int r_max = config.r_max.value_or(r_max_default(q, n, m, config.k, config.alpha));
        report = select_unknown_variance(
            path.rss_path(), pen_prime(skf, config.k, m, r_max, config.allow_minimal_violation), r_max);
      }
      report.skf_method = skf.method;
      break;
    }
    case Method::kKfKnown: {
      if (!config.sigma2) throw_argument("known-variance selection requires sigma2");
      const int r_max = config.r_max.value_or(cap);
      if (q == 0) {
        require_k_above_one(config.k, config.allow_minimal_violation);
        PenaltyTable empty;
        empty.k = config.k;
        empty.n = n;
        empty.values = {0.0};
        report = select_known_variance(path.rss_path(), empty, *config.sigma2, 0);
      } else {
        const kyfan::SkfTable skf = kyfan::skf_auto(q, n, config.skf);
        report = select_known_variance(path.rss_path(), pen_known(skf, config.k, config.allow_minimal_violation),
                                       *config.sigma2, r_max);
        report.skf_method = skf.method;
      }
      break;
    }
    case Method::kRsc:
      report = rsc_select(path.rss_path(), config.lambda, n, q, config.r_max.value_or(cap));
      break;
    case Method::kRsci:
      report = rsci_select(path.rss_path(), y, path.projector(), config.k, config.r_max.value_or(cap));
      break;
    case Method::kFamily:
      throw_argument("family selection needs explicit candidates; use select_family");
  }
  report.q = q;
  report.n = n;
  report.m = m;
  return report;
}

FamilySelection select_family(std::span<const FamilyCandidate> candidates, const PenaltyTable& pen,
                              std::optional<double> rank_tol) {
  if (candidates.empty()) throw_argument("empty candidate family");
  const double nm = pen.nm();
  if (!(nm > 0.0)) throw_argument("penalty table lacks the dimensions n, m");
  FamilySelection out;
  for (const FamilyCandidate& c : candidates) {
    const int rank = numerical_rank(c.coefficients, rank_tol);
    if (rank > pen.max_rank()) {
      throw_argument("candidate rank " + std::to_string(rank) + " exceeds penalty table range 0.." +
                     std::to_string(pen.max_rank()));
    }
    out.ranks.push_back(rank);
    out.criterion.push_back(c.rss * (1.0 + pen.at(rank) / nm));
  }
  for (std::size_t i = 1; i < out.criterion.size(); ++i) {
    if (out.criterion[i] < out.criterion[out.index]) out.index = i;
  }
  return out;
}

}  // namespace lowrank::selection
