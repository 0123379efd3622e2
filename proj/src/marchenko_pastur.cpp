#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lowrank/error.hpp"
#include "lowrank/kyfan.hpp"

namespace lowrank::kyfan {
namespace {

constexpr double kQuadratureTolerance = 1e-12;
constexpr double kQuadratureAbsTolerance = 1e-9;
constexpr unsigned kQuadratureDepth = 20;
constexpr int kBisectionCap = 200;

void check_beta(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw_argument("Marchenko-Pastur aspect ratio must lie in (0, 1], got " + std::to_string(beta));
  }
}

// Integrals over [x, hi] are taken in the angle variable
//   x(θ) = lo + c (1 - cos θ),  c = (hi - lo) / 2,  θ ∈ [0, π],
// where sqrt((x - lo)(hi - x)) dx = c² sin²θ dθ. Both integrands become
// smooth, including the 1/x pole at lo = 0 when β = 1.
struct AngleForm {
  MpParams mp;
  double c;

  explicit AngleForm(double beta) : mp(MpParams::from_beta(beta)), c((mp.support_hi - mp.support_lo) / 2) {}

  double angle_of(double x) const {
    if (x <= mp.support_lo) return 0.0;
    if (x >= mp.support_hi) return std::numbers::pi;
    return std::acos(std::clamp(1.0 - (x - mp.support_lo) / c, -1.0, 1.0));
  }

  // f_β(x(θ)) dx/dθ
  double mass(double theta) const {
    const double s = std::sin(theta);
    const double half = std::sin(theta / 2);
    const double x = mp.support_lo + 2 * c * half * half;
    if (mp.support_lo == 0.0) {
      // sin²θ / (c(1 - cos θ)) = (1 + cos θ) / c
      return c * (1.0 + std::cos(theta)) / (2 * std::numbers::pi * mp.beta);
    }
    return c * c * s * s / (2 * std::numbers::pi * mp.beta * x);
  }

  // x f_β(x(θ)) dx/dθ
  double moment(double theta) const {
    const double s = std::sin(theta);
    return c * c * s * s / (2 * std::numbers::pi * mp.beta);
  }
};

template <class F>
double integrate_angle(F&& f, double from) {
  if (from >= std::numbers::pi) return 0.0;
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, from, std::numbers::pi, kQuadratureDepth, kQuadratureTolerance, &error);
  if (!std::isfinite(value) || error > kQuadratureAbsTolerance) {
    throw Error(ErrorKind::kNumerical, "quadrature-failed",
                "Marchenko-Pastur quadrature did not reach tolerance (error estimate " +
                    std::to_string(error) + ")");
  }
  return value;
}

}  // namespace

MpParams MpParams::from_beta(double beta) {
  check_beta(beta);
  const double root = std::sqrt(beta);
  return {beta, (1 - root) * (1 - root), (1 + root) * (1 + root)};
}

MpParams MpParams::for_dims(int q, int n) {
  if (q < 1 || n < 1) throw_argument("dimensions must be positive");
  return from_beta(static_cast<double>(std::min(q, n)) / std::max(q, n));
}

double mp_density(double x, double beta) {
  const MpParams mp = MpParams::from_beta(beta);
  if (x <= mp.support_lo || x >= mp.support_hi) return 0.0;
  return std::sqrt((x - mp.support_lo) * (mp.support_hi - x)) / (2 * std::numbers::pi * beta * x);
}

double mp_tail_mass(double x, double beta) {
  const AngleForm form(beta);
  return integrate_angle([&](double t) { return form.mass(t); }, form.angle_of(x));
}

double mp_tail_moment(double x, double beta) {
  const AngleForm form(beta);
  return integrate_angle([&](double t) { return form.moment(t); }, form.angle_of(x));
}

double mp_quantile(double alpha, double beta, double eps) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw_argument("alpha must lie in [0, 1]");
  if (!(eps > 0.0)) throw_argument("eps must be positive");
  const AngleForm form(beta);
  const auto tail = [&](double x) {
    return integrate_angle([&](double t) { return form.mass(t); }, form.angle_of(x));
  };

  double lo = form.mp.support_lo;
  double hi = form.mp.support_hi;
  int iterations = 0;
  while (hi - lo > eps) {
    if (++iterations > kBisectionCap) {
      throw Error(ErrorKind::kNumerical, "bisection-not-converged",
                  "Marchenko-Pastur quantile bracket did not shrink below eps=" + std::to_string(eps));
    }
    const double mid = (lo + hi) / 2;
    if (mid <= lo || mid >= hi) {
      throw Error(ErrorKind::kNumerical, "bisection-not-converged",
                  "eps=" + std::to_string(eps) + " is below floating-point resolution");
    }
    // Upper-tail mass decreases in x.
    if (tail(mid) < alpha) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return (lo + hi) / 2;
}

SkfTable skf_marchenko_pastur(int q, int n, double eps) {
  if (q < 1 || n < 1) throw_argument("S table dimensions must be positive");
  const MpParams mp = MpParams::for_dims(q, n);
  const int k = std::min(q, n);
  const double nq = static_cast<double>(n) * q;

  SkfTable table;
  table.q = q;
  table.n = n;
  table.method = SkfMethod::kMarchenkoPastur;
  table.eps = eps;
  table.values.resize(static_cast<std::size_t>(k));
  for (int r = 1; r <= k; ++r) {
    const double alpha = static_cast<double>(r) / k;
    const double x_alpha = mp_quantile(alpha, mp.beta, eps);
    table.values[static_cast<std::size_t>(r - 1)] = std::sqrt(nq * mp_tail_moment(x_alpha, mp.beta));
  }
  return table;
}

}  // namespace lowrank::kyfan
