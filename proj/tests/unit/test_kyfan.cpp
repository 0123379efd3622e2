#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "lowrank/error.hpp"
#include "lowrank/kyfan.hpp"

using namespace lowrank;
using namespace lowrank::kyfan;

namespace {

// Independent route: tanh-sinh on the raw density, x-substitution free.
double raw_tail(double x, double beta, bool moment) {
  const auto mp = MpParams::from_beta(beta);
  boost::math::quadrature::tanh_sinh<double> integrator;
  const auto f = [&](double t) {
    const double d = mp_density(t, beta);
    return moment ? t * d : d;
  };
  return integrator.integrate(f, std::max(x, mp.support_lo), mp.support_hi);
}

}  // namespace

TEST_CASE("monte carlo anchors at q = 1") {
  const SkfTable t1 = skf_monte_carlo(1, 1, 100000, 3);
  REQUIRE(t1.max_rank() == 1);
  CHECK(std::abs(t1.values[0] - 0.7978845608028654) < 3.0 * t1.std_errors[0]);
  const SkfTable t5 = skf_monte_carlo(1, 5, 100000, 4);
  CHECK(std::abs(t5.values[0] - 2.1276921621409746) < 3.0 * t5.std_errors[0]);
  CHECK(t5.method == SkfMethod::kMonteCarlo);
  CHECK(*t5.nsim == 100000);
  CHECK(*t5.seed == 4);
}

TEST_CASE("monte carlo tables are strictly increasing and deterministic") {
  for (auto [q, n] : {std::pair{3, 8}, {8, 3}, {6, 6}, {1, 4}}) {
    const SkfTable a = skf_monte_carlo(q, n, 50, 99);
    const SkfTable b = skf_monte_carlo(q, n, 50, 99);
    CHECK(a.values == b.values);
    CHECK(a.max_rank() == std::min(q, n));
    for (int r = 1; r < a.max_rank(); ++r) CHECK(a.values[r] > a.values[r - 1]);
  }
  CHECK_THROWS_AS(skf_monte_carlo(0, 3, 10, 1), Error);
  CHECK_THROWS_AS(skf_monte_carlo(3, 3, 0, 1), Error);
}

TEST_CASE("table lookup") {
  const SkfTable t = skf_marchenko_pastur(3, 7);
  CHECK(t.at(0) == 0.0);
  CHECK(t.squared(2) == doctest::Approx(t.values[1] * t.values[1]));
  CHECK_THROWS_AS(t.at(4), Error);
  CHECK_THROWS_AS(t.at(-1), Error);
}

TEST_CASE("marchenko-pastur density") {
  CHECK(mp_density(2.0, 1.0) == doctest::Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-14));
  const double beta = 0.5;
  const auto mp = MpParams::from_beta(beta);
  CHECK(mp.support_lo == doctest::Approx(std::pow(1 - std::sqrt(0.5), 2)));
  CHECK(mp_density(mp.support_hi, beta) == 0.0);
  CHECK(mp_density(mp.support_lo - 0.01, beta) == 0.0);
  CHECK(mp_density(5.0, beta) == 0.0);
  CHECK_THROWS_AS(mp_density(1.0, 0.0), Error);
  CHECK_THROWS_AS(mp_density(1.0, 1.5), Error);
  const auto d = MpParams::for_dims(7, 3);
  CHECK(d.beta == doctest::Approx(3.0 / 7.0));
}

TEST_CASE("density normalization and mean") {
  for (double beta : {0.1, 0.5, 1.0}) {
    CAPTURE(beta);
    const auto mp = MpParams::from_beta(beta);
    CHECK(std::abs(mp_tail_mass(mp.support_lo, beta) - 1.0) < 1e-6);
    CHECK(std::abs(mp_tail_moment(mp.support_lo, beta) - 1.0) < 1e-6);
    CHECK(std::abs(raw_tail(mp.support_lo, beta, false) - 1.0) < 1e-6);
  }
}

TEST_CASE("tail integrals against frozen values") {
  struct Case {
    double beta, x, mass, moment;
  };
  for (const Case& c : {Case{0.5, 1.0, 0.4239957848961315, 0.7202978279182561},
                        Case{0.5, 2.0, 0.11880868832697582, 0.2797021720817438},
                        Case{1.0, 1.0, 0.39100221895577064, 0.804498890522115},
                        Case{0.1, 1.2, 0.2836098920973675, 0.39976257289566564}}) {
    CAPTURE(c.beta);
    CAPTURE(c.x);
    CHECK(mp_tail_mass(c.x, c.beta) == doctest::Approx(c.mass).epsilon(1e-9));
    CHECK(mp_tail_moment(c.x, c.beta) == doctest::Approx(c.moment).epsilon(1e-9));
    CHECK(raw_tail(c.x, c.beta, false) == doctest::Approx(c.mass).epsilon(1e-7));
    CHECK(raw_tail(c.x, c.beta, true) == doctest::Approx(c.moment).epsilon(1e-7));
  }
}

TEST_CASE("quantiles") {
  const double eps = 1e-9;
  const auto mp = MpParams::from_beta(0.5);
  CHECK(std::abs(mp_quantile(1.0, 0.5, eps) - mp.support_lo) <= eps);
  CHECK(std::abs(mp_quantile(0.0, 0.5, eps) - mp.support_hi) <= eps);
  const double median = mp_quantile(0.5, 1.0, eps);
  CHECK(median == doctest::Approx(0.6527759416335673).epsilon(1e-8));
  CHECK(std::abs(mp_tail_mass(median, 1.0) - 0.5) < 1e-6);
  for (double beta : {0.1, 0.37, 1.0}) {
    for (double alpha : {0.05, 0.3, 0.8}) {
      CHECK(std::abs(mp_tail_mass(mp_quantile(alpha, beta, eps), beta) - alpha) < 1e-6);
    }
  }
  CHECK_THROWS_AS(mp_quantile(1.5, 0.5, eps), Error);
  CHECK_THROWS_AS(mp_quantile(0.5, 0.5, 0.0), Error);
  try {
    mp_quantile(0.5, 0.5, 1e-300);
    FAIL("expected a bisection error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNumerical);
  }
}

TEST_CASE("marchenko-pastur tables") {
  const SkfTable t = skf_marchenko_pastur(3, 7);
  CHECK(t.method == SkfMethod::kMarchenkoPastur);
  REQUIRE(t.max_rank() == 3);
  CHECK(t.values[0] == doctest::Approx(3.542243196512296).epsilon(1e-8));
  CHECK(t.values[1] == doctest::Approx(4.316020078520932).epsilon(1e-8));
  CHECK(t.values[2] == doctest::Approx(4.5825756949558425).epsilon(1e-8));
  const SkfTable sq = skf_marchenko_pastur(4, 4);
  CHECK(sq.values[0] == doctest::Approx(3.156992369400635).epsilon(1e-8));
  CHECK(sq.values[3] == doctest::Approx(4.0).epsilon(1e-8));
  const SkfTable swapped = skf_marchenko_pastur(7, 3);
  for (int r = 0; r < 3; ++r) CHECK(swapped.values[r] == doctest::Approx(t.values[r]).epsilon(1e-12));
  const SkfTable big = skf_marchenko_pastur(200, 200);
  CHECK(std::abs(big.squared(200) - 40000.0) <= 40000.0 * 1e-4);
  for (int r = 1; r < big.max_rank(); ++r) CHECK(big.values[r] > big.values[r - 1]);
}

TEST_CASE("envelope bounds") {
  auto b = skf_bounds(1, 1, 1);
  CHECK(b.lower == 0.0);
  CHECK(b.upper == 1.0);
  b = skf_bounds(200, 200, 200);
  CHECK(b.lower == doctest::Approx(39999.0));
  CHECK(b.upper == doctest::Approx(40000.0));
  b = skf_bounds(2, 3, 1);
  CHECK(b.lower == doctest::Approx(2.5));
  CHECK(b.upper == doctest::Approx(5.898979485566356).epsilon(1e-14));
  const auto swapped = skf_bounds(3, 2, 1);
  CHECK(swapped.upper == doctest::Approx(b.upper));
  CHECK_THROWS_AS(skf_bounds(2, 3, 3), Error);
  CHECK_THROWS_AS(skf_bounds(2, 3, 0), Error);
}

TEST_CASE("monte carlo stays inside the envelope") {
  for (auto [q, n] : {std::pair{5, 5}, {4, 9}, {12, 7}}) {
    const SkfTable t = skf_monte_carlo(q, n, 400, 21);
    for (int r = 1; r <= t.max_rank(); ++r) {
      const auto b = skf_bounds(q, n, r);
      const double se = 2.0 * t.values[r - 1] * t.std_errors[r - 1];
      CHECK(t.squared(r) >= b.lower - 5.0 * se);
      CHECK(t.squared(r) <= b.upper + 5.0 * se);
    }
  }
}

TEST_CASE("auto policy") {
  CHECK(resolve_policy(5, 5, SkfPolicy::kAuto) == SkfMethod::kMonteCarlo);
  CHECK(resolve_policy(200, 200, SkfPolicy::kAuto) == SkfMethod::kMarchenkoPastur);
  CHECK(resolve_policy(200, 200, SkfPolicy::kMonteCarlo) == SkfMethod::kMonteCarlo);
  CHECK(parse_policy("mp") == SkfPolicy::kMarchenkoPastur);
  CHECK(parse_policy("monte-carlo") == SkfPolicy::kMonteCarlo);
  CHECK_THROWS_AS(parse_policy("exact"), Error);
  const SkfOptions opt{SkfPolicy::kAuto, 50, 8, kDefaultEps};
  const SkfTable a = skf_auto(5, 5, opt);
  const SkfTable b = skf_auto(5, 5, opt);
  CHECK(a.method == SkfMethod::kMonteCarlo);
  CHECK(a.values == b.values);
  CHECK(skf_auto(40, 40, opt).method == SkfMethod::kMarchenkoPastur);
}
