#include <doctest.h>

#include <cmath>

#include "lowrank/error.hpp"
#include "lowrank/matrix.hpp"
#include "lowrank/parallel.hpp"
#include "lowrank/reduced_rank.hpp"
#include "lowrank/rng.hpp"
#include "lowrank/simulation.hpp"

using namespace lowrank;
using namespace lowrank::sim;

TEST_CASE("design covariance") {
  const Matrix x = gen_design(4000, 6, 0.0, 1);
  const Matrix cov = x.transpose() * x / 4000.0;
  double off = 0.0;
  int count = 0;
  for (int i = 0; i < 6; ++i) {
    CHECK(std::abs(cov(i, i) - 1.0) < 0.1);
    for (int j = 0; j < 6; ++j) {
      if (i != j) {
        off += std::abs(cov(i, j));
        ++count;
      }
    }
  }
  CHECK(off / count <= 3.0 / std::sqrt(4000.0));

  const Matrix ar = gen_design(20000, 4, 0.5, 2);
  const Matrix c = ar.transpose() * ar / 20000.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(std::abs(c(i, j) - std::pow(0.5, std::abs(i - j))) < 0.05);
  }
  CHECK(gen_design(400, 100, 0.9, 3).rows() == 400);
  CHECK_THROWS_AS(gen_design(5, 5, 1.0, 1), Error);
  CHECK_THROWS_AS(gen_design(5, 5, -1.2, 1), Error);
}

TEST_CASE("coefficients") {
  CHECK(gen_coef(6, 5, 2, 0.0, 1).norm() == 0.0);
  CHECK(numerical_rank(gen_coef(10, 8, 3, 1.0, 2)) == 3);
  CHECK_THROWS_AS(gen_coef(4, 3, 4, 1.0, 1), Error);
  CHECK_THROWS_AS(gen_coef(4, 3, -1, 1.0, 1), Error);
  double sum = 0.0, sum2 = 0.0;
  const int reps = 500;
  const double b = 0.5;
  for (int i = 0; i < reps; ++i) {
    rng::Stream s(9, static_cast<std::uint64_t>(i));
    const double v = gen_coef(4, 3, 2, b, s).squaredNorm();
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum2 / reps - mean * mean) / reps);
  CHECK(std::abs(mean - b * b * 4 * 2 * 3) < 3.0 * se);
}

TEST_CASE("responses") {
  const Matrix x = gen_design(7, 3, 0.2, 1);
  const Matrix a = gen_coef(3, 4, 2, 1.0, 2);
  const Matrix exact = gen_response(x, a, 0.0, 3);
  CHECK((exact - x * a).norm() == 0.0);
  CHECK(exact.rows() == 7);
  CHECK(exact.cols() == 4);
  CHECK_THROWS_AS(gen_response(x, Matrix::Zero(4, 4), 1.0, 1), Error);
  double sum = 0.0, sum2 = 0.0;
  const int reps = 200;
  const double sigma = 1.5;
  for (int i = 0; i < reps; ++i) {
    rng::Stream s(10, static_cast<std::uint64_t>(i));
    const double v = (gen_response(x, a, sigma, s) - x * a).squaredNorm();
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum2 / reps - mean * mean) / reps);
  CHECK(std::abs(mean - sigma * sigma * 28) < 3.0 * se);
}

TEST_CASE("ratio metric") {
  Matrix truth = Matrix::Zero(2, 2);
  Matrix oracle = truth;
  oracle(0, 0) = 1.0;
  CHECK(*ratio_metric(oracle, oracle, truth) == 1.0);
  Matrix far = truth;
  far(0, 0) = 10.0;
  CHECK(*ratio_metric(far, oracle, truth) == kRatioCap);
  Matrix near = truth;
  near(1, 1) = 1.5;
  CHECK(*ratio_metric(near, oracle, truth) == doctest::Approx(2.25));
  CHECK_FALSE(ratio_metric(far, truth, truth).has_value());
}

TEST_CASE("quantiles are type 7") {
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(quantile({1, 2, 3, 4}, 0.1) == doctest::Approx(1.3));
  CHECK(quantile({5}, 0.9) == 5.0);
  CHECK(std::isnan(quantile({}, 0.5)));
}

TEST_CASE("labels") {
  EstimatorSpec kf;
  CHECK(kf.label() == "KF[K=2]");
  EstimatorSpec rsci{selection::Method::kRsci, 2.0, 0.0, {1.2, 1.4}};
  CHECK(rsci.label() == "RSCI[K=CV]");
  EstimatorSpec rsc{selection::Method::kRsc, 2.0, 3.5};
  CHECK(rsc.label() == "RSC[lambda=3.5]");
}

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.m = 30;
  c.p = 6;
  c.n = 5;
  c.r_true = 2;
  c.rho = {0.1, 0.5};
  c.b = {0.05, 1.0};
  c.replicates = 6;
  c.seed = 123;
  c.estimators = {EstimatorSpec{}, EstimatorSpec{selection::Method::kRsci}};
  return c;
}

}  // namespace

TEST_CASE("experiment bookkeeping and determinism") {
  const ExperimentConfig c = small_config();
  const ExperimentResult r1 = run_experiment(c);
  CHECK(r1.records.size() == 2 * 2 * 6 * 2);
  CHECK(r1.aggregates.size() == 8);
  for (const ReplicateRecord& rec : r1.records) {
    REQUIRE(rec.ratio.has_value());
    CHECK(*rec.ratio <= kRatioCap);
    CHECK(*rec.ratio >= 0.0);
    CHECK(rec.r_hat >= 0);
    CHECK(rec.r_hat <= 5);
  }
  const Aggregate* strong = r1.find(0.1, 1.0, "KF[K=2]");
  REQUIRE(strong != nullptr);
  CHECK(strong->available);
  CHECK(strong->mean_r_hat == doctest::Approx(2.0));
  CHECK(strong->median == doctest::Approx(1.0));
  const Aggregate* weak = r1.find(0.1, 0.05, "KF[K=2]");
  CHECK(weak->mean_r_hat <= strong->mean_r_hat);

  setenv("LOWRANK_THREADS", "3", 1);
  const ExperimentResult r2 = run_experiment(c);
  unsetenv("LOWRANK_THREADS");
  REQUIRE(r2.records.size() == r1.records.size());
  for (std::size_t i = 0; i < r1.records.size(); ++i) {
    CHECK(r1.records[i].ratio == r2.records[i].ratio);
    CHECK(r1.records[i].r_hat == r2.records[i].r_hat);
  }
}

TEST_CASE("full row rank design marks RSCI unavailable") {
  ExperimentConfig c = small_config();
  c.m = 20;
  c.p = 30;
  c.n = 30;
  c.rho = {0.5};
  c.b = {0.5};
  c.replicates = 3;
  const ExperimentResult r = run_experiment(c);
  const Aggregate* rsci = r.find(0.5, 0.5, "RSCI[K=2]");
  const Aggregate* kf = r.find(0.5, 0.5, "KF[K=2]");
  REQUIRE(rsci != nullptr);
  CHECK_FALSE(rsci->available);
  CHECK(rsci->unavailable_reason.find("variance-not-estimable") != std::string::npos);
  CHECK(kf->available);
  CHECK(kf->records == 3);
  CHECK(r.records.size() == 3);
}

TEST_CASE("noiseless runs flag records") {
  ExperimentConfig c = small_config();
  c.sigma = 1e-300;
  c.validate();
  c.rho = {0.2};
  c.b = {0.0};
  c.replicates = 2;
  c.estimators = {EstimatorSpec{selection::Method::kRsc, 2.0, 1.0}};
  const ExperimentResult r = run_experiment(c);
  CHECK(r.records.size() == 2);
  CHECK(r.aggregates[0].flagged == 2);
  CHECK_FALSE(r.records[0].ratio.has_value());
}

TEST_CASE("config validation") {
  ExperimentConfig c = small_config();
  c.r_true = 6;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config();
  c.rho = {1.0};
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config();
  c.sigma = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config();
  c.estimators.clear();
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hits(50, 0);
  setenv("LOWRANK_THREADS", "4", 1);
  parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
  CHECK(thread_count() == 4);
  unsetenv("LOWRANK_THREADS");
}

TEST_CASE("mean selected rank grows with the signal") {
  ExperimentConfig c;
  c.m = 100;
  c.p = 25;
  c.n = 25;
  c.r_true = 10;
  c.rho = {0.5};
  c.b = {0.1, 0.2, 0.3, 0.4};
  c.replicates = 40;
  c.seed = 31;
  c.estimators = {EstimatorSpec{}, EstimatorSpec{selection::Method::kRsci}};
  const ExperimentResult r = run_experiment(c);
  for (const char* label : {"KF[K=2]", "RSCI[K=2]"}) {
    for (std::size_t i = 1; i < c.b.size(); ++i) {
      const Aggregate* lo = r.find(0.5, c.b[i - 1], label);
      const Aggregate* hi = r.find(0.5, c.b[i], label);
      const double slack = 2.0 * std::hypot(lo->se_r_hat, hi->se_r_hat);
      CHECK(hi->mean_r_hat >= lo->mean_r_hat - slack);
      CHECK(hi->median >= 1.0 - 1e-12);
    }
  }
}
