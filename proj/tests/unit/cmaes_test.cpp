#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "topoproj/cmaes.hpp"
#include "topoproj/errors.hpp"

namespace topoproj {
namespace {

double sphere(const Eigen::VectorXd& x) { return x.squaredNorm(); }

TEST(CmaInit, PopulationSizes) {
  EXPECT_EQ(population_size(1), 4u);
  EXPECT_EQ(population_size(4), 8u);
  const CmaState d1 = cma_init(1, Eigen::VectorXd::Zero(1), 0.3);
  EXPECT_EQ(d1.lambda_pop, 4u);
  EXPECT_EQ(d1.mu, 2u);
  const CmaState d4 = cma_init(4, Eigen::VectorXd::Zero(4), 0.3);
  EXPECT_EQ(d4.lambda_pop, 8u);
  EXPECT_EQ(d4.mu, 4u);
}

TEST(CmaInit, RecombinationWeightsForFourDimensions) {
  // ln(mu + 1/2) - ln i, normalized.
  std::vector<double> raw;
  double sum = 0.0;
  for (int i = 1; i <= 4; ++i) {
    raw.push_back(std::log(4.5) - std::log(static_cast<double>(i)));
    sum += raw.back();
  }
  const CmaState st = cma_init(4, Eigen::VectorXd::Zero(4), 0.3);
  const double frozen[] = {0.5299, 0.2857, 0.1429, 0.0415};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(st.weights[i], raw[static_cast<std::size_t>(i)] / sum, 1e-15);
    EXPECT_NEAR(st.weights[i], frozen[i], 5e-5);
  }
}

TEST(CmaInit, WeightsPositiveDecreasingNormalized) {
  for (std::size_t d = 1; d <= 64; ++d) {
    const CmaState st = cma_init(d, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)), 1.0);
    ASSERT_EQ(static_cast<std::size_t>(st.weights.size()), st.mu);
    EXPECT_NEAR(st.weights.sum(), 1.0, 1e-12);
    for (Eigen::Index i = 0; i < st.weights.size(); ++i) {
      EXPECT_GT(st.weights[i], 0.0);
      if (i > 0) {
        EXPECT_LT(st.weights[i], st.weights[i - 1]);
      }
    }
  }
}

TEST(CmaInit, RejectsBadArguments) {
  EXPECT_THROW((void)cma_init(0, Eigen::VectorXd(), 0.3), InvalidDimension);
  EXPECT_THROW((void)cma_init(3, Eigen::VectorXd::Zero(2), 0.3), InvalidInput);
  EXPECT_THROW((void)cma_init(2, Eigen::VectorXd::Zero(2), 0.0), InvalidInput);
}

TEST(CmaAsk, TinySigmaReturnsMean) {
  CmaState st = cma_init(4, Eigen::VectorXd::Constant(4, 0.7), 1e-300);
  std::mt19937_64 rng(1);
  for (const auto& x : cma_ask(st, rng)) EXPECT_EQ(x, st.mean);
}

TEST(CmaAsk, SameSeedSameCandidates) {
  CmaState a = cma_init(4, Eigen::VectorXd::Ones(4), 0.3);
  CmaState b = a;
  std::mt19937_64 ra(99), rb(99);
  EXPECT_EQ(cma_ask(a, ra), cma_ask(b, rb));
}

TEST(CmaAsk, SampleCovarianceMatchesIdentity) {
  CmaState st = cma_init(4, Eigen::VectorXd::Zero(4), 1.0);
  std::mt19937_64 rng(7);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(4, 4);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
  std::size_t count = 0;
  while (count < 10000) {
    for (const auto& x : cma_ask(st, rng)) {
      acc += x * x.transpose();
      mean += x;
      ++count;
    }
  }
  mean /= static_cast<double>(count);
  const Eigen::MatrixXd cov = acc / static_cast<double>(count) - mean * mean.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov - Eigen::MatrixXd::Identity(4, 4));
  EXPECT_LT(es.eigenvalues().cwiseAbs().maxCoeff(), 0.1);
}

TEST(CmaAsk, FloorsDegenerateCovariance) {
  CmaState st = cma_init(3, Eigen::VectorXd::Zero(3), 1.0);
  st.cov = Eigen::MatrixXd::Zero(3, 3);
  st.cov(0, 0) = 1.0;
  std::mt19937_64 rng(3);
  const auto xs = cma_ask(st, rng);
  EXPECT_EQ(st.covariance_repairs, 1u);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(st.cov);
  EXPECT_GE(es.eigenvalues().minCoeff(), kCovarianceFloor * (1.0 - 1e-6));
  for (const auto& x : xs) EXPECT_TRUE(x.allFinite());
}

TEST(CmaTell, IdenticalCandidatesKeepMean) {
  CmaState st = cma_init(4, Eigen::VectorXd::Constant(4, 0.25), 0.3);
  const std::vector<Eigen::VectorXd> xs(st.lambda_pop, st.mean);
  const std::vector<double> f(st.lambda_pop, 1.0);
  const CmaState next = cma_tell(st, xs, f);
  EXPECT_LE((next.mean - st.mean).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(next.generation, 1u);
}

TEST(CmaTell, SingleParentMovesToBest) {
  CmaState st = cma_init(2, Eigen::VectorXd::Zero(2), 0.5);
  st.mu = 1;
  st.weights = Eigen::VectorXd::Ones(1);
  st.mu_eff = 1.0;
  std::mt19937_64 rng(5);
  const auto xs = cma_ask(st, rng);
  std::vector<double> f;
  for (const auto& x : xs) f.push_back(sphere(x));
  const auto best = std::min_element(f.begin(), f.end()) - f.begin();
  const CmaState next = cma_tell(st, xs, f);
  EXPECT_EQ(next.mean, xs[static_cast<std::size_t>(best)]);
}

TEST(CmaTell, NonFiniteFitnessRanksLast) {
  CmaState st = cma_init(1, Eigen::VectorXd::Zero(1), 1.0);
  std::vector<Eigen::VectorXd> xs;
  for (double v : {5.0, -1.0, 2.0, 3.0}) xs.push_back(Eigen::VectorXd::Constant(1, v));
  const std::vector<double> f{std::nan(""), std::numeric_limits<double>::infinity(), 0.2, 0.1};
  const CmaState next = cma_tell(st, xs, f);
  const double expect = st.weights[0] * 3.0 + st.weights[1] * 2.0;
  EXPECT_NEAR(next.mean[0], expect, 1e-15);
}

TEST(CmaTell, SizeMismatchRejected) {
  CmaState st = cma_init(2, Eigen::VectorXd::Zero(2), 1.0);
  const std::vector<Eigen::VectorXd> xs(3, Eigen::VectorXd::Zero(2));
  const std::vector<double> f(3, 0.0);
  EXPECT_THROW((void)cma_tell(st, xs, f), InvalidInput);
}

TEST(CmaOptimize, SphereConvergesWithSymmetricPsdCovariance) {
  CmaState st = cma_init(4, Eigen::VectorXd::Ones(4), 0.3);
  std::mt19937_64 rng(2024);
  double best = std::numeric_limits<double>::infinity();
  std::size_t generations = 0;
  while (generations < 200 && best >= 1e-10) {
    const auto xs = cma_ask(st, rng);
    std::vector<double> f;
    for (const auto& x : xs) {
      f.push_back(sphere(x));
      best = std::min(best, f.back());
    }
    st = cma_tell(std::move(st), xs, f);
    ++generations;
    ASSERT_EQ(st.cov, st.cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(st.cov);
    ASSERT_GE(es.eigenvalues().minCoeff(), kCovarianceFloor * (1.0 - 1e-6));
  }
  EXPECT_LT(best, 1e-10) << "after " << generations << " generations";
}

TEST(CmaOptimize, BudgetOneEvaluatesOneGeneration) {
  std::size_t calls = 0;
  std::mt19937_64 rng(1);
  const auto r = cma_optimize(
      [&](const Eigen::VectorXd& x) {
        ++calls;
        return sphere(x);
      },
      cma_init(4, Eigen::VectorXd::Ones(4), 0.3), 1, rng);
  EXPECT_EQ(calls, 8u);
  EXPECT_EQ(r.evaluations, 8u);
  EXPECT_EQ(r.history.size(), 1u);
}

TEST(CmaOptimize, ConstantFitnessStopsOnStagnation) {
  std::mt19937_64 rng(11);
  std::vector<Eigen::VectorXd> seen;
  const auto r = cma_optimize(
      [&](const Eigen::VectorXd& x) {
        seen.push_back(x);
        return 3.0;
      },
      cma_init(2, Eigen::VectorXd::Zero(2), 1.0), 1000, rng);
  EXPECT_LT(r.history.size(), 1000u);
  EXPECT_EQ(r.best_fitness, 3.0);
  EXPECT_EQ(r.best_theta, seen.front());
}

TEST(CmaOptimize, DeterministicAndBestEverMonotone) {
  auto run = [] {
    std::mt19937_64 rng(77);
    return cma_optimize(sphere, cma_init(4, Eigen::VectorXd::Ones(4), 0.3), 60, rng);
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.best_theta, b.best_theta);
  EXPECT_EQ(a.best_fitness, b.best_fitness);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].sigma, b.history[i].sigma);
    if (i > 0) {
      EXPECT_LE(a.history[i].best_fitness, a.history[i - 1].best_fitness);
    }
  }
}

TEST(CmaOptimize, ThrowingFitnessScoresInfinity) {
  std::mt19937_64 rng(4);
  int call = 0;
  const auto r = cma_optimize(
      [&](const Eigen::VectorXd& x) -> double {
        if (call++ % 2 == 0) throw std::runtime_error("bad candidate");
        return sphere(x);
      },
      cma_init(2, Eigen::VectorXd::Ones(2), 0.3), 5, rng);
  EXPECT_TRUE(std::isfinite(r.best_fitness));
}

TEST(Theta, EncodeDecodeRoundTrip) {
  const Theta t{{1.0, 10.0, 2.0}, 0.8};
  const Theta back = decode_theta(encode_theta(t));
  EXPECT_NEAR(back.weights.data, 1.0, 1e-14);
  EXPECT_NEAR(back.weights.phys, 10.0, 1e-13);
  EXPECT_NEAR(back.weights.logic, 2.0, 1e-14);
  EXPECT_NEAR(back.beta, 0.8, 1e-14);
}

TEST(Theta, DecodeStaysInRange) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> wide(0.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd raw(4);
    for (auto& x : raw) x = wide(rng);
    const Theta t = decode_theta(raw);
    EXPECT_GT(t.weights.data, 0.0);
    EXPECT_TRUE(std::isfinite(t.weights.phys));
    EXPECT_GT(t.beta, 0.0);
    EXPECT_LT(t.beta, 2.0);
  }
}

TEST(Theta, InvalidInputs) {
  EXPECT_THROW((void)encode_theta({{0.0, 1.0, 1.0}, 0.8}), InvalidInput);
  EXPECT_THROW((void)encode_theta({{1.0, 1.0, 1.0}, 2.0}), InvalidInput);
  EXPECT_THROW((void)decode_theta(Eigen::VectorXd::Zero(3)), InvalidDimension);
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(4);
  raw[1] = std::nan("");
  EXPECT_THROW((void)decode_theta(raw), InvalidInput);
}

}  // namespace
}  // namespace topoproj
