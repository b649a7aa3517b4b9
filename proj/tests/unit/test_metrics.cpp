#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "deepstq/metrics.hpp"
#include "support/oracles.hpp"

namespace deepstq {
namespace {

using V = std::vector<double>;

V random_vec(std::mt19937_64& rng, std::size_t n, bool ties) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  V v(n);
  for (auto& x : v) x = ties ? std::floor(u(rng) * 4.0) : u(rng);
  return v;
}

TEST(Srocc, PerfectAndReversed) {
  EXPECT_DOUBLE_EQ(srocc(V{1, 2, 3}, V{10, 20, 30}), 1.0);
  EXPECT_DOUBLE_EQ(srocc(V{3, 2, 1}, V{10, 20, 30}), -1.0);
}

TEST(Srocc, TiesUseMidRanks) {
  const V p{1, 2, 2, 4}, t{1, 2, 3, 4};
  EXPECT_EQ(mid_ranks(p), (V{1, 2.5, 2.5, 4}));
  // Pearson of (1, 2.5, 2.5, 4) and (1, 2, 3, 4): cov 4.5, var 4.5 and 5.
  EXPECT_NEAR(srocc(p, t), 4.5 / std::sqrt(4.5 * 5.0), 1e-15);
  EXPECT_NEAR(srocc(p, t), oracle::spearman_direct(p, t), 1e-12);
}

TEST(Srocc, RandomPairsMatchOracle) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 3 + rng() % 18;
    V a = random_vec(rng, n, i % 2 == 0), b = random_vec(rng, n, i % 3 == 0);
    a[0] = -1;  // never constant
    b[1] = 9;
    EXPECT_NEAR(srocc(a, b), oracle::spearman_direct(a, b), 1e-12);
  }
}

TEST(Srocc, InvariantUnderIncreasingTransforms) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 50; ++i) {
    const V a = random_vec(rng, 12, false), b = random_vec(rng, 12, false);
    V cube = a, ex = b;
    for (auto& x : cube) x = x * x * x;
    for (auto& x : ex) x = std::exp(x);
    EXPECT_NEAR(srocc(cube, ex), srocc(a, b), 1e-12);
    EXPECT_NEAR(srocc(a, b), srocc(b, a), 1e-15);
  }
}

TEST(Plcc, ExactLinearity) {
  EXPECT_NEAR(plcc(V{1, 2, 3}, V{2, 4, 6}), 1.0, 1e-15);
  EXPECT_NEAR(plcc(V{1, 2, 3}, V{6, 4, 2}), -1.0, 1e-15);
}

TEST(Plcc, RandomPairsMatchOracle) {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 20; ++i) {
    const V a = random_vec(rng, 20, false), b = random_vec(rng, 20, false);
    EXPECT_NEAR(plcc(a, b), oracle::pearson_direct(a, b), 1e-12);
  }
}

TEST(Plcc, AffineInvarianceAndSymmetry) {
  std::mt19937_64 rng(44);
  for (int i = 0; i < 50; ++i) {
    const V a = random_vec(rng, 15, false), b = random_vec(rng, 15, false);
    V pos = a, neg = a;
    for (auto& x : pos) x = 3.5 * x + 7.0;
    for (auto& x : neg) x = -2.0 * x + 1.0;
    EXPECT_NEAR(plcc(pos, b), plcc(a, b), 1e-12);
    EXPECT_NEAR(plcc(neg, b), -plcc(a, b), 1e-12);
    EXPECT_NEAR(plcc(a, b), plcc(b, a), 1e-15);
  }
}

TEST(Correlation, Errors) {
  EXPECT_THROW(srocc(V{1, 1, 1}, V{1, 2, 3}), UndefinedCorrelation);
  EXPECT_THROW(plcc(V{1, 2, 3}, V{4, 4, 4}), UndefinedCorrelation);
  EXPECT_THROW(srocc(V{1, 2, 3}, V{1, 2}), InvalidArgument);
  EXPECT_THROW(plcc(V{1, 2}, V{1, 2}), InvalidArgument);
  EXPECT_THROW(plcc(V{1, NAN, 2}, V{1, 2, 3}), InvalidArgument);
}

TEST(Logistic, EqualAsymptotesGiveConstant) {
  const LogisticParams p{5, 5, 1, 2};
  for (double x : {-100.0, 0.0, 3.0, 1e6}) EXPECT_DOUBLE_EQ(apply_logistic(p, x), 5.0);
}

TEST(Logistic, MidpointAtBeta3) {
  const LogisticParams p{9, 1, 2.5, -0.7};
  EXPECT_NEAR(apply_logistic(p, 2.5), 5.0, 1e-12);
}

TEST(Logistic, SaturatesWithoutOverflow) {
  const LogisticParams p{1, 0, 0, -1};
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_DOUBLE_EQ(apply_logistic(p, inf), 1.0);
  EXPECT_DOUBLE_EQ(apply_logistic(p, -inf), 0.0);
  EXPECT_DOUBLE_EQ(apply_logistic(p, 1e308), 1.0);
  EXPECT_DOUBLE_EQ(apply_logistic(p, -1e308), 0.0);
  EXPECT_TRUE(std::isfinite(apply_logistic(LogisticParams{1, 0, 0, 1e-300}, 1.0)));
}

TEST(FitLogistic, RecoversGeneratingCurve) {
  std::mt19937_64 rng(45);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int set = 0; set < 5; ++set) {
    const LogisticParams truth{60 + 40 * u(rng), 40 * u(rng), 4 * u(rng) - 2,
                               (u(rng) < 0.5 ? -1 : 1) * (0.5 + 1.5 * u(rng))};
    V x(50), y(50);
    for (int i = 0; i < 50; ++i) {
      x[i] = -5 + 10.0 * i / 49.0;
      y[i] = apply_logistic(truth, x[i]);
    }
    const auto fit = fit_logistic(x, y);
    EXPECT_LT(fit.sse, 1e-10) << "set " << set;
    for (int i = 0; i < 50; ++i) EXPECT_NEAR(apply_logistic(fit.params, x[i]), y[i], 1e-5);
  }
}

TEST(FitLogistic, DecreasingDataGivesDecreasingFit) {
  std::mt19937_64 rng(46);
  std::normal_distribution<double> noise(0.0, 2.0);
  V x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(i * 0.25);
    y.push_back(80.0 - 6.0 * i * 0.25 + noise(rng));
  }
  const auto fit = fit_logistic(x, y);
  double prev = apply_logistic(fit.params, x.front());
  for (int k = 1; k <= 400; ++k) {
    const double q = apply_logistic(fit.params, x.front() + (x.back() - x.front()) * k / 400.0);
    EXPECT_LE(q, prev + 1e-12);
    prev = q;
  }
}

TEST(FitLogistic, Errors) {
  EXPECT_THROW(fit_logistic(V{1, 2, 3, 4, 5}, V{2, 2, 2, 2, 2}), InvalidArgument);
  EXPECT_THROW(fit_logistic(V{1, 2, 3, 4}, V{1, 2, 3, 4}), InvalidArgument);
  EXPECT_THROW(fit_logistic(V{1, 2, 3, 4, NAN}, V{1, 2, 3, 4, 5}), InvalidArgument);
}

TEST(FitLogistic, OptionalLinearTerm) {
  V x, y;
  for (int i = 0; i < 30; ++i) {
    x.push_back(i * 0.3);
    y.push_back(apply_logistic(LogisticParams{10, 2, 4, 0.8, 1.5}, i * 0.3));
  }
  const auto four = fit_logistic(x, y);
  const auto five = fit_logistic(x, y, {.linear_term = true});
  EXPECT_LT(five.sse, four.sse);
  EXPECT_LT(five.sse, 1e-8);
  EXPECT_NEAR(five.params.beta5, 1.5, 1e-4);
}

TEST(EvaluatePredictions, LogisticMappingBeforePlcc) {
  std::mt19937_64 rng(47);
  std::normal_distribution<double> noise(0.0, 0.05);
  V pred, truth;
  for (int i = 0; i < 30; ++i) {
    const double p = i / 29.0;
    pred.push_back(p);
    truth.push_back(100.0 / (1.0 + std::exp(-(p - 0.5) / 0.1)) + noise(rng));
  }
  const auto rep = evaluate_predictions(pred, truth);
  EXPECT_TRUE(rep.logistic_fitted);
  EXPECT_EQ(rep.n, 30u);
  EXPECT_GT(rep.plcc, plcc(pred, truth));
  EXPECT_GT(rep.plcc, 0.999);
  EXPECT_NEAR(rep.srocc, srocc(pred, truth), 0.0);
}

TEST(EvaluatePredictions, FewerThanFivePairsUseRawPlcc) {
  const V pred{1, 2, 3, 5}, truth{2, 3, 7, 8};
  const auto rep = evaluate_predictions(pred, truth);
  EXPECT_FALSE(rep.logistic_fitted);
  EXPECT_DOUBLE_EQ(rep.plcc, plcc(pred, truth));
}

}  // namespace
}  // namespace deepstq
