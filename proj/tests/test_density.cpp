#include "jumplan/density.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace jumplan;

TEST(Density, MatchesExtendedPrecisionSum) {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 200; ++i) {
    const auto pt = oracle::random_point(gen);
    const double ours = log_transition_density(pt.params, pt.delta, 0.0, pt.dx);
    const double ref = oracle::log_density(pt.params, pt.delta, pt.dx);
    EXPECT_NEAR(ours, ref, 1e-12 * std::max(1.0, std::abs(ref))) << i;
  }
}

TEST(Density, Shortcuts) {
  const ModelParams p{0.3, 0.7, 2.0};
  EXPECT_DOUBLE_EQ(log_transition_density(p, 0.1, 1.0, 1.5), log_transition_density(p, 0.1, 0.0, 0.5));
  EXPECT_THROW(log_transition_density(p, 0.0, 0.0, 0.5), DomainError);
  EXPECT_THROW(log_transition_density(p, 0.1, 0.0, std::nan("")), DomainError);
  EXPECT_THROW(log_transition_density({0, -1, 1}, 0.1, 0.0, 0.0), DomainError);
}

TEST(Density, FarIncrementIsFiniteAndAccurate) {
  const ModelParams p{1.0, 1.0, 1.0};
  for (double dx : {6.0, 25.0, -3.0}) {
    const double ours = log_transition_density(p, 0.01, 0.0, dx);
    EXPECT_TRUE(std::isfinite(ours));
    EXPECT_NEAR(ours, oracle::log_density(p, 0.01, dx), 1e-10 * std::abs(ours));
  }
}

TEST(Density, ZeroJumpLimitIsGaussian) {
  const ModelParams p{0.5, 0.8, 1e-12};
  const double delta = 0.2, dx = 0.3;
  const double var = p.sigma * p.sigma * delta;
  const double gauss = -0.5 * std::log(2 * M_PI * var) - std::pow(dx - p.theta * delta, 2) / (2 * var);
  EXPECT_NEAR(log_transition_density(p, delta, 0.0, dx), gauss, 1e-10);
}

TEST(Density, Normalization) {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 20; ++i) {
    const auto pt = oracle::random_point(gen);
    EXPECT_NEAR(oracle::density_mass(pt.params, pt.delta), 1.0, 1e-8) << to_string(pt.params);
  }
}

TEST(Density, WindowMatchesBruteForce) {
  std::mt19937_64 gen(3);
  const TruncationPolicy policy;
  for (int i = 0; i < 300; ++i) {
    auto pt = oracle::random_point(gen);
    if (i % 3 == 0) pt.dx += 7.0;  // force windows away from m = 0
    const TruncationWindow w = truncation_window(pt.params, pt.delta, pt.dx, policy);
    const auto [lo, hi] = oracle::brute_window(pt.params, pt.delta, pt.dx, policy.log_tol, policy.m_cap);
    EXPECT_EQ(w.m_lo, lo) << i;
    EXPECT_EQ(w.m_hi, hi) << i;
    EXPECT_FALSE(w.capped);
  }
}

TEST(Density, CapIsReported) {
  const TruncationPolicy small{46.0, 3};
  const TruncationWindow w = truncation_window({0, 1, 1}, 0.5, 10.0, small);
  EXPECT_TRUE(w.capped);
  EXPECT_EQ(w.m_hi, 3);
  EXPECT_THROW((TruncationPolicy{0.0, 10}.validate()), DomainError);
}

TEST(Density, TruncationRobustness) {
  std::mt19937_64 gen(8);
  for (int i = 0; i < 100; ++i) {
    const auto pt = oracle::random_point(gen);
    const double base = log_transition_density(pt.params, pt.delta, 0.0, pt.dx);
    const double wide = log_transition_density(pt.params, pt.delta, 0.0, pt.dx, {80.0, 2048});
    EXPECT_LT(std::abs(base - wide), 1e-10);
  }
}

TEST(Density, PosteriorIsNormalized) {
  const JumpPosterior post = jump_posterior({1, 1, 1}, 0.5, 1.2);
  double total = 0;
  for (double p : post.probs) total += p;
  EXPECT_NEAR(total, 1.0, 1e-14);
  EXPECT_EQ(post.prob(post.m_hi + 1), 0.0);
}

TEST(Density, ConditionalMoments) {
  const ModelParams p{0.2, 0.6, 3.0};
  const double delta = 0.4, dx = 1.7;
  const PosteriorMoments pm = posterior_moments(p, delta, dx);
  const double mean = conditional_moment(p, delta, dx, [](int m) { return double(m); });
  const double a2 = conditional_moment(p, delta, dx, [&](int m) {
    const double a = dx - m - (p.theta - p.lambda) * delta;
    return a * a;
  });
  EXPECT_NEAR(pm.mean_m, mean, 1e-13);
  EXPECT_NEAR(pm.mean_a2, a2, 1e-13);
  EXPECT_THROW(conditional_moment(p, delta, dx, [](int m) { return m == 1 ? INFINITY : 0.0; }),
               DomainError);
}

TEST(Density, ScoreMatchesFiniteDifferences) {
  std::mt19937_64 gen(21);
  for (int i = 0; i < 100; ++i) {
    const auto pt = oracle::random_point(gen);
    const ScoreVector s = score_vector(pt.params, pt.delta, pt.dx);
    const auto fd = oracle::fd_score(pt.params, pt.delta, pt.dx);
    const double ours[3] = {s.d_theta, s.d_sigma, s.d_lambda};
    for (int c = 0; c < 3; ++c) {
      EXPECT_LE(std::abs(ours[c] - fd[c]), 1e-6 * std::max(1.0, std::abs(fd[c]))) << i << ' ' << c;
    }
  }
}

TEST(Density, ScoreWithoutJumpsIsGaussian) {
  const ModelParams p{0.5, 0.8, 1e-14};
  const double delta = 0.1, dx = 0.2;
  const ScoreVector s = score_vector(p, delta, dx);
  const double r = dx - p.theta * delta;
  EXPECT_NEAR(s.d_theta, r / (p.sigma * p.sigma), 1e-9);
  EXPECT_NEAR(s.d_sigma, -1 / p.sigma + r * r / (std::pow(p.sigma, 3) * delta), 1e-9);
}

TEST(Density, LogSumExp) {
  EXPECT_THROW(log_sum_exp(std::vector<double>{}), DomainError);
  const std::vector<double> one{-745.5};
  EXPECT_EQ(log_sum_exp(one), -745.5);
  const std::vector<double> two{1000.0, 1000.0};
  EXPECT_NEAR(log_sum_exp(two), 1000.0 + std::log(2.0), 1e-12);
  EXPECT_NEAR(log_factorial(10), std::log(3628800.0), 1e-12);
  EXPECT_NEAR(log_factorial(5000), std::lgamma(5001.0), 1e-9);
}
