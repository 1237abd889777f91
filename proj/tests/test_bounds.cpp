#include "jumplan/bounds.hpp"
#include "jumplan/density.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace jumplan;

namespace {

BoundsConfig matched(double delta, double lambda = 1.0) {
  BoundsConfig c;
  c.params = {1, 1, lambda};
  c.bar_params = c.params;
  c.delta = delta;
  c.n = 100;
  return c;
}

}  // namespace

TEST(Bounds, IndicatorZero) {
  const BoundsConfig c = matched(0.01);
  const STable t = s_jp(c, 2, 0.05, 1);
  EXPECT_EQ(t.s, 0.0);
  EXPECT_EQ(t.s12, 0.0);
  EXPECT_EQ(t.rhs11, 0.0);
}

TEST(Bounds, EmptyLowerSumAtZero) {
  const BoundsConfig c = matched(0.01);
  for (double b : {-0.5, 0.0, 0.02, 0.4}) {
    const STable t = s_jp(c, 0, b, 0);
    EXPECT_EQ(t.s11, 0.0);
    EXPECT_EQ(t.s21, 0.0);
  }
}

TEST(Bounds, ReferenceValue) {
  // j = 0, p = 1, b = 0, matched parameters, lambda delta = 0.1, delta = 0.01
  const BoundsConfig c = matched(0.01, 10.0);
  const STable t = s_jp(c, 0, 0.0, 0);
  const double ref = oracle::s_jp(c, 0, 1, 0.0);
  EXPECT_GT(ref, 0.0);
  EXPECT_NEAR(t.s, ref, 1e-12 * ref);
}

TEST(Bounds, MatchesOracleAndSplits) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> z;
  BoundsConfig c = BoundsConfig::at_boundary({1, 1, 1}, 0.02, 0.25, 1);
  c.j_max = 6;
  for (int i = 0; i < 200; ++i) {
    const double b = std::sqrt(c.delta) * z(gen) * 2.0;
    const int j = i % 7;
    for (int p : {0, 1, 2}) {
      const STable t = s_jp(c, j, p, b, j);
      const double ref = oracle::s_jp(c, j, p, b);
      EXPECT_NEAR(t.s, ref, 1e-12 * ref + 1e-300) << j << ' ' << p << ' ' << b;
      EXPECT_NEAR(t.s, t.s1 + t.s2, 1e-12 * t.s);
      EXPECT_NEAR(t.s1, t.s11 + t.s12, 1e-12 * t.s1);
      EXPECT_NEAR(t.s2, t.s21 + t.s22, 1e-12 * t.s2);
      EXPECT_TRUE((t.s1 == 0.0) || (t.s2 == 0.0));
      EXPECT_GE(t.s11, 0.0);
      EXPECT_GE(t.s22, 0.0);
    }
  }
}

TEST(Bounds, PosteriorComplementCrossCheck) {
  // with matched parameters and p = 0, S is 1 - posterior probability of j
  for (int j : {0, 1, 3}) {
    for (double b : {-0.2, 0.0, 0.13, 0.31}) {
      const BoundsConfig c = matched(0.05, 2.0);
      const STable t = s_jp(c, j, 0, b, j);
      const ModelParams& p = c.params;
      const double d = (p.theta - p.lambda) * c.delta + p.sigma * b + j;
      const JumpPosterior post = jump_posterior(c.bar_params, c.delta, d, {200.0, 512});
      double complement = 0.0;
      for (int m = post.m_lo; m <= post.m_hi; ++m) {
        if (m != j) complement += post.prob(m);
      }
      EXPECT_NEAR(t.s, complement, 1e-10) << j << ' ' << b;
    }
  }
}

TEST(Bounds, OuterRegionBound) {
  // beyond delta^alpha the m < j part is bounded by j^p
  const BoundsConfig c = matched(0.01);
  const STable t = s_jp(c, 3, 2, -0.6, 3);
  EXPECT_EQ(t.s11, 0.0);
  EXPECT_DOUBLE_EQ(t.rhs21, 9.0);
  EXPECT_LE(t.s21, t.rhs21);
  const STable inside = s_jp(c, 3, 2, 0.1, 3);
  EXPECT_EQ(inside.rhs21, 0.0);
  EXPECT_EQ(inside.s21, 0.0);
}

TEST(Bounds, DefaultCheckHasNoViolations) {
  BoundsConfig c = BoundsConfig::at_boundary({1, 1, 1}, 0.001, 0.25, 0);
  c.j_max = 6;
  for (int p : {0, 1, 2}) {
    c.p = p;
    const BoundsCheckReport r = lemma_bounds_check(c, 20000);
    EXPECT_TRUE(r.pass()) << p;
    EXPECT_TRUE(r.enforced);
    EXPECT_EQ(r.evaluations, 20000 * 7);
    EXPECT_EQ(r.nontrivial, 20000);
  }
}

TEST(Bounds, CheckIndependentOfJobs) {
  BoundsConfig c = BoundsConfig::at_boundary({1, 1, 1}, 0.02, 0.25, 1);
  const BoundsCheckReport a = lemma_bounds_check(c, 10000);
  c.jobs = 3;
  const BoundsCheckReport b = lemma_bounds_check(c, 10000);
  EXPECT_EQ(a.violations, b.violations);
  EXPECT_FALSE(a.enforced);
}

TEST(Bounds, Hypothesis) {
  BoundsConfig c = BoundsConfig::at_boundary({1, 1, 1}, 0.01, 0.25, 1);
  EXPECT_NO_THROW(c.validate());
  EXPECT_NEAR(c.bar_params.theta - c.params.theta, 1.0 / std::sqrt(c.n * c.delta), 1e-15);
  c.bar_params.theta += 0.01;
  EXPECT_THROW(c.validate(), DomainError);
  c = BoundsConfig::at_boundary({1, 1, 1}, 0.01, 0.6, 1);
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(Bounds, EstimatesDecrease) {
  std::vector<MEstimate> es;
  for (double d : {0.02, 0.01, 0.005, 0.002}) {
    BoundsConfig c = BoundsConfig::at_boundary({1, 1, 1}, d, 0.25, 0);
    c.replicates = 20000;
    es.push_back(estimate_M(c));
    EXPECT_GE(es.back().m1_hat, 0.0);
    EXPECT_GE(es.back().m2_hat, 0.0);
    EXPECT_FALSE(es.back().tail_flag);
  }
  for (std::size_t i = 1; i < es.size(); ++i) {
    EXPECT_LT(es[i].log_m1, es[i - 1].log_m1);
    EXPECT_LT(es[i].log_m2, es[i - 1].log_m2);
  }
  const DecayFit f = decay_fit(es, 0.25);
  EXPECT_LT(f.slope, 0.0);
  EXPECT_TRUE(f.decays);
}

TEST(Bounds, VanishingIntensity) {
  BoundsConfig c = BoundsConfig::at_boundary({1, 1, 1e-6}, 0.01, 0.25, 1);
  c.bar_params.lambda = 1e-6;
  c.replicates = 20000;
  const MEstimate e = estimate_M(c);
  EXPECT_LT(e.m1_hat + e.m2_hat, 1e-12);
}

TEST(Bounds, DecayFitExact) {
  const double alpha = 0.25, c1 = 3.0, c2 = 0.5;
  std::vector<MEstimate> es;
  for (double d : {0.02, 0.01, 0.005, 0.002}) {
    MEstimate e;
    e.delta = d;
    const double x = std::pow(d, -(1 - 2 * alpha));
    e.log_m1 = std::log(c1 / 2) - x / c2;
    e.log_m2 = std::log(c1 / 2) - x / c2;
    es.push_back(e);
  }
  const DecayFit f = decay_fit(es, alpha);
  EXPECT_NEAR(f.slope, -1 / c2, 1e-10);
  EXPECT_NEAR(f.intercept, std::log(c1), 1e-10);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(Bounds, DecayFitDegenerate) {
  std::vector<MEstimate> es(4);
  const double ds[4] = {0.02, 0.01, 0.005, 0.002};
  for (int i = 0; i < 4; ++i) {
    es[i].delta = ds[i];
    es[i].log_m1 = es[i].log_m2 = -1.0;
  }
  const DecayFit flat = decay_fit(es, 0.25);
  EXPECT_NEAR(flat.slope, 0.0, 1e-14);
  EXPECT_FALSE(flat.decays);
  es[2].log_m1 = es[2].log_m2 = -INFINITY;
  EXPECT_THROW(decay_fit(es, 0.25), DomainError);
}
