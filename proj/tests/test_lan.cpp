#include "jumplan/lan_experiment.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace jumplan;

namespace {

LanConfig small_config() {
  LanConfig c;
  c.n_list = {500, 2000};
  c.replicates = 120;
  c.decomposition_subsample = 5;
  return c;
}

}  // namespace

TEST(Lan, TheoryFromGamma) {
  const LanReport r = run_lan_experiment(small_config());
  ASSERT_EQ(r.rows.size(), 2u);
  for (const LanRow& row : r.rows) {
    EXPECT_DOUBLE_EQ(row.theory_mean, -1.5);
    EXPECT_DOUBLE_EQ(row.theory_var, 3.0);
    EXPECT_EQ(row.replicates_used, 120);
    EXPECT_EQ(row.failures, 0);
    EXPECT_EQ(row.decomposition_paths, 5);
    EXPECT_LT(row.decomposition_residual, 1e-5);
    EXPECT_GT(row.ks_critical_1pct, 0.0);
    EXPECT_EQ(row.lr.size(), 120u);
  }
}

TEST(Lan, Degenerate) {
  LanConfig c = small_config();
  c.z = {0, 0, 0};
  const LanReport r = run_lan_experiment(c);
  for (const LanRow& row : r.rows) {
    EXPECT_TRUE(row.degenerate);
    EXPECT_EQ(row.theory_var, 0.0);
    EXPECT_EQ(row.empirical_var_lr, 0.0);
    EXPECT_EQ(row.contiguity_mean, 1.0);
  }
}

TEST(Lan, IndependentOfJobs) {
  LanConfig c = small_config();
  c.n_list = {400};
  const LanReport a = run_lan_experiment(c);
  c.jobs = 3;
  const LanReport b = run_lan_experiment(c);
  EXPECT_EQ(a.rows[0].lr, b.rows[0].lr);
  EXPECT_EQ(a.rows[0].score_covariance, b.rows[0].score_covariance);
}

TEST(Lan, LrNearQuadraticExpansion) {
  // LR - (z . S - z'Gz/2) shrinks with n; at n = 2000 the regression slope is near 1
  const LanReport r = run_lan_experiment(small_config());
  EXPECT_NEAR(r.rows[1].regression_slope, 1.0, 0.15);
}

TEST(Lan, Validation) {
  LanConfig c = small_config();
  c.replicates = 50;
  EXPECT_THROW(c.validate(true), std::invalid_argument);
  EXPECT_NO_THROW(c.validate(false));
  c = small_config();
  c.n_list = {2000, 500};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_config();
  c.z = {0, -1e4, 0};
  EXPECT_THROW(c.validate(), DomainError);
  c = small_config();
  c.scheme = {2.0, 0.1};
  c.n_list = {2};
  EXPECT_THROW(c.validate(), DomainError);
}
