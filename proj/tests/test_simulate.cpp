#include "jumplan/rng.hpp"
#include "jumplan/simulate.hpp"
#include "jumplan/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

using namespace jumplan;

TEST(Rng, SameKeySameStream) {
  Rng a({3, 4}), b({3, 4}), c({3, 5}), d({3, 4}, 1);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
    EXPECT_NE(x, d.next_u64());
  }
}

TEST(Rng, UniformOpenInterval) {
  Rng r({1, 1});
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, NormalMoments) {
  Rng r({2, 0});
  std::vector<double> xs(200000);
  for (double& x : xs) x = r.normal();
  const SampleSummary s = summarize(xs);
  EXPECT_NEAR(s.mean, 0.0, 4 * std::sqrt(1.0 / xs.size()));
  EXPECT_NEAR(s.variance, 1.0, 4 * std::sqrt(2.0 / xs.size()));
  EXPECT_LT(ks_statistic(xs, normal_cdf), ks_critical_value(0.01, xs.size()));
}

TEST(Rng, PoissonMoments) {
  for (double mean : {0.01, 0.7, 4.0, 37.5}) {
    Rng r({5, 0});
    std::vector<double> xs(100000);
    for (double& x : xs) x = r.poisson(mean);
    const SampleSummary s = summarize(xs);
    EXPECT_NEAR(s.mean, mean, 5 * std::sqrt(mean / xs.size())) << mean;
    EXPECT_NEAR(s.variance, mean, 6 * mean * std::sqrt((2.0 + 1.0 / mean) / xs.size())) << mean;
  }
  Rng r({5, 0});
  EXPECT_EQ(r.poisson(0.0), 0);
}

TEST(Simulate, PathStructure) {
  const SamplingGrid grid{1000, 0.01, 2.5};
  const ModelParams p{1.0, 0.5, 3.0};
  const PathRecord path = simulate_path(p, grid, {7, 0});
  ASSERT_EQ(path.x_obs.size(), 1001u);
  ASSERT_EQ(path.b_inc.size(), 1000u);
  EXPECT_EQ(path.x_obs[0], 2.5);
  for (std::size_t k = 0; k < 1000; ++k) {
    const double inc = (p.theta - p.lambda) * grid.delta + p.sigma * path.b_inc[k] + path.n_inc[k];
    EXPECT_NEAR(path.x_obs[k + 1] - path.x_obs[k], inc, 1e-12);
  }
  EXPECT_EQ(path.increments().size(), 1000u);
}

TEST(Simulate, IncrementLaw) {
  const SamplingGrid grid{200000, 0.05, 0.0};
  const ModelParams p{0.4, 0.9, 2.0};
  const PathRecord path = simulate_path(p, grid, {9, 0});
  const SampleSummary s = summarize(path.increments());
  const IncrementMoments m = increment_moments(p, grid.delta);
  EXPECT_NEAR(s.mean, m.mean, 4 * std::sqrt(m.variance / grid.n));
  EXPECT_NEAR(s.variance, m.variance, 0.02 * m.variance);
  std::vector<double> b(path.b_inc.begin(), path.b_inc.end());
  for (double& x : b) x /= std::sqrt(grid.delta);
  EXPECT_LT(ks_statistic(b, normal_cdf), ks_critical_value(0.01, b.size()));
}

TEST(Simulate, BatchIndependentOfJobs) {
  const SamplingGrid grid{500, 0.02, 0.0};
  const auto one = simulate_batch({1, 1, 1}, grid, 42, 8, 1);
  const auto four = simulate_batch({1, 1, 1}, grid, 42, 8, 4);
  for (int r = 0; r < 8; ++r) {
    EXPECT_EQ(one[r].x_obs, four[r].x_obs);
    EXPECT_EQ(one[r].x_obs, simulate_path({1, 1, 1}, grid, {42, static_cast<std::uint64_t>(r)}).x_obs);
  }
  EXPECT_NE(one[0].x_obs, one[1].x_obs);
}

TEST(Simulate, GridSequence) {
  const std::vector<std::int64_t> ok{100, 1000};
  const auto grids = grid_sequence({1.0, 0.5}, ok);
  EXPECT_DOUBLE_EQ(grids[1].delta, std::pow(1000.0, -0.5));
  const std::vector<std::int64_t> small{2};
  EXPECT_THROW(grid_sequence({2.0, 0.1}, small), DomainError);
  const std::vector<std::int64_t> bad{1000, 100};
  EXPECT_THROW(grid_sequence({1.0, 0.5}, bad), std::invalid_argument);
  EXPECT_THROW(grid_sequence({1.0, 0.5}, std::vector<std::int64_t>{}), std::invalid_argument);
}

TEST(Simulate, CsvLayout) {
  const PathRecord path = simulate_path({1, 1, 1}, {3, 0.1, 0.0}, {1, 0});
  std::ostringstream os;
  write_path_csv(os, path);
  std::istringstream in(os.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "k,t,x,b_inc,n_inc");
  EXPECT_EQ(lines[4].substr(lines[4].size() - 2), ",,");
  std::ostringstream with_rep;
  write_path_csv(with_rep, path, true, 3);
  EXPECT_EQ(with_rep.str().substr(0, 10), "replicate,");
  // 17 significant digits round-trip
  const std::string x1 = lines[2].substr(lines[2].find(',', 2) + 1);
  EXPECT_EQ(std::stod(x1.substr(0, x1.find(','))), path.x_obs[1]);
}
