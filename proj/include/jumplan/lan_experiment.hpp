#pragma once

#include "jumplan/density.hpp"
#include "jumplan/model.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace jumplan {

enum class InnerMethod { quadrature, monte_carlo };

struct LanConfig {
  ModelParams params{1.0, 1.0, 1.0};
  Perturbation z{1.0, 1.0, 1.0};
  GridScheme scheme{1.0, 0.4};
  std::vector<std::int64_t> n_list{2000, 8000, 32000};
  int replicates = 200;
  std::uint64_t root_seed = 1;
  int quadrature_order = 16;
  TruncationPolicy truncation;
  int decomposition_subsample = 10;
  int jobs = 1;

  // limit_checks only: how conditional expectations given the past are taken.
  InnerMethod inner_method = InnerMethod::quadrature;
  int inner_draws = 512;
  int inner_panels = 256;

  /// Throws DomainError / std::invalid_argument on an unusable configuration.
  /// `for_report` enforces replicates >= 100.
  void validate(bool for_report = true) const;
};

struct LanRow {
  std::int64_t n = 0;
  double delta = 0.0;
  int replicates_used = 0;
  int failures = 0;
  double empirical_mean_lr = 0.0;
  double empirical_var_lr = 0.0;
  double theory_mean = 0.0;
  double theory_var = 0.0;
  bool degenerate = false;      // z = 0: the limit is a point mass, KS skipped
  double ks_statistic = 0.0;    // standardized LR vs N(0, 1)
  double ks_critical_1pct = 0.0;
  double contiguity_mean = 0.0;  // sample mean of exp(LR)
  double contiguity_stderr = 0.0;
  double decomposition_residual = 0.0;  // max |direct LR - sum of terms|
  int decomposition_paths = 0;
  Eigen::Matrix3d score_covariance = Eigen::Matrix3d::Zero();  // rate-normalized score sums
  Eigen::Vector3d score_mean = Eigen::Vector3d::Zero();
  double regression_slope = 0.0;      // LR on z^T S_n
  double regression_intercept = 0.0;
  std::vector<double> lr;             // per replicate; NaN for failed replicates
};

struct LanReport {
  LanConfig config;
  FisherMatrix gamma;
  std::vector<LanRow> rows;
};

/// Simulates `replicates` paths for every n in n_list, evaluates the exact
/// log-likelihood ratio and the rate-normalized score sums, and decomposes the
/// first `decomposition_subsample` paths term by term. A failing replicate is
/// recorded and excluded; more than 1% failures throws std::runtime_error.
LanReport run_lan_experiment(const LanConfig& config);

}  // namespace jumplan
