#pragma once

// Maximum-likelihood estimation of (theta, sigma, lambda) from equidistant
// increments, optimized over (theta, log sigma, log lambda).

#include "jumplan/density.hpp"
#include "jumplan/model.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace jumplan {

struct OptimizerConfig {
  double grad_tolerance = 1e-8;  // on the rate-normalized gradient norm
  int max_iterations = 200;
  TruncationPolicy truncation;

  void validate() const;
};

struct NllValue {
  double value = 0.0;                              // -sum log p
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();  // in (theta, log sigma, log lambda)
  Eigen::Vector3d natural_grad = Eigen::Vector3d::Zero();  // in (theta, sigma, lambda)
};

NllValue neg_log_likelihood_and_grad(const ModelParams& params,
                                     std::span<const double> increments, double delta,
                                     const TruncationPolicy& policy = {});

/// Moment starting values. Throws DomainError with fewer than 10 increments.
ModelParams init_moments(std::span<const double> increments, double delta);

struct EstimateResult {
  ModelParams params_hat;
  Eigen::Vector3d std_errors = Eigen::Vector3d::Zero();  // sqrt(diag Gamma^-1) / rate
  double grad_norm_at_opt = 0.0;  // rate-normalized
  int iterations = 0;
  bool converged = false;
  double log_likelihood = 0.0;
};

/// BFGS on the negative log-likelihood, started from the expected information
/// at `init`. Returns the best iterate with converged = false if the gradient
/// tolerance is not met.
EstimateResult fit_mle(std::span<const double> increments, double delta,
                       const ModelParams& init, const OptimizerConfig& config = {});

struct RateStudyRow {
  std::int64_t n = 0;
  double delta = 0.0;
  RateVector rates;
  int replicates_used = 0;
  int nonconverged = 0;
  Eigen::Vector3d rmse = Eigen::Vector3d::Zero();
  Eigen::Vector3d scaled_rmse = Eigen::Vector3d::Zero();  // rmse times rate
  std::vector<Eigen::Vector3d> scaled_errors;  // rate * (estimate - truth), converged fits only
};

struct RateStudy {
  ModelParams params;
  GridScheme scheme;
  std::vector<RateStudyRow> rows;
  Eigen::Vector3d stability_ratio = Eigen::Vector3d::Zero();  // max/min scaled rmse across n
  bool stable[3] = {false, false, false};                     // ratio <= 1.5

  bool all_stable() const { return stable[0] && stable[1] && stable[2]; }
};

/// Replicate r at every n uses the path seeded by {root_seed, r}. Each fit
/// starts from init_moments. Throws std::invalid_argument unless n_list is
/// strictly increasing with at least 3 entries.
RateStudy rate_study(const ModelParams& params, const GridScheme& scheme,
                     std::span<const std::int64_t> n_list, int replicates,
                     std::uint64_t root_seed, int jobs = 1,
                     const OptimizerConfig& config = {});

}  // namespace jumplan
