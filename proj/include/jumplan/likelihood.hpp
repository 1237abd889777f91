#pragma once

#include "jumplan/density.hpp"
#include "jumplan/model.hpp"
#include "jumplan/simulate.hpp"

#include <span>

namespace jumplan {

/// sum_k log p(delta, 0, increments[k]); increments are stationary so each
/// transition starts at 0.
double log_likelihood(const ModelParams& params, std::span<const double> increments,
                      double delta, const TruncationPolicy& policy = {});

/// sum_k [log p_{theta_n, sigma_n, lambda_n} - log p_{theta, sigma, lambda}](increment k)
/// with (theta_n, sigma_n, lambda_n) = localize(params, z, n, delta, 1).
/// Reads only path.x_obs.
double log_likelihood_ratio(const ModelParams& params, const Perturbation& z,
                            const PathRecord& path,
                            const TruncationPolicy& policy = {});

/// Same ratio between two arbitrary parameter points.
double log_likelihood_ratio(const ModelParams& from, const ModelParams& to,
                            std::span<const double> increments, double delta,
                            const TruncationPolicy& policy = {});

}  // namespace jumplan
