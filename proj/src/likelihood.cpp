#include "jumplan/likelihood.hpp"

namespace jumplan {

double log_likelihood(const ModelParams& params, std::span<const double> increments,
                      double delta, const TruncationPolicy& policy) {
  double acc = 0.0;
  for (double d : increments) acc += log_transition_density(params, delta, 0.0, d, policy);
  return acc;
}

double log_likelihood_ratio(const ModelParams& from, const ModelParams& to,
                            std::span<const double> increments, double delta,
                            const TruncationPolicy& policy) {
  double acc = 0.0;
  for (double d : increments) {
    acc += log_transition_density(to, delta, 0.0, d, policy) -
           log_transition_density(from, delta, 0.0, d, policy);
  }
  return acc;
}

double log_likelihood_ratio(const ModelParams& params, const Perturbation& z,
                            const PathRecord& path, const TruncationPolicy& policy) {
  const SamplingGrid& grid = path.grid;
  const ModelParams target = localize(params, z, grid.n, grid.delta, 1.0);
  return log_likelihood_ratio(params, target, path.increments(), grid.delta, policy);
}

}  // namespace jumplan
