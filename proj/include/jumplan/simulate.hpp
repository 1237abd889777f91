#pragma once

// Exact simulation of equidistant observations of the linear jump model.
// Latent Brownian and Poisson increments are kept alongside the observed path.

#include "jumplan/model.hpp"
#include "jumplan/rng.hpp"

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

namespace jumplan {

struct PathRecord {
  SamplingGrid grid;
  std::vector<double> x_obs;        // X at t_0..t_n
  std::vector<double> b_inc;        // B_{t_{k+1}} - B_{t_k}
  std::vector<std::int32_t> n_inc;  // N_{t_{k+1}} - N_{t_k}

  /// Observed increments x_obs[k+1] - x_obs[k].
  std::vector<double> increments() const;
};

PathRecord simulate_path(const ModelParams& params, const SamplingGrid& grid,
                         SeedSpec seed);

/// Replicate r is simulate_path(params, grid, {root_seed, r}) regardless of `jobs`.
std::vector<PathRecord> simulate_batch(const ModelParams& params,
                                       const SamplingGrid& grid,
                                       std::uint64_t root_seed, int replicates,
                                       int jobs = 1);

/// Grids with delta = c n^(-beta). Throws DomainError if any delta > 1, and
/// std::invalid_argument if n_list is empty or not strictly increasing.
std::vector<SamplingGrid> grid_sequence(const GridScheme& scheme,
                                        std::span<const std::int64_t> n_list,
                                        double x0 = 0.0);

/// CSV dump with header "k,t,x,b_inc,n_inc". The final row (k = n) leaves the
/// increment columns empty. With a replicate index a leading "replicate"
/// column is added.
void write_path_csv(std::ostream& os, const PathRecord& path, bool header = true,
                    long replicate = -1);

}  // namespace jumplan
