#include "jumplan/simulate.hpp"

#include "jumplan/parallel.hpp"
#include "jumplan/report_io.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace jumplan {

std::vector<double> PathRecord::increments() const {
  std::vector<double> out;
  if (x_obs.size() < 2) return out;
  out.resize(x_obs.size() - 1);
  for (std::size_t k = 0; k + 1 < x_obs.size(); ++k) out[k] = x_obs[k + 1] - x_obs[k];
  return out;
}

PathRecord simulate_path(const ModelParams& params, const SamplingGrid& grid,
                         SeedSpec seed) {
  validate(params);
  validate(grid);
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(grid.n);
  const double sqrt_delta = std::sqrt(grid.delta);
  const double jump_mean = params.lambda * grid.delta;
  const double drift = (params.theta - params.lambda) * grid.delta;

  PathRecord path;
  path.grid = grid;
  path.x_obs.resize(n + 1);
  path.b_inc.resize(n);
  path.n_inc.resize(n);
  path.x_obs[0] = grid.x0;
  for (std::size_t k = 0; k < n; ++k) {
    const double b = sqrt_delta * rng.normal();
    const std::int32_t jumps = rng.poisson(jump_mean);
    path.b_inc[k] = b;
    path.n_inc[k] = jumps;
    path.x_obs[k + 1] = path.x_obs[k] + (drift + params.sigma * b + static_cast<double>(jumps));
  }
  return path;
}

std::vector<PathRecord> simulate_batch(const ModelParams& params,
                                       const SamplingGrid& grid,
                                       std::uint64_t root_seed, int replicates,
                                       int jobs) {
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  validate(params);
  validate(grid);
  std::vector<PathRecord> out(static_cast<std::size_t>(replicates));
  parallel_for(out.size(), jobs, [&](std::size_t r) {
    out[r] = simulate_path(params, grid, {root_seed, static_cast<std::uint64_t>(r)});
  });
  return out;
}

std::vector<SamplingGrid> grid_sequence(const GridScheme& scheme,
                                        std::span<const std::int64_t> n_list,
                                        double x0) {
  validate(scheme);
  if (n_list.empty()) throw std::invalid_argument("n_list must not be empty");
  std::vector<SamplingGrid> grids;
  grids.reserve(n_list.size());
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const std::int64_t n = n_list[i];
    if (n < 1) throw DomainError("every n must be >= 1");
    if (i > 0 && n <= n_list[i - 1]) {
      throw std::invalid_argument("n_list must be strictly increasing");
    }
    const double delta = scheme.delta_for(n);
    if (delta > 1.0) {
      throw DomainError("scheme gives delta = " + format_double(delta) + " > 1 at n = " +
                        std::to_string(n) + "; the observation step must satisfy delta <= 1");
    }
    grids.push_back({n, delta, x0});
  }
  return grids;
}

void write_path_csv(std::ostream& os, const PathRecord& path, bool header,
                    long replicate) {
  const bool with_rep = replicate >= 0;
  if (header) os << (with_rep ? "replicate," : "") << "k,t,x,b_inc,n_inc\n";
  const std::size_t n = path.b_inc.size();
  for (std::size_t k = 0; k < path.x_obs.size(); ++k) {
    if (with_rep) os << replicate << ',';
    os << k << ',' << format_double(static_cast<double>(k) * path.grid.delta) << ','
       << format_double(path.x_obs[k]) << ',';
    if (k < n) os << format_double(path.b_inc[k]) << ',' << path.n_inc[k];
    else os << ',';
    os << '\n';
  }
}

}  // namespace jumplan
