#pragma once

// Monte Carlo rendering of the seven convergence claims behind the LAN limit.
// For zeta = xi + eta + beta and conditional expectations given the past,
//
//   1. sum_k (H + M - R)                                      -> 0
//   2. sum_k E[zeta | F]                                      -> -z^T Gamma z / 2
//   3. sum_k (E[xi^2 + eta^2 + beta^2 | F] - E[xi|F]^2 - ...) -> u^2/s^2 + 2v^2/s^2 + w^2(1 + s^2/l)/s^2
//   4. sum_k E[xi^4 + eta^4 + beta^4 | F]                     -> 0
//   5. sum_k Cov(xi, eta | F)                                 -> 0
//   6. sum_k Cov(xi, beta | F)                                -> -u w / s^2
//   7. sum_k Cov(eta, beta | F)                               -> 0

#include "jumplan/lan_experiment.hpp"

#include <array>
#include <string>
#include <vector>

namespace jumplan {

struct LimitEstimate {
  std::int64_t n = 0;
  double delta = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double distance = 0.0;  // |estimate - target|
};

struct LimitClaim {
  std::string name;
  double target = 0.0;
  std::vector<LimitEstimate> rows;
  bool trend_ok = false;  // distance shrinks along n_list within 2 standard errors
};

struct LimitCheckReport {
  LanConfig config;
  std::array<LimitClaim, 7> claims;

  bool all_trends_ok() const;
};

/// Targets of the seven claims at the configuration's (params, z).
std::array<double, 7> limit_targets(const ModelParams& params, const Perturbation& z);

/// Claim 1 is estimated as the replicate mean of |sum_k (H + M - R)| over
/// simulated paths. Claims 2-7 need the conditional law of one increment
/// given the past, which by independent stationary increments is the
/// unconditional law of (dB, dN). With InnerMethod::quadrature the
/// expectations are integrals over dB (composite Gauss-Legendre, `inner_panels`
/// panels) summed over dN; with InnerMethod::monte_carlo each (replicate, k)
/// draws `inner_draws` pairs from its own substream.
LimitCheckReport limit_checks(const LanConfig& config);

/// Whether |estimate - target| moves toward zero along `rows`,
/// allowing 2 combined standard errors of slack per step.
bool distance_trend_ok(const std::vector<LimitEstimate>& rows);

}  // namespace jumplan
