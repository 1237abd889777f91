#pragma once

// Jump-mismatch probabilities between the true and a nearby parameter.
//
// For an increment generated under `params` with exactly j jumps and Brownian
// increment b, S_j^p is the posterior expectation, under `bar_params`, of
// m^p restricted to m != j. It splits by |b| <= delta^alpha (index 1) versus
// |b| > delta^alpha (index 2), and by m < j (second index 1) versus m > j
// (second index 2).

#include "jumplan/model.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace jumplan {

struct BoundsConfig {
  ModelParams params{1.0, 1.0, 1.0};
  ModelParams bar_params{1.0, 1.0, 1.0};
  double alpha = 0.25;
  int p = 1;
  int j_max = 8;
  std::int64_t n = 10000;
  double delta = 0.01;
  std::int64_t replicates = 100000;  // Monte Carlo draws per estimate
  std::uint64_t root_seed = 1;
  double C = 1.0;
  double large_n_delta = 0.01;  // inequalities are enforced for delta <= this
  int jobs = 1;                 // results do not depend on it
  int m_cap = 512;

  /// Throws DomainError unless |theta - bar_theta| and |lambda - bar_lambda|
  /// are within C / sqrt(n delta) and alpha is in (0, 1/2).
  void validate() const;

  /// Bar parameters at distance exactly C / sqrt(n delta) from `params`,
  /// theta shifted up and lambda shifted down, sigma unchanged. n defaults to
  /// round(delta^-2) so that n delta = 1 / delta.
  static BoundsConfig at_boundary(const ModelParams& params, double delta, double alpha,
                                  int p, double C = 1.0, std::int64_t n = 0);
};

struct STable {
  double s = 0.0;
  double s1 = 0.0, s2 = 0.0;
  double s11 = 0.0, s12 = 0.0, s21 = 0.0, s22 = 0.0;
  double rhs11 = 0.0, rhs12 = 0.0, rhs21 = 0.0, rhs22 = 0.0;
  // Natural logs (-inf for zero), used for comparisons far below DBL_MIN.
  double log_s = 0.0;
  double log_s11 = 0.0, log_s12 = 0.0, log_s21 = 0.0, log_s22 = 0.0;
  double log_rhs11 = 0.0, log_rhs12 = 0.0, log_rhs21 = 0.0, log_rhs22 = 0.0;
  bool capped = false;
};

/// `sampled_jumps` is the jump count drawn together with b_inc; the outer
/// indicator of S_j^p is sampled_jumps == j.
STable s_jp(const BoundsConfig& config, int j, double b_inc, int sampled_jumps);

/// Same, for an explicit exponent p (config.p ignored).
STable s_jp(const BoundsConfig& config, int j, int p, double b_inc, int sampled_jumps);

struct BoundsWitness {
  int which = 0;  // 11, 12, 21 or 22
  int j = 0;
  int p = 0;
  double b_inc = 0.0;
  double log_lhs = 0.0;
  double log_rhs = 0.0;
};

struct BoundsCheckReport {
  double delta = 0.0;
  double alpha = 0.0;
  int p = 0;
  std::int64_t draws = 0;
  std::int64_t evaluations = 0;
  std::int64_t nontrivial = 0;  // evaluations with the outer indicator equal to 1
  std::array<std::int64_t, 4> violations{};  // 11, 12, 21, 22
  std::vector<BoundsWitness> witnesses;      // first few violations
  bool enforced = false;  // delta <= large_n_delta
  bool capped = false;

  std::int64_t total_violations() const {
    return violations[0] + violations[1] + violations[2] + violations[3];
  }
  bool pass() const { return total_violations() == 0; }
};

/// Draws (b_inc, jumps) under config.params and checks the four split
/// inequalities for every j in [0, j_max] at exponent config.p.
BoundsCheckReport lemma_bounds_check(const BoundsConfig& config, std::int64_t sample_size);

struct MEstimate {
  double delta = 0.0;
  double m1_hat = 0.0, m1_se = 0.0;
  double m2_hat = 0.0, m2_se = 0.0;
  double log_m1 = 0.0, log_m2 = 0.0;  // logs of the estimates, finite below DBL_MIN
  double tail_mass = 0.0;             // P(jumps > j_max), excluded from the sums
  bool tail_flag = false;             // tail_mass above 1e-12
  bool capped = false;
};

/// Outer expectation over draws under `params`, inner posterior sums under
/// `bar_params`.
MEstimate estimate_M(const BoundsConfig& config);

struct DecayFit {
  double slope = 0.0;      // -1/C2 when the bound is tight
  double intercept = 0.0;  // log C1
  double r_squared = 0.0;
  int used = 0;
  int excluded = 0;
  bool decays = false;  // slope < 0
};

/// Fits log(m1 + m2) = intercept + slope * delta^-(1 - 2 alpha). Points with a
/// non-positive sum are excluded; fewer than 4 usable points throws DomainError.
DecayFit decay_fit(std::span<const MEstimate> estimates, double alpha);

}  // namespace jumplan
