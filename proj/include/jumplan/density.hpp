#pragma once

// Transition density of the linear jump model as a Poisson mixture of
// Gaussians, and the jump-count posterior that every conditional expectation
// given an observed increment reduces to.
//
// For an increment d over a step of length delta, with m jumps the Brownian
// part must account for the residual
//
//     a_m = d - m - (theta - lambda) * delta,
//
// and the unnormalized posterior log-weight of m is
//
//     -a_m^2 / (2 sigma^2 delta) + m log(lambda delta) - log m!.

#include "jumplan/model.hpp"

#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace jumplan {

struct TruncationPolicy {
  double log_tol = 46.0;  // keep terms within log_tol of the largest log-weight
  int m_cap = 512;        // hard upper bound on the jump count

  void validate() const;
};

struct TruncationWindow {
  int m_lo = 0;
  int m_hi = 0;
  int m_star = 0;
  bool capped = false;  // the window ran into m_cap while still above tolerance

  int size() const { return m_hi - m_lo + 1; }
};

/// Contiguous set of jump counts whose log-weight is within policy.log_tol of
/// the maximum. The log-weight is concave in m, so the set is an interval.
TruncationWindow truncation_window(const ModelParams& params, double delta,
                                   double obs_increment,
                                   const TruncationPolicy& policy = {});

/// log p(delta, x, y); the sum over the window is taken by log-sum-exp.
double log_transition_density(const ModelParams& params, double delta, double x,
                              double y, const TruncationPolicy& policy = {});

struct JumpPosterior {
  int m_lo = 0;
  int m_hi = 0;
  bool capped = false;
  std::vector<double> log_weights;  // unnormalized log w_m, m = m_lo..m_hi
  std::vector<double> probs;        // normalized pi_m

  /// pi_m, zero outside the window.
  double prob(int m) const {
    return (m < m_lo || m > m_hi) ? 0.0 : probs[static_cast<std::size_t>(m - m_lo)];
  }
};

JumpPosterior jump_posterior(const ModelParams& params, double delta,
                             double obs_increment,
                             const TruncationPolicy& policy = {});

/// Posterior moments of the jump count m and the Brownian residual a_m,
/// accumulated in a single pass over the window.
struct PosteriorMoments {
  double log_density = 0.0;
  double mean_m = 0.0;
  double mean_m2 = 0.0;
  double mean_a = 0.0;
  double mean_a2 = 0.0;
  double mean_ma = 0.0;
  TruncationWindow window;
};

PosteriorMoments posterior_moments(const ModelParams& params, double delta,
                                   double obs_increment,
                                   const TruncationPolicy& policy = {});

/// sum_m pi_m g(m) over the window. Throws DomainError naming m when g is
/// not finite at a window point.
template <class G>
double conditional_moment(const ModelParams& params, double delta,
                          double obs_increment, G&& g,
                          const TruncationPolicy& policy = {}) {
  const JumpPosterior post = jump_posterior(params, delta, obs_increment, policy);
  double acc = 0.0;
  for (int m = post.m_lo; m <= post.m_hi; ++m) {
    const double value = static_cast<double>(g(m));
    if (!std::isfinite(value)) {
      std::ostringstream os;
      os << "conditional_moment: g(" << m << ") is not finite";
      throw DomainError(os.str());
    }
    acc += post.prob(m) * value;
  }
  return acc;
}

/// Partial derivatives of log p(delta, x, x + obs_increment) in
/// (theta, sigma, lambda).
struct ScoreVector {
  double d_theta = 0.0;
  double d_sigma = 0.0;
  double d_lambda = 0.0;
};

ScoreVector score_vector(const ModelParams& params, double delta,
                         double obs_increment,
                         const TruncationPolicy& policy = {});

/// Score from posterior moments: d_theta = A1/s^2, d_sigma = -1/s + A2/(s^3 delta),
/// d_lambda = E[m]/lambda - delta - A1/s^2.
ScoreVector score_from_moments(const ModelParams& params, double delta,
                               const PosteriorMoments& moments);

/// log sum exp(v_i). Throws DomainError on an empty span.
double log_sum_exp(std::span<const double> values);

/// log(m!) from a table built once; std::lgamma beyond the table.
double log_factorial(int m);

}  // namespace jumplan
