#include "jumplan/density.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace jumplan {

namespace {

constexpr int kLogFactorialTableSize = 4096;

const std::array<double, kLogFactorialTableSize>& log_factorial_table() {
  static const auto table = [] {
    std::array<double, kLogFactorialTableSize> t{};
    t[0] = 0.0;
    for (int m = 1; m < kLogFactorialTableSize; ++m) {
      t[m] = std::lgamma(static_cast<double>(m) + 1.0);
    }
    return t;
  }();
  return table;
}

// Log-weight evaluator for one (params, delta, increment) triple.
class MixtureKernel {
 public:
  MixtureKernel(const ModelParams& params, double delta, double obs_increment)
      : shift_(obs_increment - (params.theta - params.lambda) * delta),
        inv_two_var_(1.0 / (2.0 * params.sigma * params.sigma * delta)),
        log_rate_(std::log(params.lambda * delta)),
        table_(log_factorial_table()) {}

  double residual(int m) const { return shift_ - static_cast<double>(m); }

  double log_weight(int m) const {
    const double a = residual(m);
    const double lf = m < kLogFactorialTableSize ? table_[m] : log_factorial(m);
    return -a * a * inv_two_var_ + static_cast<double>(m) * log_rate_ - lf;
  }

  double shift() const { return shift_; }

 private:
  double shift_;
  double inv_two_var_;
  double log_rate_;
  const std::array<double, kLogFactorialTableSize>& table_;
};

struct WindowScan {
  TruncationWindow window;
  double max_log_weight = 0.0;
};

WindowScan scan_window(const MixtureKernel& kernel, const TruncationPolicy& policy) {
  const double nearest = std::round(kernel.shift());
  int m_star = 0;
  if (nearest > 0.0) {
    m_star = nearest >= static_cast<double>(policy.m_cap) ? policy.m_cap
                                                          : static_cast<int>(nearest);
  }

  WindowScan scan;
  scan.window.m_star = m_star;
  double max_lw = kernel.log_weight(m_star);
  int hi = m_star;
  while (true) {
    if (hi >= policy.m_cap) {
      scan.window.capped = kernel.log_weight(hi + 1) >= max_lw - policy.log_tol;
      break;
    }
    const double v = kernel.log_weight(hi + 1);
    if (v < max_lw - policy.log_tol) break;
    ++hi;
    max_lw = std::max(max_lw, v);
  }
  int lo = m_star;
  while (lo > 0) {
    const double v = kernel.log_weight(lo - 1);
    if (v < max_lw - policy.log_tol) break;
    --lo;
    max_lw = std::max(max_lw, v);
  }
  // A larger maximum found below m_star can push the upper end out of tolerance.
  while (hi > m_star && kernel.log_weight(hi) < max_lw - policy.log_tol) --hi;
  while (lo < m_star && kernel.log_weight(lo) < max_lw - policy.log_tol) ++lo;

  scan.window.m_lo = lo;
  scan.window.m_hi = hi;
  scan.max_log_weight = max_lw;
  return scan;
}

void check_inputs(const ModelParams& params, double delta, double obs_increment,
                  const TruncationPolicy& policy) {
  validate(params);
  policy.validate();
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("delta must be > 0");
  if (!std::isfinite(obs_increment)) throw DomainError("observed increment must be finite");
}

double log_gaussian_normalizer(const ModelParams& params, double delta) {
  return -0.5 * std::log(2.0 * std::numbers::pi * params.sigma * params.sigma * delta) -
         params.lambda * delta;
}

}  // namespace

void TruncationPolicy::validate() const {
  if (!(log_tol > 0.0)) throw DomainError("truncation log_tol must be > 0");
  if (m_cap < 1) throw DomainError("truncation m_cap must be >= 1");
}

double log_factorial(int m) {
  if (m < 0) throw DomainError("log_factorial of a negative integer");
  if (m < kLogFactorialTableSize) return log_factorial_table()[m];
  return std::lgamma(static_cast<double>(m) + 1.0);
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw DomainError("log_sum_exp of an empty array");
  if (values.size() == 1) return values[0];
  const double mx = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

TruncationWindow truncation_window(const ModelParams& params, double delta,
                                   double obs_increment,
                                   const TruncationPolicy& policy) {
  check_inputs(params, delta, obs_increment, policy);
  return scan_window(MixtureKernel(params, delta, obs_increment), policy).window;
}

PosteriorMoments posterior_moments(const ModelParams& params, double delta,
                                   double obs_increment,
                                   const TruncationPolicy& policy) {
  check_inputs(params, delta, obs_increment, policy);
  const MixtureKernel kernel(params, delta, obs_increment);
  const WindowScan scan = scan_window(kernel, policy);

  double s0 = 0.0, sm = 0.0, sm2 = 0.0, sa = 0.0, sa2 = 0.0, sma = 0.0;
  for (int m = scan.window.m_lo; m <= scan.window.m_hi; ++m) {
    const double e = std::exp(kernel.log_weight(m) - scan.max_log_weight);
    const double a = kernel.residual(m);
    const double md = static_cast<double>(m);
    s0 += e;
    sm += e * md;
    sm2 += e * md * md;
    sa += e * a;
    sa2 += e * a * a;
    sma += e * md * a;
  }
  PosteriorMoments out;
  out.window = scan.window;
  out.log_density = scan.max_log_weight + std::log(s0) + log_gaussian_normalizer(params, delta);
  out.mean_m = sm / s0;
  out.mean_m2 = sm2 / s0;
  out.mean_a = sa / s0;
  out.mean_a2 = sa2 / s0;
  out.mean_ma = sma / s0;
  return out;
}

double log_transition_density(const ModelParams& params, double delta, double x,
                              double y, const TruncationPolicy& policy) {
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw DomainError("log_transition_density: x and y must be finite");
  }
  check_inputs(params, delta, y - x, policy);
  const MixtureKernel kernel(params, delta, y - x);
  const WindowScan scan = scan_window(kernel, policy);
  double s0 = 0.0;
  for (int m = scan.window.m_lo; m <= scan.window.m_hi; ++m) {
    s0 += std::exp(kernel.log_weight(m) - scan.max_log_weight);
  }
  return scan.max_log_weight + std::log(s0) + log_gaussian_normalizer(params, delta);
}

JumpPosterior jump_posterior(const ModelParams& params, double delta,
                             double obs_increment, const TruncationPolicy& policy) {
  check_inputs(params, delta, obs_increment, policy);
  const MixtureKernel kernel(params, delta, obs_increment);
  const WindowScan scan = scan_window(kernel, policy);

  JumpPosterior post;
  post.m_lo = scan.window.m_lo;
  post.m_hi = scan.window.m_hi;
  post.capped = scan.window.capped;
  const auto count = static_cast<std::size_t>(scan.window.size());
  post.log_weights.resize(count);
  post.probs.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    post.log_weights[i] = kernel.log_weight(post.m_lo + static_cast<int>(i));
  }
  const double log_norm = log_sum_exp(post.log_weights);
  for (std::size_t i = 0; i < count; ++i) {
    post.probs[i] = std::exp(post.log_weights[i] - log_norm);
  }
  return post;
}

ScoreVector score_from_moments(const ModelParams& params, double delta,
                               const PosteriorMoments& moments) {
  const double s2 = params.sigma * params.sigma;
  ScoreVector score;
  score.d_theta = moments.mean_a / s2;
  score.d_sigma = -1.0 / params.sigma + moments.mean_a2 / (s2 * params.sigma * delta);
  score.d_lambda = moments.mean_m / params.lambda - delta - moments.mean_a / s2;
  return score;
}

ScoreVector score_vector(const ModelParams& params, double delta,
                         double obs_increment, const TruncationPolicy& policy) {
  return score_from_moments(params, delta,
                            posterior_moments(params, delta, obs_increment, policy));
}

}  // namespace jumplan
