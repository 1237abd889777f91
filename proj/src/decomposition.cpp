#include "jumplan/decomposition.hpp"

#include <stdexcept>

namespace jumplan {

TermEvaluator::TermEvaluator(const ModelParams& params, const Perturbation& z,
                             std::int64_t n, double delta, int quadrature_order,
                             const TruncationPolicy& policy)
    : params_(params),
      z_(z),
      delta_(delta),
      rule_(GaussLegendre::unit_interval(quadrature_order)),
      policy_(policy) {
  validate(params);
  validate(z);
  policy.validate();
  const RateVector rate = rate_vector(n, delta);
  rate_horizon_ = rate.theta;
  rate_count_ = rate.sigma;
  endpoint_ = localize(params, z, n, delta, 1.0);

  const std::size_t nodes = rule_.nodes.size();
  theta_path_.reserve(nodes);
  sigma_path_.reserve(nodes);
  lambda_path_.reserve(nodes);
  for (double ell : rule_.nodes) {
    const ModelParams at = localize(params, z, n, delta, ell);
    theta_path_.push_back({at.theta, params.sigma, params.lambda});
    sigma_path_.push_back({endpoint_.theta, at.sigma, endpoint_.lambda});
    lambda_path_.push_back({endpoint_.theta, params.sigma, at.lambda});
  }
}

double TermEvaluator::beta_integral(double obs_increment) const {
  // int_0^1 E^{theta_n, sigma, lambda(ell)}[compensated jumps / lambda(ell) | X] dell
  double acc = 0.0;
  for (std::size_t i = 0; i < lambda_path_.size(); ++i) {
    const ModelParams& p = lambda_path_[i];
    const PosteriorMoments pm = posterior_moments(p, delta_, obs_increment, policy_);
    acc += rule_.weights[i] * (pm.mean_m - p.lambda * delta_) / p.lambda;
  }
  return acc;
}

IncrementTerms TermEvaluator::evaluate_leading(double obs_increment, double b_inc,
                                               std::int32_t n_inc) const {
  (void)n_inc;
  const double s = rate_horizon_;
  const double r = rate_count_;
  const double sig = params_.sigma;
  const double s2 = sig * sig;
  const double u = z_.u, v = z_.v, w = z_.w;

  IncrementTerms t;
  if (u != 0.0) {
    t.xi = (u / s) / s2 * (sig * b_inc - u * delta_ / (2.0 * s));
  }
  if (v != 0.0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < sigma_path_.size(); ++i) {
      const double sl = sigma_path_[i].sigma;
      acc += rule_.weights[i] * (s2 / (sl * sl * sl) * b_inc * b_inc - delta_ / sl) / delta_;
    }
    t.eta = (v / r) * acc;
  }
  if (w != 0.0) {
    t.beta = -(w / s) / s2 * (sig * b_inc + w * delta_ / (2.0 * s) - u * delta_ / s) +
             (w / s) * beta_integral(obs_increment);
  }
  return t;
}

IncrementTerms TermEvaluator::evaluate(double obs_increment, double b_inc,
                                       std::int32_t n_inc) const {
  const double s = rate_horizon_;
  const double r = rate_count_;
  const double sig = params_.sigma;
  const double s2 = sig * sig;
  const double u = z_.u, v = z_.v, w = z_.w;
  const double jumps = static_cast<double>(n_inc);

  IncrementTerms t;
  if (u != 0.0) {
    t.xi = (u / s) / s2 * (sig * b_inc - u * delta_ / (2.0 * s));
    const double compensated = jumps - params_.lambda * delta_;
    double expected = 0.0;
    for (std::size_t i = 0; i < theta_path_.size(); ++i) {
      const ModelParams& p = theta_path_[i];
      const PosteriorMoments pm = posterior_moments(p, delta_, obs_increment, policy_);
      expected += rule_.weights[i] * (pm.mean_m - p.lambda * delta_);
    }
    t.h = (u / s) / s2 * (compensated - expected);
  }

  if (v != 0.0) {
    const double drift_jump = params_.theta * delta_ + (jumps - params_.lambda * delta_);
    const double realized = drift_jump * drift_jump + 2.0 * sig * b_inc * drift_jump;
    const double kappa = endpoint_.theta * delta_ - endpoint_.lambda * delta_;
    double eta_acc = 0.0;
    double m_acc = 0.0;
    for (std::size_t i = 0; i < sigma_path_.size(); ++i) {
      const ModelParams& p = sigma_path_[i];
      const double sl = p.sigma;
      const double sl3 = sl * sl * sl;
      eta_acc += rule_.weights[i] * (s2 / sl3 * b_inc * b_inc - delta_ / sl) / delta_;
      // Under (theta_n, sigma(ell), lambda_n) with m jumps the compensated jump
      // part is kappa + m and sigma(ell) dB equals the residual a_m.
      const PosteriorMoments pm = posterior_moments(p, delta_, obs_increment, policy_);
      const double conditional = kappa * kappa + 2.0 * kappa * pm.mean_m + pm.mean_m2 +
                                 2.0 * kappa * pm.mean_a + 2.0 * pm.mean_ma;
      m_acc += rule_.weights[i] * (realized - conditional) / (delta_ * sl3);
    }
    t.eta = (v / r) * eta_acc;
    t.m_term = (v / r) * m_acc;
  }

  if (w != 0.0) {
    double beta_acc = 0.0;
    double r_acc = 0.0;
    for (std::size_t i = 0; i < lambda_path_.size(); ++i) {
      const ModelParams& p = lambda_path_[i];
      const PosteriorMoments pm = posterior_moments(p, delta_, obs_increment, policy_);
      const double conditional = pm.mean_m - p.lambda * delta_;
      beta_acc += rule_.weights[i] * conditional / p.lambda;
      r_acc += rule_.weights[i] * ((jumps - p.lambda * delta_) - conditional);
    }
    t.beta = -(w / s) / s2 * (sig * b_inc + w * delta_ / (2.0 * s) - u * delta_ / s) +
             (w / s) * beta_acc;
    t.r = (w / s) / s2 * r_acc;
  }
  return t;
}

TermDecomposition decompose_terms(const ModelParams& params, const Perturbation& z,
                                  const PathRecord& path, int quadrature_order,
                                  const TruncationPolicy& policy) {
  const auto n = path.b_inc.size();
  if (path.n_inc.size() != n || path.x_obs.size() != n + 1) {
    throw std::invalid_argument("decompose_terms needs a path with latent increments");
  }
  if (quadrature_order < 4) throw std::invalid_argument("quadrature_order must be >= 4");
  const TermEvaluator evaluator(params, z, path.grid.n, path.grid.delta, quadrature_order,
                                policy);
  TermDecomposition out;
  out.xi.resize(n);
  out.h.resize(n);
  out.eta.resize(n);
  out.m_term.resize(n);
  out.beta.resize(n);
  out.r.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double d = path.x_obs[k + 1] - path.x_obs[k];
    const IncrementTerms t = evaluator.evaluate(d, path.b_inc[k], path.n_inc[k]);
    out.xi[k] = t.xi;
    out.h[k] = t.h;
    out.eta[k] = t.eta;
    out.m_term[k] = t.m_term;
    out.beta[k] = t.beta;
    out.r[k] = t.r;
    out.totals.xi += t.xi;
    out.totals.h += t.h;
    out.totals.eta += t.eta;
    out.totals.m_term += t.m_term;
    out.totals.beta += t.beta;
    out.totals.r += t.r;
    out.lr_from_terms += t.total();
  }
  return out;
}

}  // namespace jumplan
