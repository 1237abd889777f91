#include "jumplan/mle.hpp"

#include "jumplan/parallel.hpp"
#include "jumplan/simulate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace jumplan {

namespace {

struct Evaluation {
  NllValue nll;
  std::vector<double> log_p;
  double abs_sum = 0.0;  // sum |log p|, sets the round-off floor of differences
};

Evaluation evaluate(const ModelParams& params, std::span<const double> increments, double delta,
                    const TruncationPolicy& policy) {
  Evaluation out;
  out.log_p.resize(increments.size());
  double st = 0.0, ss = 0.0, sl = 0.0, value = 0.0;
  for (std::size_t k = 0; k < increments.size(); ++k) {
    const PosteriorMoments pm = posterior_moments(params, delta, increments[k], policy);
    const ScoreVector s = score_from_moments(params, delta, pm);
    out.log_p[k] = pm.log_density;
    value -= pm.log_density;
    out.abs_sum += std::abs(pm.log_density);
    st += s.d_theta;
    ss += s.d_sigma;
    sl += s.d_lambda;
  }
  out.nll.value = value;
  out.nll.natural_grad = Eigen::Vector3d(-st, -ss, -sl);
  out.nll.grad = Eigen::Vector3d(-st, -ss * params.sigma, -sl * params.lambda);
  return out;
}

double normalized_norm(const Eigen::Vector3d& natural_grad, const RateVector& rate) {
  return Eigen::Vector3d(natural_grad(0) / rate.theta, natural_grad(1) / rate.sigma,
                         natural_grad(2) / rate.lambda)
      .norm();
}

ModelParams from_coords(const Eigen::Vector3d& y) {
  return {y(0), std::exp(y(1)), std::exp(y(2))};
}

// Expected information of the whole sample in (theta, log sigma, log lambda).
Eigen::Matrix3d expected_hessian(const ModelParams& p, const RateVector& rate) {
  const Eigen::Vector3d r(rate.theta, rate.sigma, rate.lambda);
  const Eigen::Vector3d jac(1.0, p.sigma, p.lambda);
  const Eigen::Vector3d scale = r.cwiseProduct(jac);
  return scale.asDiagonal() * fisher_matrix(p.sigma, p.lambda) * scale.asDiagonal();
}

}  // namespace

void OptimizerConfig::validate() const {
  if (!(grad_tolerance > 0.0)) throw DomainError("grad_tolerance must be > 0");
  if (max_iterations < 1) throw DomainError("max_iterations must be >= 1");
  truncation.validate();
}

NllValue neg_log_likelihood_and_grad(const ModelParams& params,
                                     std::span<const double> increments, double delta,
                                     const TruncationPolicy& policy) {
  if (!(delta > 0.0)) throw DomainError("delta must be > 0");
  jumplan::validate(params);
  return evaluate(params, increments, delta, policy).nll;
}

ModelParams init_moments(std::span<const double> increments, double delta) {
  if (increments.size() < 10) throw DomainError("init_moments needs at least 10 increments");
  if (!(delta > 0.0)) throw DomainError("delta must be > 0");
  const auto n = static_cast<double>(increments.size());
  const double mean = std::accumulate(increments.begin(), increments.end(), 0.0) / n;
  double ss = 0.0;
  for (double d : increments) ss += (d - mean) * (d - mean);
  const double var = ss / (n - 1.0);

  std::vector<double> sorted(increments.begin(), increments.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  const double median =
      sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  const auto jumps = std::count_if(increments.begin(), increments.end(),
                                   [&](double d) { return std::abs(d - median) > 0.5; });

  ModelParams p;
  p.theta = mean / delta;
  p.lambda = std::max(static_cast<double>(jumps), 0.1) / (n * delta);
  p.sigma = std::sqrt(std::max(var / delta - p.lambda, 1e-6));
  return p;
}

EstimateResult fit_mle(std::span<const double> increments, double delta,
                       const ModelParams& init, const OptimizerConfig& config) {
  config.validate();
  jumplan::validate(init);
  if (increments.empty()) throw DomainError("fit_mle needs at least one increment");
  if (!(delta > 0.0)) throw DomainError("delta must be > 0");
  const auto n = static_cast<std::int64_t>(increments.size());
  const RateVector rate = rate_vector(n, delta);
  const TruncationPolicy& policy = config.truncation;

  Eigen::Vector3d y(init.theta, std::log(init.sigma), std::log(init.lambda));
  Evaluation cur = evaluate(init, increments, delta, policy);
  double gnorm = normalized_norm(cur.nll.natural_grad, rate);
  Eigen::Matrix3d inv_hessian = expected_hessian(init, rate).inverse();

  EstimateResult result;
  int it = 0;
  for (; it < config.max_iterations && gnorm > config.grad_tolerance; ++it) {
    Eigen::Vector3d step = -inv_hessian * cur.nll.grad;
    if (!(cur.nll.grad.dot(step) < 0.0)) {
      inv_hessian = expected_hessian(from_coords(y), rate).inverse();
      step = -inv_hessian * cur.nll.grad;
    }
    const double slope = cur.nll.grad.dot(step);
    const double floor = 8.0 * std::numeric_limits<double>::epsilon() * (cur.abs_sum + 1.0);

    bool accepted = false;
    Evaluation next;
    double next_norm = 0.0;
    Eigen::Vector3d y_next;
    double t = 1.0;
    for (int halving = 0; halving < 60 && !accepted; ++halving, t *= 0.5) {
      y_next = y + t * step;
      const ModelParams trial = from_coords(y_next);
      if (!(trial.sigma > 0.0 && trial.lambda > 0.0 && std::isfinite(trial.sigma) &&
            std::isfinite(trial.lambda))) {
        continue;
      }
      try {
        next = evaluate(trial, increments, delta, policy);
      } catch (const DomainError&) {
        continue;
      }
      double diff = 0.0;  // f(next) - f(cur), summed increment by increment
      for (std::size_t k = 0; k < next.log_p.size(); ++k) diff += cur.log_p[k] - next.log_p[k];
      if (!std::isfinite(diff)) continue;
      next_norm = normalized_norm(next.nll.natural_grad, rate);
      // At the round-off floor the value cannot tell steps apart; the gradient can.
      accepted = diff <= 1e-4 * t * slope || (std::abs(diff) <= floor && next_norm < gnorm);
    }
    if (!accepted) break;

    const Eigen::Vector3d s = y_next - y;
    const Eigen::Vector3d q = next.nll.grad - cur.nll.grad;
    const double sq = s.dot(q);
    if (sq > 0.0) {
      const double rho = 1.0 / sq;
      const Eigen::Matrix3d left = Eigen::Matrix3d::Identity() - rho * s * q.transpose();
      inv_hessian = left * inv_hessian * left.transpose() + rho * s * s.transpose();
    }
    y = y_next;
    cur = std::move(next);
    gnorm = next_norm;
  }

  result.params_hat = from_coords(y);
  result.iterations = it;
  result.grad_norm_at_opt = gnorm;
  result.converged = gnorm <= config.grad_tolerance;
  result.log_likelihood = -cur.nll.value;
  const Eigen::Matrix3d cov =
      fisher_matrix(result.params_hat.sigma, result.params_hat.lambda).inverse();
  result.std_errors = Eigen::Vector3d(std::sqrt(cov(0, 0)) / rate.theta,
                                      std::sqrt(cov(1, 1)) / rate.sigma,
                                      std::sqrt(cov(2, 2)) / rate.lambda);
  return result;
}

RateStudy rate_study(const ModelParams& params, const GridScheme& scheme,
                     std::span<const std::int64_t> n_list, int replicates,
                     std::uint64_t root_seed, int jobs, const OptimizerConfig& config) {
  jumplan::validate(params);
  jumplan::validate(scheme);
  config.validate();
  if (n_list.size() < 3) throw std::invalid_argument("rate_study needs at least 3 sample sizes");
  if (replicates < 2) throw std::invalid_argument("rate_study needs at least 2 replicates");
  const std::vector<SamplingGrid> grids = grid_sequence(scheme, n_list);

  RateStudy study;
  study.params = params;
  study.scheme = scheme;
  const Eigen::Vector3d truth(params.theta, params.sigma, params.lambda);
  for (const SamplingGrid& grid : grids) {
    std::vector<EstimateResult> fits(static_cast<std::size_t>(replicates));
    std::vector<char> ok(fits.size(), 0);
    parallel_for(fits.size(), jobs, [&](std::size_t r) {
      const PathRecord path = simulate_path(params, grid, {root_seed, r});
      const std::vector<double> inc = path.increments();
      try {
        fits[r] = fit_mle(inc, grid.delta, init_moments(inc, grid.delta), config);
        ok[r] = fits[r].converged ? 1 : 0;
      } catch (const DomainError&) {
        ok[r] = 0;
      }
    });

    RateStudyRow row;
    row.n = grid.n;
    row.delta = grid.delta;
    row.rates = rate_vector(grid.n, grid.delta);
    const Eigen::Vector3d r(row.rates.theta, row.rates.sigma, row.rates.lambda);
    Eigen::Vector3d sq = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < fits.size(); ++i) {
      if (!ok[i]) {
        ++row.nonconverged;
        continue;
      }
      const ModelParams& h = fits[i].params_hat;
      const Eigen::Vector3d err = Eigen::Vector3d(h.theta, h.sigma, h.lambda) - truth;
      sq += err.cwiseProduct(err);
      row.scaled_errors.push_back(err.cwiseProduct(r));
    }
    row.replicates_used = static_cast<int>(row.scaled_errors.size());
    if (row.replicates_used == 0) {
      throw std::runtime_error("no converged fits at n = " + std::to_string(grid.n));
    }
    row.rmse = (sq / row.replicates_used).cwiseSqrt();
    row.scaled_rmse = row.rmse.cwiseProduct(r);
    study.rows.push_back(std::move(row));
  }
  for (int c = 0; c < 3; ++c) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& row : study.rows) {
      lo = std::min(lo, row.scaled_rmse(c));
      hi = std::max(hi, row.scaled_rmse(c));
    }
    study.stability_ratio(c) = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    study.stable[c] = study.stability_ratio(c) <= 1.5;
  }
  return study;
}

}  // namespace jumplan
