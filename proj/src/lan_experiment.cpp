#include "jumplan/lan_experiment.hpp"

#include "jumplan/decomposition.hpp"
#include "jumplan/parallel.hpp"
#include "jumplan/simulate.hpp"
#include "jumplan/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace jumplan {

void LanConfig::validate(bool for_report) const {
  jumplan::validate(params);
  jumplan::validate(z);
  jumplan::validate(scheme);
  truncation.validate();
  if (n_list.empty()) throw std::invalid_argument("n_list must not be empty");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) throw std::invalid_argument("n_list must be strictly increasing");
  }
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (for_report && replicates < 100) {
    throw std::invalid_argument("reports need replicates >= 100");
  }
  if (quadrature_order < 4) throw std::invalid_argument("quadrature_order must be >= 4");
  if (decomposition_subsample < 0) throw std::invalid_argument("decomposition_subsample must be >= 0");
  if (inner_draws < 2) throw std::invalid_argument("inner_draws must be >= 2");
  if (inner_panels < 8) throw std::invalid_argument("inner_panels must be >= 8");
  for (std::int64_t n : n_list) {
    if (n < 1) throw DomainError("every n must be >= 1");
    const double delta = scheme.delta_for(n);
    if (delta > 1.0) throw DomainError("scheme gives delta > 1 at n = " + std::to_string(n));
    localize(params, z, n, delta, 1.0);
  }
}

namespace {

struct ReplicateResult {
  bool ok = false;
  double lr = 0.0;
  Eigen::Vector3d score = Eigen::Vector3d::Zero();
  bool decomposed = false;
  double residual = 0.0;
};

ReplicateResult run_replicate(const LanConfig& config, const SamplingGrid& grid,
                              const ModelParams& target, std::uint64_t replicate) {
  ReplicateResult out;
  const PathRecord path = simulate_path(config.params, grid, {config.root_seed, replicate});
  const RateVector rate = rate_vector(grid.n, grid.delta);
  double lr = 0.0;
  Eigen::Vector3d score = Eigen::Vector3d::Zero();
  for (std::int64_t k = 0; k < grid.n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double d = path.x_obs[i + 1] - path.x_obs[i];
    const PosteriorMoments base = posterior_moments(config.params, grid.delta, d, config.truncation);
    const ScoreVector s = score_from_moments(config.params, grid.delta, base);
    score += Eigen::Vector3d(s.d_theta, s.d_sigma, s.d_lambda);
    lr += log_transition_density(target, grid.delta, 0.0, d, config.truncation) - base.log_density;
  }
  out.lr = lr;
  out.score = Eigen::Vector3d(score(0) / rate.theta, score(1) / rate.sigma, score(2) / rate.lambda);
  if (replicate < static_cast<std::uint64_t>(config.decomposition_subsample)) {
    const TermDecomposition dec = decompose_terms(config.params, config.z, path,
                                                  config.quadrature_order, config.truncation);
    out.decomposed = true;
    out.residual = std::abs(lr - dec.lr_from_terms);
  }
  out.ok = std::isfinite(lr) && out.score.allFinite();
  return out;
}

}  // namespace

LanReport run_lan_experiment(const LanConfig& config) {
  config.validate(false);
  LanReport report;
  report.config = config;
  report.gamma = fisher_matrix(config.params.sigma, config.params.lambda);
  const double theory_var = quadratic_form(report.gamma, config.z);

  for (std::int64_t n : config.n_list) {
    const double delta = config.scheme.delta_for(n);
    const SamplingGrid grid{n, delta, 0.0};
    const ModelParams target = localize(config.params, config.z, n, delta, 1.0);

    std::vector<ReplicateResult> results(static_cast<std::size_t>(config.replicates));
    parallel_for(results.size(), config.jobs, [&](std::size_t r) {
      try {
        results[r] = run_replicate(config, grid, target, r);
      } catch (const std::exception&) {
        results[r] = ReplicateResult{};
      }
    });

    LanRow row;
    row.n = n;
    row.delta = delta;
    row.theory_var = theory_var;
    row.theory_mean = theory_var > 0.0 ? -0.5 * theory_var : 0.0;
    row.degenerate = config.z.is_zero();
    row.lr.resize(results.size(), std::numeric_limits<double>::quiet_NaN());

    std::vector<double> lr_ok;
    std::vector<double> exp_lr;
    std::vector<Eigen::Vector3d> scores;
    for (std::size_t r = 0; r < results.size(); ++r) {
      const ReplicateResult& res = results[r];
      if (!res.ok) {
        ++row.failures;
        continue;
      }
      row.lr[r] = res.lr;
      lr_ok.push_back(res.lr);
      exp_lr.push_back(std::exp(res.lr));
      scores.push_back(res.score);
      if (res.decomposed) {
        ++row.decomposition_paths;
        row.decomposition_residual = std::max(row.decomposition_residual, res.residual);
      }
    }
    if (static_cast<double>(row.failures) > 0.01 * static_cast<double>(results.size())) {
      throw std::runtime_error("more than 1% of replicates failed at n = " + std::to_string(n));
    }
    if (lr_ok.empty()) throw std::runtime_error("no successful replicates at n = " + std::to_string(n));
    row.replicates_used = static_cast<int>(lr_ok.size());

    const SampleSummary lr_stats = summarize(lr_ok);
    row.empirical_mean_lr = lr_stats.mean;
    row.empirical_var_lr = lr_stats.variance;
    const SampleSummary contiguity = summarize(exp_lr);
    row.contiguity_mean = contiguity.mean;
    row.contiguity_stderr = contiguity.stderr_mean;

    const auto count = static_cast<double>(scores.size());
    for (const auto& s : scores) row.score_mean += s;
    row.score_mean /= count;
    for (const auto& s : scores) {
      const Eigen::Vector3d c = s - row.score_mean;
      row.score_covariance += c * c.transpose();
    }
    if (scores.size() > 1) row.score_covariance /= (count - 1.0);

    if (row.degenerate) {
      row.ks_statistic = 0.0;
      row.ks_critical_1pct = 0.0;
    } else {
      std::vector<double> standardized(lr_ok.size());
      const double scale = std::sqrt(theory_var);
      for (std::size_t i = 0; i < lr_ok.size(); ++i) {
        standardized[i] = (lr_ok[i] - row.theory_mean) / scale;
      }
      row.ks_statistic = ks_statistic(standardized, normal_cdf);
      row.ks_critical_1pct = ks_critical_value(0.01, standardized.size());

      const Eigen::Vector3d zv(config.z.u, config.z.v, config.z.w);
      std::vector<double> projected(scores.size());
      for (std::size_t i = 0; i < scores.size(); ++i) projected[i] = zv.dot(scores[i]);
      if (lr_ok.size() >= 2) {
        const LinearFit fit = least_squares(projected, lr_ok);
        row.regression_slope = fit.slope;
        row.regression_intercept = fit.intercept;
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace jumplan
