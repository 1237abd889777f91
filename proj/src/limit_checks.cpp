#include "jumplan/limit_checks.hpp"

#include "jumplan/decomposition.hpp"
#include "jumplan/parallel.hpp"
#include "jumplan/quadrature.hpp"
#include "jumplan/rng.hpp"
#include "jumplan/simulate.hpp"
#include "jumplan/stats.hpp"

#include <cmath>
#include <numbers>

namespace jumplan {

namespace {

constexpr std::uint64_t kInnerSubstreamTag = 0x8000000000000000ULL;
constexpr double kGaussianSpan = 12.0;  // integrate dB/sqrt(delta) over [-12, 12]

const std::array<const char*, 7> kClaimNames = {
    "sum(H + M - R)",
    "sum E[xi + eta + beta | F]",
    "sum conditional variances",
    "sum E[xi^4 + eta^4 + beta^4 | F]",
    "sum Cov(xi, eta | F)",
    "sum Cov(xi, beta | F)",
    "sum Cov(eta, beta | F)",
};

// Moments of (xi, eta, beta) for one increment.
struct LeadingMoments {
  double w = 0.0;
  double xi = 0.0, eta = 0.0, beta = 0.0;
  double xi2 = 0.0, eta2 = 0.0, beta2 = 0.0;
  double xi4 = 0.0, eta4 = 0.0, beta4 = 0.0;
  double xi_eta = 0.0, xi_beta = 0.0, eta_beta = 0.0;

  void add(double weight, const IncrementTerms& t) {
    w += weight;
    xi += weight * t.xi;
    eta += weight * t.eta;
    beta += weight * t.beta;
    xi2 += weight * t.xi * t.xi;
    eta2 += weight * t.eta * t.eta;
    beta2 += weight * t.beta * t.beta;
    xi4 += weight * t.xi * t.xi * t.xi * t.xi;
    eta4 += weight * t.eta * t.eta * t.eta * t.eta;
    beta4 += weight * t.beta * t.beta * t.beta * t.beta;
    xi_eta += weight * t.xi * t.eta;
    xi_beta += weight * t.xi * t.beta;
    eta_beta += weight * t.eta * t.beta;
  }

  // Claims 2-7 contributed by one increment. With `unbiased` the covariance
  // terms are rescaled by D/(D-1) for D equally weighted draws.
  std::array<double, 6> claims(bool unbiased, double draws) const {
    const double inv = 1.0 / w;
    const double m_xi = xi * inv, m_eta = eta * inv, m_beta = beta * inv;
    const double scale = unbiased ? draws / (draws - 1.0) : 1.0;
    return {
        m_xi + m_eta + m_beta,
        scale * ((xi2 * inv - m_xi * m_xi) + (eta2 * inv - m_eta * m_eta) +
                 (beta2 * inv - m_beta * m_beta)),
        (xi4 + eta4 + beta4) * inv,
        scale * (xi_eta * inv - m_xi * m_eta),
        scale * (xi_beta * inv - m_xi * m_beta),
        scale * (eta_beta * inv - m_eta * m_beta),
    };
  }
};

IncrementTerms leading_terms(const TermEvaluator& eval, const ModelParams& p, double delta,
                             double b, std::int32_t jumps) {
  const double d = (p.theta - p.lambda) * delta + p.sigma * b + static_cast<double>(jumps);
  return eval.evaluate_leading(d, b, jumps);
}

// E over (dB, dN) ~ N(0, delta) x Poisson(lambda delta) by composite
// Gauss-Legendre in dB and a truncated sum in dN.
LeadingMoments quadrature_moments(const TermEvaluator& eval, const ModelParams& p,
                                  double delta, int panels) {
  const GaussLegendre rule = GaussLegendre::unit_interval(16);
  const double mu = p.lambda * delta;
  const double sqrt_delta = std::sqrt(delta);
  const double width = 2.0 * kGaussianSpan / panels;
  LeadingMoments acc;
  double poisson = std::exp(-mu);
  double cumulative = 0.0;
  for (std::int32_t jumps = 0;; ++jumps) {
    if (jumps > 0) poisson *= mu / jumps;
    cumulative += poisson;
    for (int panel = 0; panel < panels; ++panel) {
      const double left = -kGaussianSpan + panel * width;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double g = left + width * rule.nodes[i];
        const double density = std::exp(-0.5 * g * g) / std::sqrt(2.0 * std::numbers::pi);
        const double weight = poisson * width * rule.weights[i] * density;
        acc.add(weight, leading_terms(eval, p, delta, sqrt_delta * g, jumps));
      }
    }
    if (1.0 - cumulative < 1e-17 || poisson < 1e-300) break;
  }
  return acc;
}

}  // namespace

std::array<double, 7> limit_targets(const ModelParams& params, const Perturbation& z) {
  const double s2 = params.sigma * params.sigma;
  const double u = z.u, v = z.v, w = z.w;
  const double jump_factor = 1.0 + s2 / params.lambda;
  return {
      0.0,
      -u * u / (2.0 * s2) - v * v / s2 - w * w * jump_factor / (2.0 * s2) + u * w / s2,
      u * u / s2 + 2.0 * v * v / s2 + w * w * jump_factor / s2,
      0.0,
      0.0,
      -u * w / s2,
      0.0,
  };
}

bool distance_trend_ok(const std::vector<LimitEstimate>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double slack = 2.0 * std::hypot(rows[i - 1].std_error, rows[i].std_error) + 1e-12;
    if (rows[i].distance > rows[i - 1].distance + slack) return false;
  }
  return true;
}

bool LimitCheckReport::all_trends_ok() const {
  for (const auto& c : claims) {
    if (!c.trend_ok) return false;
  }
  return true;
}

LimitCheckReport limit_checks(const LanConfig& config) {
  config.validate(false);
  LimitCheckReport report;
  report.config = config;
  const auto targets = limit_targets(config.params, config.z);
  for (std::size_t c = 0; c < 7; ++c) {
    report.claims[c].name = kClaimNames[c];
    report.claims[c].target = targets[c];
  }
  const auto replicates = static_cast<std::size_t>(config.replicates);

  for (std::int64_t n : config.n_list) {
    const double delta = config.scheme.delta_for(n);
    const SamplingGrid grid{n, delta, 0.0};
    const TermEvaluator eval(config.params, config.z, n, delta, config.quadrature_order,
                             config.truncation);
    const bool use_mc = config.inner_method == InnerMethod::monte_carlo;

    // per replicate: |sum(H + M - R)| and, for Monte Carlo, claims 2-7
    std::vector<std::array<double, 7>> per_rep(replicates);
    parallel_for(replicates, config.jobs, [&](std::size_t r) {
      std::array<double, 7> out{};
      const PathRecord path =
          simulate_path(config.params, grid, {config.root_seed, static_cast<std::uint64_t>(r)});
      double negligible = 0.0;
      for (std::size_t k = 0; k < path.b_inc.size(); ++k) {
        const double d = path.x_obs[k + 1] - path.x_obs[k];
        const IncrementTerms t = eval.evaluate(d, path.b_inc[k], path.n_inc[k]);
        negligible += t.h + t.m_term - t.r;
      }
      out[0] = std::abs(negligible);
      if (use_mc) {
        const double draws = static_cast<double>(config.inner_draws);
        for (std::int64_t k = 0; k < n; ++k) {
          Rng rng({config.root_seed, static_cast<std::uint64_t>(r)},
                  kInnerSubstreamTag + static_cast<std::uint64_t>(k));
          LeadingMoments acc;
          for (int j = 0; j < config.inner_draws; ++j) {
            const double b = std::sqrt(delta) * rng.normal();
            const std::int32_t jumps = rng.poisson(config.params.lambda * delta);
            acc.add(1.0, leading_terms(eval, config.params, delta, b, jumps));
          }
          const auto contrib = acc.claims(true, draws);
          for (std::size_t c = 0; c < 6; ++c) out[c + 1] += contrib[c];
        }
      }
      per_rep[r] = out;
    });

    std::array<LimitEstimate, 7> rows{};
    for (std::size_t c = 0; c < 7; ++c) {
      rows[c].n = n;
      rows[c].delta = delta;
    }
    std::vector<double> column(replicates);
    const std::size_t mc_claims = use_mc ? 7 : 1;
    for (std::size_t c = 0; c < mc_claims; ++c) {
      for (std::size_t r = 0; r < replicates; ++r) column[r] = per_rep[r][c];
      const SampleSummary s = summarize(column);
      rows[c].estimate = s.mean;
      rows[c].std_error = s.stderr_mean;
    }
    if (!use_mc) {
      // Identical for every k and every path: n copies of one expectation.
      const auto fine = quadrature_moments(eval, config.params, delta, config.inner_panels)
                            .claims(false, 0.0);
      const auto coarse = quadrature_moments(eval, config.params, delta, config.inner_panels / 2)
                              .claims(false, 0.0);
      const auto nd = static_cast<double>(n);
      for (std::size_t c = 0; c < 6; ++c) {
        rows[c + 1].estimate = nd * fine[c];
        rows[c + 1].std_error = nd * std::abs(fine[c] - coarse[c]);
      }
    }
    for (std::size_t c = 0; c < 7; ++c) {
      rows[c].distance = std::abs(rows[c].estimate - targets[c]);
      report.claims[c].rows.push_back(rows[c]);
    }
  }
  for (auto& claim : report.claims) claim.trend_ok = distance_trend_ok(claim.rows);
  return report;
}

}  // namespace jumplan
