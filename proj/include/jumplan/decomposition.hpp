#pragma once

// Exact per-increment expansion of the local log-likelihood ratio
//
//     log p(X; theta_n, sigma_n, lambda_n) / p(X; theta, sigma, lambda)
//         = sum_k (xi + H + eta + M + beta - R)_k
//
// obtained by walking theta, then lambda, then sigma along their segments and
// writing each score as a conditional expectation given the observed
// increment. The ell-integrals are taken by Gauss-Legendre quadrature and
// every conditional expectation is a sum over the jump-count posterior.

#include "jumplan/density.hpp"
#include "jumplan/model.hpp"
#include "jumplan/quadrature.hpp"
#include "jumplan/simulate.hpp"

#include <cstdint>
#include <vector>

namespace jumplan {

struct IncrementTerms {
  double xi = 0.0;
  double h = 0.0;
  double eta = 0.0;
  double m_term = 0.0;
  double beta = 0.0;
  double r = 0.0;

  double total() const { return xi + h + eta + m_term + beta - r; }
};

/// Evaluates the six terms for single increments under a fixed
/// (params, z, n, delta). Localized parameters at the quadrature nodes are
/// computed once at construction.
class TermEvaluator {
 public:
  /// Throws DomainError if the localized parameters leave the domain at any node.
  TermEvaluator(const ModelParams& params, const Perturbation& z, std::int64_t n,
                double delta, int quadrature_order = 16,
                const TruncationPolicy& policy = {});

  /// obs_increment is the observed increment; b_inc and n_inc are the latent
  /// Brownian and Poisson increments that produced it.
  IncrementTerms evaluate(double obs_increment, double b_inc, std::int32_t n_inc) const;

  /// Only xi, eta and beta; H, M and R are left at zero.
  IncrementTerms evaluate_leading(double obs_increment, double b_inc,
                                  std::int32_t n_inc) const;

  const ModelParams& params() const { return params_; }
  const Perturbation& perturbation() const { return z_; }
  double delta() const { return delta_; }

 private:
  double beta_integral(double obs_increment) const;

  ModelParams params_;
  Perturbation z_;
  double delta_;
  double rate_horizon_;  // sqrt(n delta)
  double rate_count_;    // sqrt(n)
  ModelParams endpoint_;  // (theta_n, sigma_n, lambda_n)
  GaussLegendre rule_;
  std::vector<ModelParams> theta_path_;   // (theta(ell), sigma, lambda)
  std::vector<ModelParams> sigma_path_;   // (theta_n, sigma(ell), lambda_n)
  std::vector<ModelParams> lambda_path_;  // (theta_n, sigma, lambda(ell))
  TruncationPolicy policy_;
};

struct TermDecomposition {
  std::vector<double> xi, h, eta, m_term, beta, r;
  IncrementTerms totals;
  double lr_from_terms = 0.0;
};

/// Requires the latent increments of `path`.
TermDecomposition decompose_terms(const ModelParams& params, const Perturbation& z,
                                  const PathRecord& path, int quadrature_order = 16,
                                  const TruncationPolicy& policy = {});

}  // namespace jumplan
