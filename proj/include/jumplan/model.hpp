#pragma once

// Parameter types and closed-form quantities for the linear jump model
//
//     X_t = x + theta * t + sigma * B_t + N_t - lambda * t
//
// with B a standard Brownian motion and N an independent Poisson process of
// intensity lambda (unit jumps, compensated drift).

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace jumplan {

/// Raised when an input lies outside the model's parameter domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ModelParams {
  double theta = 0.0;   // drift per unit time
  double sigma = 1.0;   // diffusion scale, > 0
  double lambda = 1.0;  // jump intensity per unit time, > 0
};

/// Throws DomainError unless sigma > 0, lambda > 0 and all fields are finite.
void validate(const ModelParams& params);

/// Local perturbation direction z = (u, v, w).
struct Perturbation {
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;

  bool is_zero() const { return u == 0.0 && v == 0.0 && w == 0.0; }
};

void validate(const Perturbation& z);

/// Equidistant observation grid t_k = k * delta, k = 0..n.
struct SamplingGrid {
  std::int64_t n = 1;
  double delta = 1.0;
  double x0 = 0.0;

  double horizon() const { return static_cast<double>(n) * delta; }
};

void validate(const SamplingGrid& grid);

/// High-frequency scheme delta(n) = c * n^(-beta), beta in (0, 1).
struct GridScheme {
  double c = 1.0;
  double beta = 0.5;

  double delta_for(std::int64_t n) const;
};

void validate(const GridScheme& scheme);

/// Information matrix ordered (theta, sigma, lambda).
using FisherMatrix = Eigen::Matrix3d;

/// (1/sigma^2) * [[1, 0, -1], [0, 2, 0], [-1, 0, 1 + sigma^2/lambda]].
FisherMatrix fisher_matrix(double sigma, double lambda);

/// z^T Gamma z.
double quadratic_form(const FisherMatrix& gamma, const Perturbation& z);

struct RateVector {
  double theta = 1.0;
  double sigma = 1.0;
  double lambda = 1.0;
};

/// (sqrt(n delta), sqrt(n), sqrt(n delta)).
RateVector rate_vector(std::int64_t n, double delta);

/// A point on the segment between base and its local perturbation,
/// theta + ell u / sqrt(n delta), sigma + ell v / sqrt(n), lambda + ell w / sqrt(n delta).
struct LocalizedParams {
  ModelParams base;
  Perturbation z;
  std::int64_t n = 1;
  double delta = 1.0;
  double ell = 1.0;

  /// Throws DomainError naming the coordinate if the realized sigma or
  /// lambda is not strictly positive.
  ModelParams realize() const;
};

ModelParams localize(const ModelParams& base, const Perturbation& z,
                     std::int64_t n, double delta, double ell);

struct IncrementMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean theta*delta and variance (sigma^2 + lambda)*delta of one increment.
IncrementMoments increment_moments(const ModelParams& params, double delta);

std::string to_string(const ModelParams& params);

}  // namespace jumplan
