#include "jumplan/model.hpp"

#include <cmath>
#include <sstream>

namespace jumplan {

namespace {

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw DomainError(std::string(name) + " must be finite");
  }
}

}  // namespace

void validate(const ModelParams& params) {
  require_finite(params.theta, "theta");
  require_finite(params.sigma, "sigma");
  require_finite(params.lambda, "lambda");
  if (params.sigma <= 0.0) throw DomainError("sigma must be > 0");
  if (params.lambda <= 0.0) throw DomainError("lambda must be > 0");
}

void validate(const Perturbation& z) {
  require_finite(z.u, "u");
  require_finite(z.v, "v");
  require_finite(z.w, "w");
}

void validate(const SamplingGrid& grid) {
  if (grid.n < 1) throw DomainError("grid size n must be >= 1");
  require_finite(grid.delta, "delta");
  require_finite(grid.x0, "x0");
  if (!(grid.delta > 0.0 && grid.delta <= 1.0)) {
    throw DomainError("delta must be in (0, 1] (observation step at most one time unit)");
  }
}

double GridScheme::delta_for(std::int64_t n) const {
  return c * std::pow(static_cast<double>(n), -beta);
}

void validate(const GridScheme& scheme) {
  require_finite(scheme.c, "c");
  require_finite(scheme.beta, "beta");
  if (scheme.c <= 0.0) throw DomainError("scheme constant c must be > 0");
  if (!(scheme.beta > 0.0 && scheme.beta < 1.0)) {
    throw DomainError("scheme exponent beta must be in (0, 1)");
  }
}

FisherMatrix fisher_matrix(double sigma, double lambda) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be > 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be > 0");
  const double s2 = sigma * sigma;
  FisherMatrix g;
  g << 1.0, 0.0, -1.0,
       0.0, 2.0, 0.0,
       -1.0, 0.0, 1.0 + s2 / lambda;
  return g / s2;
}

double quadratic_form(const FisherMatrix& gamma, const Perturbation& z) {
  const Eigen::Vector3d v(z.u, z.v, z.w);
  return v.dot(gamma * v);
}

RateVector rate_vector(std::int64_t n, double delta) {
  if (n < 1) throw DomainError("n must be >= 1");
  if (!(delta > 0.0)) throw DomainError("delta must be > 0");
  const double horizon = std::sqrt(static_cast<double>(n) * delta);
  return {horizon, std::sqrt(static_cast<double>(n)), horizon};
}

ModelParams LocalizedParams::realize() const {
  const RateVector rate = rate_vector(n, delta);
  ModelParams out{base.theta + ell * z.u / rate.theta,
                  base.sigma + ell * z.v / rate.sigma,
                  base.lambda + ell * z.w / rate.lambda};
  if (!(out.sigma > 0.0)) {
    std::ostringstream os;
    os << "localized sigma = " << out.sigma << " is not > 0 (ell = " << ell << ")";
    throw DomainError(os.str());
  }
  if (!(out.lambda > 0.0)) {
    std::ostringstream os;
    os << "localized lambda = " << out.lambda << " is not > 0 (ell = " << ell << ")";
    throw DomainError(os.str());
  }
  return out;
}

ModelParams localize(const ModelParams& base, const Perturbation& z,
                     std::int64_t n, double delta, double ell) {
  if (!(ell >= 0.0 && ell <= 1.0)) throw DomainError("ell must be in [0, 1]");
  if (ell == 0.0) return base;
  return LocalizedParams{base, z, n, delta, ell}.realize();
}

IncrementMoments increment_moments(const ModelParams& params, double delta) {
  if (!(delta > 0.0)) throw DomainError("delta must be > 0");
  return {params.theta * delta,
          (params.sigma * params.sigma + params.lambda) * delta};
}

std::string to_string(const ModelParams& params) {
  std::ostringstream os;
  os << "(theta=" << params.theta << ", sigma=" << params.sigma
     << ", lambda=" << params.lambda << ")";
  return os.str();
}

}  // namespace jumplan
