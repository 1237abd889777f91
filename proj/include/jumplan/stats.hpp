#pragma once

#include <functional>
#include <span>

namespace jumplan {

double normal_cdf(double x);

/// sup_x |F_n(x) - F(x)| between the empirical CDF of `sample` and `reference`.
/// Throws DomainError on an empty sample.
double ks_statistic(std::span<const double> sample,
                    const std::function<double(double)>& reference);

/// Asymptotic Kolmogorov survival function P(sqrt(n) D_n > t).
double kolmogorov_survival(double t);

/// Asymptotic critical value of D_n at level alpha: sqrt(-log(alpha/2)/2)/sqrt(n).
double ks_critical_value(double alpha, std::size_t sample_size);

struct SampleSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double stderr_mean = 0.0;
  std::size_t count = 0;
};

SampleSummary summarize(std::span<const double> sample);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares of y on x. Throws DomainError unless there are at
/// least two points with distinct x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace jumplan
