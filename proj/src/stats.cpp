#include "jumplan/stats.hpp"

#include "jumplan/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace jumplan {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_statistic(std::span<const double> sample,
                    const std::function<double(double)>& reference) {
  if (sample.empty()) throw DomainError("ks_statistic: empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = reference(sorted[i]);
    const double below = static_cast<double>(i) / n;
    const double above = static_cast<double>(i + 1) / n;
    d = std::max({d, f - below, above - f});
  }
  return d;
}

double kolmogorov_survival(double t) {
  if (t <= 0.0) return 1.0;
  double acc = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    acc += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * acc, 0.0, 1.0);
}

double ks_critical_value(double alpha, std::size_t sample_size) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must be in (0, 1)");
  if (sample_size == 0) throw DomainError("sample size must be > 0");
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(sample_size));
}

SampleSummary summarize(std::span<const double> sample) {
  SampleSummary s;
  s.count = sample.size();
  if (sample.empty()) return s;
  double mean = 0.0;
  for (double v : sample) mean += v;
  mean /= static_cast<double>(sample.size());
  double ss = 0.0;
  for (double v : sample) ss += (v - mean) * (v - mean);
  s.mean = mean;
  if (sample.size() > 1) {
    s.variance = ss / static_cast<double>(sample.size() - 1);
    s.stderr_mean = std::sqrt(s.variance / static_cast<double>(sample.size()));
  }
  return s;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("least_squares needs two or more paired points");
  }
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("least_squares: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace jumplan
