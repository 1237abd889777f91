#include "jumplan/bounds.hpp"

#include "jumplan/density.hpp"
#include "jumplan/parallel.hpp"
#include "jumplan/rng.hpp"
#include "jumplan/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace jumplan {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kSeriesLogTol = 60.0;
constexpr double kCompareSlack = 1e-9;  // relative, applied in log space
constexpr std::uint64_t kCheckTag = 0x5151000000000000ULL;
constexpr std::uint64_t kEstimateTag = 0x4D4D000000000000ULL;
constexpr std::size_t kMaxWitnesses = 20;

double lse(const std::vector<double>& values) {
  if (values.empty()) return kNegInf;
  return log_sum_exp(values);
}

// p log m with the convention 0^0 = 1.
double log_power(int m, int p) {
  if (p == 0) return 0.0;
  if (m == 0) return kNegInf;
  return static_cast<double>(p) * std::log(static_cast<double>(m));
}

// log sum_{l >= first} (l + offset)^p x^l / l!
double log_poisson_power_series(int first, int offset, int p, double log_x, int cap) {
  std::vector<double> terms;
  double best = kNegInf;
  double previous = kNegInf;
  for (int l = first; l <= cap; ++l) {
    const double t = log_power(l + offset, p) + l * log_x - log_factorial(l);
    terms.push_back(t);
    best = std::max(best, t);
    if (std::isfinite(t) && t < previous && t < best - kSeriesLogTol) break;
    previous = t;
  }
  return lse(terms);
}

double exp_or_zero(double log_value) {
  return std::isfinite(log_value) ? std::exp(log_value) : 0.0;
}

STable zero_table() {
  STable t;
  t.log_s = t.log_s11 = t.log_s12 = t.log_s21 = t.log_s22 = kNegInf;
  t.log_rhs11 = t.log_rhs12 = t.log_rhs21 = t.log_rhs22 = kNegInf;
  return t;
}

// Mean of exp(log_values) and its standard error, returned in log space.
struct LogMean {
  double log_mean = kNegInf;
  double log_se = kNegInf;
};

LogMean log_mean_exp(const std::vector<double>& log_values) {
  LogMean out;
  if (log_values.empty()) return out;
  const double mx = *std::max_element(log_values.begin(), log_values.end());
  if (!std::isfinite(mx)) return out;
  std::vector<double> scaled(log_values.size());
  for (std::size_t i = 0; i < log_values.size(); ++i) {
    scaled[i] = std::exp(log_values[i] - mx);
  }
  const SampleSummary s = summarize(scaled);
  out.log_mean = mx + std::log(s.mean);
  out.log_se = s.stderr_mean > 0.0 ? mx + std::log(s.stderr_mean) : kNegInf;
  return out;
}

}  // namespace

void BoundsConfig::validate() const {
  jumplan::validate(params);
  jumplan::validate(bar_params);
  if (!(alpha > 0.0 && alpha < 0.5)) throw DomainError("alpha must be in (0, 1/2)");
  if (p < 0) throw DomainError("p must be >= 0");
  if (j_max < 0) throw DomainError("j_max must be >= 0");
  if (n < 1) throw DomainError("n must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("delta must be in (0, 1]");
  if (replicates < 1) throw DomainError("replicates must be >= 1");
  if (!(C > 0.0)) throw DomainError("C must be > 0");
  if (m_cap < j_max + 2) throw DomainError("m_cap must exceed j_max + 1");
  const double budget = C / std::sqrt(static_cast<double>(n) * delta) * (1.0 + 1e-12);
  if (std::abs(params.theta - bar_params.theta) > budget) {
    throw DomainError("|theta - bar_theta| exceeds C / sqrt(n delta)");
  }
  if (std::abs(params.lambda - bar_params.lambda) > budget) {
    throw DomainError("|lambda - bar_lambda| exceeds C / sqrt(n delta)");
  }
}

BoundsConfig BoundsConfig::at_boundary(const ModelParams& params, double delta, double alpha,
                                       int p, double C, std::int64_t n) {
  BoundsConfig cfg;
  cfg.params = params;
  cfg.delta = delta;
  cfg.alpha = alpha;
  cfg.p = p;
  cfg.C = C;
  cfg.n = n > 0 ? n : std::max<std::int64_t>(1, std::llround(1.0 / (delta * delta)));
  const double shift = C / std::sqrt(static_cast<double>(cfg.n) * delta);
  cfg.bar_params = {params.theta + shift, params.sigma, params.lambda - shift};
  if (!(cfg.bar_params.lambda > 0.0)) cfg.bar_params.lambda = params.lambda + shift;
  return cfg;
}

STable s_jp(const BoundsConfig& config, int j, double b_inc, int sampled_jumps) {
  return s_jp(config, j, config.p, b_inc, sampled_jumps);
}

STable s_jp(const BoundsConfig& config, int j, int p, double b_inc, int sampled_jumps) {
  if (j < 0 || j > config.j_max) throw DomainError("j must be in [0, j_max]");
  if (p < 0) throw DomainError("p must be >= 0");
  STable t = zero_table();
  if (sampled_jumps != j) return t;

  const ModelParams& tp = config.params;
  const ModelParams& bp = config.bar_params;
  const double delta = config.delta;
  const double x = tp.sigma * b_inc + (tp.theta - bp.theta - tp.lambda + bp.lambda) * delta;
  const double inv_two_var = 1.0 / (2.0 * bp.sigma * bp.sigma * delta);
  const double log_rate = std::log(bp.lambda * delta);
  auto log_weight = [&](int m) {
    const double a = x + static_cast<double>(j - m);
    return -a * a * inv_two_var + m * log_rate - log_factorial(m);
  };

  std::vector<double> denom, lower, upper;
  for (int m = 0; m < j; ++m) {
    const double lw = log_weight(m);
    denom.push_back(lw);
    lower.push_back(log_power(m, p) + lw);
  }
  denom.push_back(log_weight(j));
  double best = *std::max_element(denom.begin(), denom.end());
  double previous = denom.back();
  for (int m = j + 1;; ++m) {
    if (m > config.m_cap) {
      t.capped = true;
      break;
    }
    const double lw = log_weight(m);
    denom.push_back(lw);
    upper.push_back(log_power(m, p) + lw);
    best = std::max(best, lw);
    if (lw < previous && lw < best - kSeriesLogTol && m > j + p) break;
    previous = lw;
  }

  const double log_den = lse(denom);
  std::vector<double> all(lower);
  all.insert(all.end(), upper.begin(), upper.end());
  const double log_lower = lse(lower) - log_den;
  const double log_upper = lse(upper) - log_den;
  t.log_s = lse(all) - log_den;
  t.s = exp_or_zero(t.log_s);

  const bool inside = std::abs(b_inc) <= std::pow(delta, config.alpha);
  t.log_s11 = inside ? log_lower : kNegInf;
  t.log_s12 = inside ? log_upper : kNegInf;
  t.log_s21 = inside ? kNegInf : log_lower;
  t.log_s22 = inside ? kNegInf : log_upper;
  t.s11 = exp_or_zero(t.log_s11);
  t.s12 = exp_or_zero(t.log_s12);
  t.s21 = exp_or_zero(t.log_s21);
  t.s22 = exp_or_zero(t.log_s22);
  t.s1 = t.s11 + t.s12;
  t.s2 = t.s21 + t.s22;

  const double bar_var4 = 4.0 * bp.sigma * bp.sigma * delta;
  std::vector<double> rhs11_terms;
  for (int m = 0; m < j; ++m) {
    const double gap = static_cast<double>(j - m);
    rhs11_terms.push_back(log_power(m, p) - gap * gap / bar_var4 + m * log_rate -
                          log_factorial(m));
  }
  t.log_rhs11 = rhs11_terms.empty()
                    ? kNegInf
                    : log_factorial(j) - j * log_rate + lse(rhs11_terms);
  t.log_rhs12 = -1.0 / bar_var4 + log_poisson_power_series(1, j, p, log_rate, config.m_cap);
  t.log_rhs21 = inside ? kNegInf : log_power(j, p);
  t.log_rhs22 = inside ? kNegInf : log_poisson_power_series(0, j + 1, p, log_rate, config.m_cap);
  t.rhs11 = exp_or_zero(t.log_rhs11);
  t.rhs12 = exp_or_zero(t.log_rhs12);
  t.rhs21 = exp_or_zero(t.log_rhs21);
  t.rhs22 = exp_or_zero(t.log_rhs22);
  return t;
}

BoundsCheckReport lemma_bounds_check(const BoundsConfig& config, std::int64_t sample_size) {
  config.validate();
  if (sample_size < 1) throw DomainError("sample_size must be >= 1");
  BoundsCheckReport report;
  report.delta = config.delta;
  report.alpha = config.alpha;
  report.p = config.p;
  report.draws = sample_size;
  report.enforced = config.delta <= config.large_n_delta;

  constexpr std::int64_t kBlock = 4096;
  const auto blocks = static_cast<std::size_t>((sample_size + kBlock - 1) / kBlock);
  std::vector<BoundsCheckReport> partial(blocks);
  const double sqrt_delta = std::sqrt(config.delta);
  const double jump_mean = config.params.lambda * config.delta;

  parallel_for(blocks, config.jobs, [&](std::size_t block) {
    BoundsCheckReport& part = partial[block];
    const std::int64_t first = static_cast<std::int64_t>(block) * kBlock;
    const std::int64_t last = std::min(sample_size, first + kBlock);
    for (std::int64_t draw = first; draw < last; ++draw) {
      Rng rng({config.root_seed, static_cast<std::uint64_t>(draw)}, kCheckTag);
      const double b = sqrt_delta * rng.normal();
      const int jumps = rng.poisson(jump_mean);
      for (int j = 0; j <= config.j_max; ++j) {
        const STable t = s_jp(config, j, b, jumps);
        ++part.evaluations;
        if (jumps == j) ++part.nontrivial;
        part.capped = part.capped || t.capped;
        const std::array<std::pair<double, double>, 4> checks = {{
            {t.log_s11, t.log_rhs11}, {t.log_s12, t.log_rhs12},
            {t.log_s21, t.log_rhs21}, {t.log_s22, t.log_rhs22}}};
        for (std::size_t c = 0; c < 4; ++c) {
          const auto [lhs, rhs] = checks[c];
          if (!std::isfinite(lhs)) continue;  // zero is below any bound
          if (lhs > rhs + kCompareSlack) {
            ++part.violations[c];
            if (part.witnesses.size() < kMaxWitnesses) {
              static constexpr std::array<int, 4> kIds = {11, 12, 21, 22};
              part.witnesses.push_back({kIds[c], j, config.p, b, lhs, rhs});
            }
          }
        }
      }
    }
  });
  for (const auto& part : partial) {
    report.evaluations += part.evaluations;
    report.nontrivial += part.nontrivial;
    report.capped = report.capped || part.capped;
    for (std::size_t c = 0; c < 4; ++c) report.violations[c] += part.violations[c];
    for (const auto& w : part.witnesses) {
      if (report.witnesses.size() < kMaxWitnesses) report.witnesses.push_back(w);
    }
  }
  return report;
}

MEstimate estimate_M(const BoundsConfig& config) {
  config.validate();
  MEstimate out;
  out.delta = config.delta;
  const double sqrt_delta = std::sqrt(config.delta);
  const double jump_mean = config.params.lambda * config.delta;

  double pmf = std::exp(-jump_mean);
  double kept = 0.0;
  for (int j = 0; j <= config.j_max; ++j) {
    if (j > 0) pmf *= jump_mean / j;
    kept += pmf;
  }
  out.tail_mass = std::max(0.0, 1.0 - kept);
  out.tail_flag = out.tail_mass > 1e-12;

  const auto draws = static_cast<std::size_t>(config.replicates);
  std::vector<double> log_v1(draws, kNegInf), log_v2(draws, kNegInf);
  std::vector<char> capped(draws, 0);
  parallel_for(draws, config.jobs, [&](std::size_t i) {
    Rng rng({config.root_seed, static_cast<std::uint64_t>(i)}, kEstimateTag);
    const double b = sqrt_delta * rng.normal();
    const int jumps = rng.poisson(jump_mean);
    if (jumps > config.j_max) return;
    const STable mismatch = s_jp(config, jumps, 0, b, jumps);
    const STable weighted = s_jp(config, jumps, config.p, b, jumps);
    log_v1[i] = log_power(jumps, config.p) + mismatch.log_s;
    log_v2[i] = weighted.log_s;
    capped[i] = mismatch.capped || weighted.capped;
  });
  out.capped = std::any_of(capped.begin(), capped.end(), [](char c) { return c != 0; });

  const LogMean m1 = log_mean_exp(log_v1);
  const LogMean m2 = log_mean_exp(log_v2);
  out.log_m1 = m1.log_mean;
  out.log_m2 = m2.log_mean;
  out.m1_hat = exp_or_zero(m1.log_mean);
  out.m2_hat = exp_or_zero(m2.log_mean);
  out.m1_se = exp_or_zero(m1.log_se);
  out.m2_se = exp_or_zero(m2.log_se);
  return out;
}

DecayFit decay_fit(std::span<const MEstimate> estimates, double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw DomainError("alpha must be in (0, 1/2)");
  DecayFit fit;
  std::vector<double> x, y;
  for (const MEstimate& e : estimates) {
    const double log_sum = log_sum_exp(std::vector<double>{e.log_m1, e.log_m2});
    if (!std::isfinite(log_sum) || !(e.delta > 0.0)) {
      ++fit.excluded;
      continue;
    }
    x.push_back(std::pow(e.delta, -(1.0 - 2.0 * alpha)));
    y.push_back(log_sum);
  }
  fit.used = static_cast<int>(x.size());
  if (fit.used < 4) {
    std::ostringstream os;
    os << "decay_fit needs at least 4 positive estimates, got " << fit.used;
    throw DomainError(os.str());
  }
  const LinearFit ls = least_squares(x, y);
  fit.slope = ls.slope;
  fit.intercept = ls.intercept;
  fit.r_squared = ls.r_squared;
  fit.decays = fit.slope < 0.0;
  return fit;
}

}  // namespace jumplan
