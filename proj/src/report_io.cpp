#include "jumplan/report_io.hpp"

#include <charconv>
#include <cmath>

namespace jumplan {

using nlohmann::json;

namespace {

// NaN and infinities become null in JSON.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec3(const Eigen::Vector3d& v) { return json::array({number(v(0)), number(v(1)), number(v(2))}); }

json limit_row(const LimitEstimate& e) {
  return {{"n", e.n},
          {"delta", number(e.delta)},
          {"estimate", number(e.estimate)},
          {"std_error", number(e.std_error)},
          {"distance", number(e.distance)}};
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

json to_json(const ModelParams& p) {
  return {{"theta", number(p.theta)}, {"sigma", number(p.sigma)}, {"lambda", number(p.lambda)}};
}

json to_json(const Perturbation& z) {
  return {{"u", number(z.u)}, {"v", number(z.v)}, {"w", number(z.w)}};
}

json to_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) rows.push_back(vec3(m.row(i).transpose()));
  return rows;
}

json to_json(const ScoreVector& s) {
  return {{"d_theta", number(s.d_theta)},
          {"d_sigma", number(s.d_sigma)},
          {"d_lambda", number(s.d_lambda)}};
}

json to_json(const LanReport& report) {
  json rows = json::array();
  for (const LanRow& r : report.rows) {
    json row = {{"n", r.n},
                {"delta", number(r.delta)},
                {"replicates_used", r.replicates_used},
                {"failures", r.failures},
                {"empirical_mean_lr", number(r.empirical_mean_lr)},
                {"empirical_var_lr", number(r.empirical_var_lr)},
                {"theory_mean", number(r.theory_mean)},
                {"theory_var", number(r.theory_var)},
                {"degenerate", r.degenerate},
                {"contiguity_mean", number(r.contiguity_mean)},
                {"contiguity_stderr", number(r.contiguity_stderr)},
                {"decomposition_residual", number(r.decomposition_residual)},
                {"decomposition_paths", r.decomposition_paths},
                {"score_mean", vec3(r.score_mean)},
                {"score_covariance", to_json(r.score_covariance)}};
    if (r.degenerate) {
      row["ks"] = "skipped: degenerate limit (z = 0)";
    } else {
      row["ks_statistic"] = number(r.ks_statistic);
      row["ks_critical_1pct"] = number(r.ks_critical_1pct);
      row["ks_reject_1pct"] = r.ks_statistic > r.ks_critical_1pct;
      row["regression_slope"] = number(r.regression_slope);
      row["regression_intercept"] = number(r.regression_intercept);
    }
    rows.push_back(std::move(row));
  }
  return {{"params", to_json(report.config.params)},
          {"z", to_json(report.config.z)},
          {"gamma", to_json(report.gamma)},
          {"rows", std::move(rows)}};
}

json to_json(const LimitCheckReport& report) {
  json claims = json::array();
  for (const LimitClaim& c : report.claims) {
    json rows = json::array();
    for (const auto& e : c.rows) rows.push_back(limit_row(e));
    claims.push_back({{"name", c.name},
                      {"target", number(c.target)},
                      {"trend_ok", c.trend_ok},
                      {"rows", std::move(rows)}});
  }
  return {{"params", to_json(report.config.params)},
          {"z", to_json(report.config.z)},
          {"inner_method", report.config.inner_method == InnerMethod::quadrature ? "quadrature"
                                                                                  : "monte_carlo"},
          {"all_trends_ok", report.all_trends_ok()},
          {"claims", std::move(claims)}};
}

json to_json(const BoundsCheckReport& report) {
  json witnesses = json::array();
  for (const auto& w : report.witnesses) {
    witnesses.push_back({{"inequality", w.which},
                         {"j", w.j},
                         {"p", w.p},
                         {"b_inc", number(w.b_inc)},
                         {"log_lhs", number(w.log_lhs)},
                         {"log_rhs", number(w.log_rhs)}});
  }
  return {{"delta", number(report.delta)},
          {"alpha", number(report.alpha)},
          {"p", report.p},
          {"draws", report.draws},
          {"evaluations", report.evaluations},
          {"nontrivial", report.nontrivial},
          {"violations",
           {{"11", report.violations[0]},
            {"12", report.violations[1]},
            {"21", report.violations[2]},
            {"22", report.violations[3]}}},
          {"enforced", report.enforced},
          {"capped", report.capped},
          {"pass", report.pass()},
          {"witnesses", std::move(witnesses)}};
}

json to_json(const MEstimate& e) {
  return {{"delta", number(e.delta)},
          {"m1_hat", number(e.m1_hat)},
          {"m1_se", number(e.m1_se)},
          {"m2_hat", number(e.m2_hat)},
          {"m2_se", number(e.m2_se)},
          {"log_m1", number(e.log_m1)},
          {"log_m2", number(e.log_m2)},
          {"tail_mass", number(e.tail_mass)},
          {"tail_flag", e.tail_flag},
          {"capped", e.capped}};
}

json to_json(const DecayFit& fit) {
  return {{"slope", number(fit.slope)},
          {"intercept", number(fit.intercept)},
          {"r_squared", number(fit.r_squared)},
          {"used", fit.used},
          {"excluded", fit.excluded},
          {"decays", fit.decays}};
}

json to_json(const EstimateResult& r) {
  return {{"params_hat", to_json(r.params_hat)},
          {"std_errors", vec3(r.std_errors)},
          {"grad_norm_at_opt", number(r.grad_norm_at_opt)},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"log_likelihood", number(r.log_likelihood)},
          {"note", "std_errors use the asymptotic information at the estimate; attainment is an empirical check"}};
}

json to_json(const RateStudy& study) {
  json rows = json::array();
  for (const auto& r : study.rows) {
    rows.push_back({{"n", r.n},
                    {"delta", number(r.delta)},
                    {"rates", vec3(Eigen::Vector3d(r.rates.theta, r.rates.sigma, r.rates.lambda))},
                    {"replicates_used", r.replicates_used},
                    {"nonconverged", r.nonconverged},
                    {"rmse", vec3(r.rmse)},
                    {"scaled_rmse", vec3(r.scaled_rmse)}});
  }
  return {{"params", to_json(study.params)},
          {"stability_ratio", vec3(study.stability_ratio)},
          {"stable", json::array({study.stable[0], study.stable[1], study.stable[2]})},
          {"rows", std::move(rows)}};
}

json to_json(const IncrementTerms& t) {
  return {{"xi", number(t.xi)},   {"h", number(t.h)},       {"eta", number(t.eta)},
          {"m", number(t.m_term)}, {"beta", number(t.beta)}, {"r", number(t.r)},
          {"total", number(t.total())}};
}

json envelope(const std::string& command, json result) {
  return {{"schema_version", kSchemaVersion}, {"command", command}, {"result", std::move(result)}};
}

void write_lr_csv(std::ostream& os, const LanReport& report) {
  os << "n,replicate,lr\n";
  for (const LanRow& row : report.rows) {
    for (std::size_t r = 0; r < row.lr.size(); ++r) {
      os << row.n << ',' << r << ',' << format_double(row.lr[r]) << '\n';
    }
  }
}

}  // namespace jumplan
