// jumplan: command-line front end.
//
// Every subcommand accepts --config FILE (TOML with a [<command>] section
// whose keys are the long option names), --seed, --jobs, --out and
// --format {csv,json}. Precedence is command line,
// then config file, then JUMPLAN_<OPTION> environment variables, then
// built-in defaults. Exit codes: 0 ok, 2 configuration error, 3 runtime error.

#include "jumplan/bounds.hpp"
#include "jumplan/decomposition.hpp"
#include "jumplan/density.hpp"
#include "jumplan/lan_experiment.hpp"
#include "jumplan/likelihood.hpp"
#include "jumplan/limit_checks.hpp"
#include "jumplan/mle.hpp"
#include "jumplan/parallel.hpp"
#include "jumplan/report_io.hpp"
#include "jumplan/simulate.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace jumplan;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 0;
  int jobs = default_jobs();
  std::string out;
  std::string format;
};

void add_common(CLI::App* sub, Common& c, bool stochastic, const std::string& format) {
  sub->fallthrough();  // --config belongs to the top-level app
  auto* seed = sub->add_option("--seed", c.seed, "root seed");
  if (stochastic) seed->required();
  sub->add_option("--jobs", c.jobs, "worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);
  sub->add_option("--out", c.out, "output file (default stdout)");
  c.format = format;
  sub->add_option("--format", c.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

// JUMPLAN_<NAME> for every long option, '-' mapped to '_'.
void attach_env(CLI::App* sub) {
  for (CLI::Option* opt : sub->get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty() || names.front() == "help" || names.front() == "config") continue;
    std::string env = "JUMPLAN_";
    for (char ch : names.front()) env += ch == '-' ? '_' : static_cast<char>(std::toupper(ch));
    opt->envname(env);
  }
}

// The resolved configuration as TOML. jobs and output paths are left out because they
// do not affect results and would break byte-identity across worker counts.
std::string resolved_config(const CLI::App* sub) {
  std::ostringstream os;
  os << '[' << sub->get_name() << "]\n";
  std::istringstream all(sub->config_to_str(true, false));
  std::string line;
  while (std::getline(all, line)) {
    const auto key = line.substr(0, line.find('='));
    std::string trimmed = key;
    trimmed.erase(std::remove_if(trimmed.begin(), trimmed.end(), ::isspace), trimmed.end());
    if (trimmed == "jobs" || trimmed == "out" || trimmed == "lr-out" || trimmed == "help") continue;
    std::string value = line.substr(key.size() + (key.size() < line.size() ? 1 : 0));
    if (value == "\"\"") continue;  // unset, the default applies
    // defaults of list options come back as quoted strings
    if (value.size() > 3 && value.front() == '"' && value[1] == '[' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (!value.empty() && value.front() == '[') {
      value.erase(std::remove(value.begin(), value.end(), ' '), value.end());
    }
    os << key << '=' << value << '\n';
  }
  return os.str();
}

struct ModelFlags {
  double theta = 1.0, sigma = 1.0, lambda = 1.0;
  ModelParams params() const { return {theta, sigma, lambda}; }
};

void add_model(CLI::App* sub, ModelFlags& m, bool with_theta = true) {
  if (with_theta) sub->add_option("--theta", m.theta, "drift")->capture_default_str();
  sub->add_option("--sigma", m.sigma, "diffusion scale")->capture_default_str();
  sub->add_option("--lambda", m.lambda, "jump intensity")->capture_default_str();
}

struct TruncFlags {
  TruncationPolicy policy;
};

void add_truncation(CLI::App* sub, TruncFlags& t) {
  sub->add_option("--log-tol", t.policy.log_tol, "mixture terms kept within this log distance")
      ->capture_default_str();
  sub->add_option("--m-cap", t.policy.m_cap, "largest jump count summed")->capture_default_str();
}

// Writes `body` to --out or stdout. For CSV the resolved configuration goes
// to <out>.config.toml, or to stderr when writing to stdout.
void emit(const Common& c, const CLI::App* sub, const std::string& command,
          const std::string& csv, const json& result) {
  const std::string config = resolved_config(sub);
  std::string body;
  if (c.format == "json") {
    json doc = envelope(command, result);
    doc["resolved_config"] = config;
    body = doc.dump(2) + "\n";
  } else {
    body = csv;
  }
  if (c.out.empty()) {
    std::cout << body;
    if (c.format == "csv") std::cerr << config;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file " + c.out);
  f << body;
  if (c.format == "csv") {
    std::ofstream side(c.out + ".config.toml", std::ios::binary);
    side << config;
  }
}

std::string fmt(double v) { return format_double(v); }

// Increments and step from either "# delta=<v>" + "increment" column, or a
// path CSV with t and x columns (first replicate only).
struct LoadedData {
  std::vector<double> increments;
  double delta = 0.0;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

LoadedData load_increments(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open input file " + file);
  LoadedData data;
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("delta=");
      if (pos != std::string::npos) data.delta = std::stod(line.substr(pos + 6));
      continue;
    }
    header = split_csv(line);
    break;
  }
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int inc_col = column("increment");
  const int x_col = column("x");
  const int t_col = column("t");
  const int rep_col = column("replicate");
  if (inc_col < 0 && (x_col < 0 || t_col < 0)) {
    throw ConfigError("input needs an 'increment' column or 't' and 'x' columns");
  }
  std::vector<double> xs, ts;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    try {
      if (rep_col >= 0 && std::stol(cells.at(rep_col)) != 0) continue;
      if (inc_col >= 0) {
        data.increments.push_back(std::stod(cells.at(inc_col)));
      } else {
        xs.push_back(std::stod(cells.at(x_col)));
        ts.push_back(std::stod(cells.at(t_col)));
      }
    } catch (const std::exception&) {
      throw ConfigError("malformed row " + std::to_string(row) + " in " + file);
    }
  }
  if (inc_col < 0) {
    for (std::size_t k = 1; k < xs.size(); ++k) data.increments.push_back(xs[k] - xs[k - 1]);
    if (ts.size() >= 2) data.delta = ts[1] - ts[0];
  }
  return data;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear jump-diffusion model: simulation, likelihood, LAN experiments"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML file; a [<command>] section holds that command's long options");
  app.allow_config_extras(CLI::config_extras_mode::error);
  std::vector<std::pair<CLI::App*, std::function<void()>>> commands;

  // simulate
  Common sim_c;
  ModelFlags sim_m;
  std::int64_t sim_n = 1000;
  double sim_delta = 0.01, sim_x0 = 0.0;
  int sim_reps = 1;
  auto* sim = app.add_subcommand("simulate", "simulate observed paths");
  add_model(sim, sim_m);
  sim->add_option("--n", sim_n, "number of increments")->capture_default_str();
  sim->add_option("--delta", sim_delta, "observation step, at most 1")->capture_default_str();
  sim->add_option("--x0", sim_x0, "starting value")->capture_default_str();
  sim->add_option("--replicates", sim_reps, "number of paths")->capture_default_str();
  add_common(sim, sim_c, true, "csv");
  commands.emplace_back(sim, [&] {
    const SamplingGrid grid{sim_n, sim_delta, sim_x0};
    validate(grid);
    validate(sim_m.params());
    if (sim_reps < 1) throw DomainError("replicates must be >= 1");
    const auto paths = simulate_batch(sim_m.params(), grid, sim_c.seed, sim_reps, sim_c.jobs);
    std::ostringstream csv;
    json arr = json::array();
    for (std::size_t r = 0; r < paths.size(); ++r) {
      write_path_csv(csv, paths[r], r == 0, sim_reps > 1 ? static_cast<long>(r) : -1);
      if (sim_c.format == "json") {
        json x = json::array(), b = json::array(), jn = json::array();
        for (double v : paths[r].x_obs) x.push_back(v);
        for (double v : paths[r].b_inc) b.push_back(v);
        for (auto v : paths[r].n_inc) jn.push_back(v);
        arr.push_back({{"replicate", r}, {"x", x}, {"b_inc", b}, {"n_inc", jn}});
      }
    }
    emit(sim_c, sim, "simulate", csv.str(),
         {{"delta", sim_delta}, {"n", sim_n}, {"params", to_json(sim_m.params())}, {"paths", arr}});
  });

  // density
  Common den_c;
  ModelFlags den_m;
  TruncFlags den_t;
  double den_delta = 0.1, den_x = 0.0, den_y = 0.0;
  auto* den = app.add_subcommand("density", "transition density p(delta, x, y)");
  add_model(den, den_m);
  den->add_option("--delta", den_delta, "time step")->capture_default_str();
  den->add_option("--x", den_x, "start value")->capture_default_str();
  den->add_option("--y", den_y, "end value")->capture_default_str();
  add_truncation(den, den_t);
  add_common(den, den_c, false, "json");
  commands.emplace_back(den, [&] {
    validate(den_m.params());
    if (!(den_delta > 0.0)) throw DomainError("delta must be > 0");
    den_t.policy.validate();
    const double lp = log_transition_density(den_m.params(), den_delta, den_x, den_y, den_t.policy);
    const TruncationWindow w = truncation_window(den_m.params(), den_delta, den_y - den_x, den_t.policy);
    std::ostringstream csv;
    csv << "log_density,density,m_lo,m_hi,capped\n"
        << fmt(lp) << ',' << fmt(std::exp(lp)) << ',' << w.m_lo << ',' << w.m_hi << ','
        << (w.capped ? 1 : 0) << '\n';
    emit(den_c, den, "density", csv.str(),
         {{"log_density", lp}, {"density", std::exp(lp)},
          {"window", {{"m_lo", w.m_lo}, {"m_hi", w.m_hi}, {"m_star", w.m_star}, {"capped", w.capped}}}});
  });

  // score
  Common sc_c;
  ModelFlags sc_m;
  TruncFlags sc_t;
  double sc_delta = 0.1, sc_dx = 0.0;
  auto* sc = app.add_subcommand("score", "score vector of one increment");
  add_model(sc, sc_m);
  sc->add_option("--delta", sc_delta, "time step")->capture_default_str();
  sc->add_option("--dx", sc_dx, "observed increment")->capture_default_str();
  add_truncation(sc, sc_t);
  add_common(sc, sc_c, false, "json");
  commands.emplace_back(sc, [&] {
    validate(sc_m.params());
    if (!(sc_delta > 0.0)) throw DomainError("delta must be > 0");
    sc_t.policy.validate();
    const ScoreVector s = score_vector(sc_m.params(), sc_delta, sc_dx, sc_t.policy);
    std::ostringstream csv;
    csv << "d_theta,d_sigma,d_lambda\n"
        << fmt(s.d_theta) << ',' << fmt(s.d_sigma) << ',' << fmt(s.d_lambda) << '\n';
    emit(sc_c, sc, "score", csv.str(), to_json(s));
  });

  // fisher
  Common fi_c;
  ModelFlags fi_m;
  auto* fi = app.add_subcommand("fisher", "asymptotic information matrix");
  add_model(fi, fi_m, false);
  add_common(fi, fi_c, false, "json");
  commands.emplace_back(fi, [&] {
    validate(ModelParams{0.0, fi_m.sigma, fi_m.lambda});
    const FisherMatrix g = fisher_matrix(fi_m.sigma, fi_m.lambda);
    std::ostringstream csv;
    for (int i = 0; i < 3; ++i) {
      csv << fmt(g(i, 0)) << ',' << fmt(g(i, 1)) << ',' << fmt(g(i, 2)) << '\n';
    }
    emit(fi_c, fi, "fisher", csv.str(), {{"order", {"theta", "sigma", "lambda"}}, {"gamma", to_json(g)}});
  });

  // lan and limits share the experiment options
  struct ExperimentFlags {
    Common c;
    ModelFlags m;
    TruncFlags t;
    std::vector<double> z{1.0, 1.0, 1.0};
    double scheme_c = 1.0, scheme_beta = 0.4;
    std::vector<std::int64_t> n_list{2000, 8000, 32000};
    int replicates = 200;
    int quadrature_order = 16;
    int decomposition_subsample = 10;
    std::string lr_out;
    std::string inner_method = "quadrature";
    int inner_draws = 512;
    int inner_panels = 256;

    LanConfig config() const {
      LanConfig cfg;
      cfg.params = m.params();
      cfg.z = {z[0], z[1], z[2]};
      cfg.scheme = {scheme_c, scheme_beta};
      cfg.n_list = n_list;
      cfg.replicates = replicates;
      cfg.root_seed = c.seed;
      cfg.quadrature_order = quadrature_order;
      cfg.truncation = t.policy;
      cfg.decomposition_subsample = decomposition_subsample;
      cfg.jobs = c.jobs;
      cfg.inner_method = inner_method == "mc" ? InnerMethod::monte_carlo : InnerMethod::quadrature;
      cfg.inner_draws = inner_draws;
      cfg.inner_panels = inner_panels;
      return cfg;
    }
  };
  auto add_experiment = [](CLI::App* sub, ExperimentFlags& e) {
    add_model(sub, e.m);
    sub->add_option("--z", e.z, "perturbation u,v,w")->delimiter(',')->expected(3)->capture_default_str();
    sub->add_option("--scheme-c", e.scheme_c, "delta = c n^-beta")->capture_default_str();
    sub->add_option("--scheme-beta", e.scheme_beta, "delta = c n^-beta")->capture_default_str();
    sub->add_option("--n-list", e.n_list, "sample sizes")->delimiter(',')->capture_default_str();
    sub->add_option("--replicates", e.replicates, "paths per sample size")->capture_default_str();
    sub->add_option("--quadrature-order", e.quadrature_order, "Gauss-Legendre nodes")->capture_default_str();
    add_truncation(sub, e.t);
  };

  ExperimentFlags lan_e;
  auto* lan = app.add_subcommand("lan", "Monte Carlo LAN experiment");
  add_experiment(lan, lan_e);
  lan->add_option("--decomposition-subsample", lan_e.decomposition_subsample,
                  "paths decomposed term by term per n")
      ->capture_default_str();
  lan->add_option("--lr-out", lan_e.lr_out, "per-replicate LR CSV (json format; default <out>.lr.csv)");
  add_common(lan, lan_e.c, true, "json");
  commands.emplace_back(lan, [&] {
    const LanConfig cfg = lan_e.config();
    cfg.validate(true);
    const LanReport report = run_lan_experiment(cfg);
    std::ostringstream csv;
    write_lr_csv(csv, report);
    json result = to_json(report);
    if (lan_e.c.format == "json") {
      std::string path = lan_e.lr_out;
      if (path.empty() && !lan_e.c.out.empty()) path = lan_e.c.out + ".lr.csv";
      if (!path.empty()) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ConfigError("cannot open " + path);
        f << csv.str();
      }
    }
    emit(lan_e.c, lan, "lan", csv.str(), result);
  });

  ExperimentFlags lim_e;
  auto* lim = app.add_subcommand("limits", "convergence of the negligible and leading terms");
  add_experiment(lim, lim_e);
  lim->add_option("--inner-method", lim_e.inner_method, "quadrature or mc")
      ->check(CLI::IsMember({"quadrature", "mc"}))
      ->capture_default_str();
  lim->add_option("--inner-draws", lim_e.inner_draws, "draws per increment for mc")->capture_default_str();
  lim->add_option("--inner-panels", lim_e.inner_panels, "Gauss-Legendre panels for quadrature")
      ->capture_default_str();
  add_common(lim, lim_e.c, true, "json");
  commands.emplace_back(lim, [&] {
    const LanConfig cfg = lim_e.config();
    cfg.validate(false);
    const LimitCheckReport report = limit_checks(cfg);
    std::ostringstream csv;
    csv << "claim,name,target,n,delta,estimate,std_error,distance,trend_ok\n";
    for (std::size_t c = 0; c < report.claims.size(); ++c) {
      const LimitClaim& cl = report.claims[c];
      for (const auto& e : cl.rows) {
        csv << c + 1 << ",\"" << cl.name << "\"," << fmt(cl.target) << ',' << e.n << ','
            << fmt(e.delta) << ',' << fmt(e.estimate) << ',' << fmt(e.std_error) << ','
            << fmt(e.distance) << ',' << (cl.trend_ok ? 1 : 0) << '\n';
      }
    }
    emit(lim_e.c, lim, "limits", csv.str(), to_json(report));
  });

  // decompose
  Common dec_c;
  ModelFlags dec_m;
  TruncFlags dec_t;
  std::vector<double> dec_z{1.0, 1.0, 1.0};
  std::int64_t dec_n = 2000;
  double dec_delta = 0.0;
  double dec_beta = 0.4;
  int dec_order = 16;
  auto* dec = app.add_subcommand("decompose", "term-by-term log-likelihood ratio of one path");
  add_model(dec, dec_m);
  dec->add_option("--z", dec_z, "perturbation u,v,w")->delimiter(',')->expected(3)->capture_default_str();
  dec->add_option("--n", dec_n, "number of increments")->capture_default_str();
  dec->add_option("--delta", dec_delta, "step; 0 means n^-scheme-beta")->capture_default_str();
  dec->add_option("--scheme-beta", dec_beta, "used when delta is 0")->capture_default_str();
  dec->add_option("--quadrature-order", dec_order, "Gauss-Legendre nodes")->capture_default_str();
  add_truncation(dec, dec_t);
  add_common(dec, dec_c, true, "json");
  commands.emplace_back(dec, [&] {
    const double delta = dec_delta > 0.0 ? dec_delta : GridScheme{1.0, dec_beta}.delta_for(dec_n);
    const SamplingGrid grid{dec_n, delta, 0.0};
    validate(grid);
    const Perturbation z{dec_z[0], dec_z[1], dec_z[2]};
    validate(z);
    localize(dec_m.params(), z, dec_n, delta, 1.0);
    const PathRecord path = simulate_path(dec_m.params(), grid, {dec_c.seed, 0});
    const TermDecomposition d = decompose_terms(dec_m.params(), z, path, dec_order, dec_t.policy);
    const double direct = log_likelihood_ratio(dec_m.params(), z, path, dec_t.policy);
    std::ostringstream csv;
    csv << "k,xi,h,eta,m,beta,r,total\n";
    for (std::size_t k = 0; k < d.xi.size(); ++k) {
      const double total = d.xi[k] + d.h[k] + d.eta[k] + d.m_term[k] + d.beta[k] - d.r[k];
      csv << k << ',' << fmt(d.xi[k]) << ',' << fmt(d.h[k]) << ',' << fmt(d.eta[k]) << ','
          << fmt(d.m_term[k]) << ',' << fmt(d.beta[k]) << ',' << fmt(d.r[k]) << ',' << fmt(total) << '\n';
    }
    emit(dec_c, dec, "decompose", csv.str(),
         {{"n", dec_n}, {"delta", delta}, {"lr_direct", direct}, {"lr_from_terms", d.lr_from_terms},
          {"residual", std::abs(direct - d.lr_from_terms)}, {"totals", to_json(d.totals)}});
  });

  // bounds
  Common bo_c;
  ModelFlags bo_m;
  double bo_alpha = 0.25, bo_C = 1.0, bo_threshold = 0.01;
  std::vector<int> bo_p{1};
  std::vector<double> bo_deltas{0.02, 0.01, 0.005, 0.002};
  std::int64_t bo_n = 0, bo_reps = 100000, bo_check = 100000;
  int bo_jmax = 8, bo_mcap = 512;
  auto* bo = app.add_subcommand("bounds", "jump-mismatch bounds and their exponential decay");
  add_model(bo, bo_m);
  bo->add_option("--alpha", bo_alpha, "split exponent in (0, 1/2)")->capture_default_str();
  bo->add_option("--p", bo_p, "moment exponents")->delimiter(',')->capture_default_str();
  bo->add_option("--deltas", bo_deltas, "time steps")->delimiter(',')->capture_default_str();
  bo->add_option("--C", bo_C, "perturbation budget")->capture_default_str();
  bo->add_option("--n", bo_n, "sample size; 0 means round(delta^-2)")->capture_default_str();
  bo->add_option("--j-max", bo_jmax, "largest jump count")->capture_default_str();
  bo->add_option("--m-cap", bo_mcap, "largest posterior jump count")->capture_default_str();
  bo->add_option("--replicates", bo_reps, "draws per decay estimate")->capture_default_str();
  bo->add_option("--check-draws", bo_check, "draws per inequality check; 0 skips it")->capture_default_str();
  bo->add_option("--large-n-delta", bo_threshold, "inequalities enforced for delta <= this")
      ->capture_default_str();
  add_common(bo, bo_c, true, "json");
  commands.emplace_back(bo, [&] {
    validate(bo_m.params());
    if (bo_deltas.empty() || bo_p.empty()) throw DomainError("deltas and p must be non-empty");
    json estimates = json::array(), fits = json::array(), checks = json::array();
    std::ostringstream csv;
    csv << "delta,alpha,p,m1_hat,m1_se,m2_hat,m2_se,log_m1,log_m2,slope,r_squared,violations,enforced\n";
    for (int p : bo_p) {
      std::vector<MEstimate> es;
      std::vector<BoundsCheckReport> reps;
      for (double d : bo_deltas) {
        BoundsConfig cfg = BoundsConfig::at_boundary(bo_m.params(), d, bo_alpha, p, bo_C, bo_n);
        cfg.j_max = bo_jmax;
        cfg.m_cap = bo_mcap;
        cfg.replicates = bo_reps;
        cfg.root_seed = bo_c.seed;
        cfg.large_n_delta = bo_threshold;
        cfg.jobs = bo_c.jobs;
        cfg.validate();
        es.push_back(estimate_M(cfg));
        if (bo_check > 0) reps.push_back(lemma_bounds_check(cfg, bo_check));
      }
      DecayFit fit;
      bool fitted = true;
      try {
        fit = decay_fit(es, bo_alpha);
      } catch (const DomainError&) {
        fitted = false;
      }
      for (std::size_t i = 0; i < es.size(); ++i) {
        json e = to_json(es[i]);
        e["p"] = p;
        estimates.push_back(e);
        csv << fmt(es[i].delta) << ',' << fmt(bo_alpha) << ',' << p << ',' << fmt(es[i].m1_hat) << ','
            << fmt(es[i].m1_se) << ',' << fmt(es[i].m2_hat) << ',' << fmt(es[i].m2_se) << ','
            << fmt(es[i].log_m1) << ',' << fmt(es[i].log_m2) << ','
            << (fitted ? fmt(fit.slope) : "") << ',' << (fitted ? fmt(fit.r_squared) : "") << ',';
        if (!reps.empty()) csv << reps[i].total_violations() << ',' << (reps[i].enforced ? 1 : 0);
        else csv << ',';
        csv << '\n';
      }
      json f = fitted ? to_json(fit) : json{{"error", "fewer than 4 usable estimates"}};
      f["p"] = p;
      fits.push_back(f);
      for (const auto& r : reps) {
        json j = to_json(r);
        j["status"] = r.pass() ? "pass" : (r.enforced ? "fail" : "warning");
        checks.push_back(j);
      }
    }
    emit(bo_c, bo, "bounds", csv.str(),
         {{"estimates", estimates}, {"decay_fits", fits}, {"checks", checks}});
  });

  // mle
  Common ml_c;
  std::string ml_input;
  double ml_delta = 0.0;
  std::vector<double> ml_init;
  OptimizerConfig ml_opt;
  TruncFlags ml_t;
  bool ml_study = false;
  ModelFlags ml_m;
  double ml_scheme_c = 1.0, ml_scheme_beta = 0.4;
  std::vector<std::int64_t> ml_n_list{2000, 8000, 32000};
  int ml_reps = 300;
  auto* ml = app.add_subcommand("mle", "maximum-likelihood fit, or a convergence-rate study");
  ml->add_option("--input", ml_input, "CSV of increments or a simulated path");
  ml->add_option("--delta", ml_delta, "step; overrides the file")->capture_default_str();
  ml->add_option("--init", ml_init, "theta,sigma,lambda start (default: moments)")
      ->delimiter(',')
      ->expected(3);
  ml->add_option("--grad-tol", ml_opt.grad_tolerance, "rate-normalized gradient tolerance")
      ->capture_default_str();
  ml->add_option("--max-iter", ml_opt.max_iterations, "iteration limit")->capture_default_str();
  ml->add_flag("--study", ml_study, "run a rate study on simulated data instead");
  add_model(ml, ml_m);
  ml->add_option("--scheme-c", ml_scheme_c, "study: delta = c n^-beta")->capture_default_str();
  ml->add_option("--scheme-beta", ml_scheme_beta, "study: delta = c n^-beta")->capture_default_str();
  ml->add_option("--n-list", ml_n_list, "study: sample sizes")->delimiter(',')->capture_default_str();
  ml->add_option("--replicates", ml_reps, "study: replicates per n")->capture_default_str();
  add_truncation(ml, ml_t);
  add_common(ml, ml_c, false, "json");
  commands.emplace_back(ml, [&] {
    ml_opt.truncation = ml_t.policy;
    ml_opt.validate();
    if (ml_study) {
      if (ml->get_option("--seed")->count() == 0 && std::getenv("JUMPLAN_SEED") == nullptr) {
        throw ConfigError("--seed is required with --study");
      }
      const RateStudy s = rate_study(ml_m.params(), {ml_scheme_c, ml_scheme_beta}, ml_n_list, ml_reps,
                                     ml_c.seed, ml_c.jobs, ml_opt);
      std::ostringstream csv;
      csv << "n,delta,rate_theta,rate_sigma,rate_lambda,rmse_theta,rmse_sigma,rmse_lambda,"
             "scaled_theta,scaled_sigma,scaled_lambda,replicates_used,nonconverged\n";
      for (const auto& r : s.rows) {
        csv << r.n << ',' << fmt(r.delta) << ',' << fmt(r.rates.theta) << ',' << fmt(r.rates.sigma) << ','
            << fmt(r.rates.lambda) << ',' << fmt(r.rmse(0)) << ',' << fmt(r.rmse(1)) << ','
            << fmt(r.rmse(2)) << ',' << fmt(r.scaled_rmse(0)) << ',' << fmt(r.scaled_rmse(1)) << ','
            << fmt(r.scaled_rmse(2)) << ',' << r.replicates_used << ',' << r.nonconverged << '\n';
      }
      emit(ml_c, ml, "mle", csv.str(), to_json(s));
      return;
    }
    if (ml_input.empty()) throw ConfigError("--input is required unless --study is given");
    LoadedData data = load_increments(ml_input);
    if (ml_delta > 0.0) data.delta = ml_delta;
    if (!(data.delta > 0.0)) throw ConfigError("step unknown: pass --delta or a '# delta=' header");
    const ModelParams init = ml_init.size() == 3 ? ModelParams{ml_init[0], ml_init[1], ml_init[2]}
                                                 : init_moments(data.increments, data.delta);
    const EstimateResult r = fit_mle(data.increments, data.delta, init, ml_opt);
    std::ostringstream csv;
    csv << "theta,sigma,lambda,se_theta,se_sigma,se_lambda,grad_norm,iterations,converged,log_likelihood\n"
        << fmt(r.params_hat.theta) << ',' << fmt(r.params_hat.sigma) << ',' << fmt(r.params_hat.lambda)
        << ',' << fmt(r.std_errors(0)) << ',' << fmt(r.std_errors(1)) << ',' << fmt(r.std_errors(2))
        << ',' << fmt(r.grad_norm_at_opt) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ','
        << fmt(r.log_likelihood) << '\n';
    json result = to_json(r);
    result["n"] = data.increments.size();
    result["delta"] = data.delta;
    emit(ml_c, ml, "mle", csv.str(), result);
  });

  for (auto& [sub, fn] : commands) attach_env(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  for (auto& [sub, fn] : commands) {
    if (!sub->parsed()) continue;
    try {
      fn();
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    } catch (const DomainError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    } catch (const std::invalid_argument& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    } catch (const std::exception& e) {
      std::cerr << "runtime error: " << e.what() << '\n';
      return kExitRuntime;
    }
  }
  return 0;
}
