#include "rdsim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "rdsim/concentration.hpp"
#include "rdsim/exact.hpp"
#include "rdsim/fluctuations.hpp"
#include "rdsim/kmc.hpp"

namespace rdsim {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

const std::vector<std::string> kSubcommands{"flows", "exact", "simulate", "fluct", "bg", "conc"};
const std::vector<std::string> kFluctKinds{"martingale", "qv", "ou", "covariance", "local"};

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  T out{};
  in >> out;
  if (in.fail() || !(in >> std::ws).eof()) throw ConfigError("bad value for " + key + ": '" + v + "'");
  return out;
}

std::vector<int> parse_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  if (v.empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, trim(item)));
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw ConfigError("bad value for " + key + ": '" + v + "'");
    return d;
  } catch (const std::logic_error&) {
    throw ConfigError("bad value for " + key + ": '" + v + "'");
  }
}

struct Field {
  const char* name;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      {"subcommand", [](const ExperimentConfig& c) { return c.subcommand; },
       [](ExperimentConfig& c, const std::string& v) { c.subcommand = v; }},
      {"lambda", [](const ExperimentConfig& c) { return format_double(c.lambda); },
       [](ExperimentConfig& c, const std::string& v) { c.lambda = parse_double("lambda", v); }},
      {"dim", [](const ExperimentConfig& c) { return std::to_string(c.dim); },
       [](ExperimentConfig& c, const std::string& v) { c.dim = parse_number<int>("dim", v); }},
      {"n", [](const ExperimentConfig& c) { return std::to_string(c.n); },
       [](ExperimentConfig& c, const std::string& v) { c.n = parse_number<int>("n", v); }},
      {"ns", [](const ExperimentConfig& c) { return join_ints(c.ns); },
       [](ExperimentConfig& c, const std::string& v) { c.ns = parse_ints("ns", v); }},
      {"lmin", [](const ExperimentConfig& c) { return std::to_string(c.lmin); },
       [](ExperimentConfig& c, const std::string& v) { c.lmin = parse_number<int>("lmin", v); }},
      {"lmax", [](const ExperimentConfig& c) { return std::to_string(c.lmax); },
       [](ExperimentConfig& c, const std::string& v) { c.lmax = parse_number<int>("lmax", v); }},
      {"ells", [](const ExperimentConfig& c) { return join_ints(c.ells); },
       [](ExperimentConfig& c, const std::string& v) { c.ells = parse_ints("ells", v); }},
      {"rho", [](const ExperimentConfig& c) { return format_double(c.rho); },
       [](ExperimentConfig& c, const std::string& v) { c.rho = parse_double("rho", v); }},
      {"T", [](const ExperimentConfig& c) { return format_double(c.T); },
       [](ExperimentConfig& c, const std::string& v) { c.T = parse_double("T", v); }},
      {"samples", [](const ExperimentConfig& c) { return std::to_string(c.samples); },
       [](ExperimentConfig& c, const std::string& v) { c.samples = parse_number<int>("samples", v); }},
      {"replicas", [](const ExperimentConfig& c) { return std::to_string(c.replicas); },
       [](ExperimentConfig& c, const std::string& v) { c.replicas = parse_number<std::size_t>("replicas", v); }},
      {"seed", [](const ExperimentConfig& c) { return std::to_string(c.seed); },
       [](ExperimentConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); }},
      {"modes", [](const ExperimentConfig& c) { return join_ints(c.modes); },
       [](ExperimentConfig& c, const std::string& v) { c.modes = parse_ints("modes", v); }},
      {"kind", [](const ExperimentConfig& c) { return c.kind; },
       [](ExperimentConfig& c, const std::string& v) { c.kind = v; }},
      {"suite", [](const ExperimentConfig& c) { return c.suite; },
       [](ExperimentConfig& c, const std::string& v) { c.suite = v; }},
      {"verify", [](const ExperimentConfig& c) { return std::string(c.verify ? "true" : "false"); },
       [](ExperimentConfig& c, const std::string& v) {
         if (v != "true" && v != "false") throw ConfigError("bad value for verify: '" + v + "'");
         c.verify = v == "true";
       }},
  };
  return table;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  std::ostream& out_;
};

ModelParams model_params(const ExperimentConfig& cfg, int n) {
  const TorusGeometry g(cfg.dim, n);
  return cfg.rho < 0 ? ModelParams::stationary(cfg.lambda, g) : ModelParams::with_density(cfg.lambda, g, cfg.rho);
}

std::vector<int> bg_ns(const ExperimentConfig& cfg) {
  return cfg.ns.empty() ? std::vector<int>{32, 64, 128} : cfg.ns;
}

std::vector<std::string> conc_suites(const ExperimentConfig& cfg) {
  if (cfg.suite == "all") return {"subgaussian", "chisq", "bdiff", "tail", "holder"};
  return {cfg.suite};
}

// ---------------------------------------------------------------- flows

RunOutcome run_flows(const ExperimentConfig& cfg, std::ostream& out) {
  write_header(out, cfg, "flows/1");
  CsvWriter csv(out);
  csv.row("d", "ell", "cost", "g", "ratio", "divergence_exact");
  std::vector<CostRow> rows;
  for (long ell = cfg.lmin; ell <= cfg.lmax; ell *= 2) {
    rows.push_back(box_flow_cost_row(static_cast<int>(ell), cfg.dim, cfg.verify));
    const auto& r = rows.back();
    csv.row(r.dim, r.ell, r.cost, r.g, r.ratio, r.divergence_exact);
  }
  RunOutcome o;
  o.verdict = flow_scaling_verdict(rows, cfg.dim, cfg.verify);
  o.passed = o.verdict["passed"].get<bool>();
  return o;
}

// ---------------------------------------------------------------- exact

RunOutcome run_exact(const ExperimentConfig& cfg, std::ostream& out) {
  const auto p = model_params(cfg, cfg.n);
  const auto mu0 = DistributionVector::product(p.geometry, p.rho);
  YauOptions opts;
  opts.samples = cfg.samples;
  const auto rep = yau_bound_check(p, mu0, cfg.T, opts);

  write_header(out, cfg, "exact/1");
  CsvWriter csv(out);
  csv.row("t", "H", "dH_dt", "dH_dt_analytic", "adjoint_term", "dirichlet", "yau_rhs", "holds");
  for (const auto& s : rep.samples)
    csv.row(s.t, s.entropy, s.dHdt, s.dHdt_analytic, s.adjoint_term, s.dirichlet, s.rhs, s.holds);

  RunOutcome o;
  o.verdict = {{"yau_holds", rep.all_hold},
               {"sup_dH_dt", rep.sup_dHdt},
               {"max_relative_excess", rep.max_relative_excess},
               {"max_fd_error", rep.max_fd_error},
               {"final_entropy", rep.final_entropy},
               {"step", rep.step},
               {"rho", p.rho}};
  if (cfg.dim == 1 && cfg.n >= 3) o.verdict["adjoint_comparison"] = adjoint_comparison_json(cfg.lambda, cfg.n);
  o.passed = rep.all_hold;
  o.verdict["passed"] = o.passed;
  return o;
}

// ---------------------------------------------------------------- simulate

RunOutcome run_simulate(const ExperimentConfig& cfg, std::ostream& out) {
  const auto p = model_params(cfg, cfg.n);
  Rng init(cfg.seed, 0);
  const auto c0 = sample_product_measure(p.geometry, p.rho, init);
  KmcEngine eng(p, c0, Rng(cfg.seed, 1));
  std::vector<TestFunction> fs;
  if (cfg.dim == 1)
    for (int k : cfg.modes) fs.push_back(TestFunction::cosine_mode(k));

  write_header(out, cfg, "simulate/1");
  out << "t,density,events";
  for (int k : fs.empty() ? std::vector<int>{} : cfg.modes) out << ",X_cos" << k;
  out << '\n';
  std::size_t events = 0;
  Event e;
  const double sites = static_cast<double>(p.geometry.site_count());
  double density = 0;
  for (int j = 0; j <= cfg.samples; ++j) {
    const double t = cfg.T * j / cfg.samples;
    while (eng.step(t, e)) ++events;
    const auto c = eng.configuration();
    density = static_cast<double>(c.particle_count()) / sites;
    out << format_double(t) << ',' << format_double(density) << ',' << events;
    for (const auto& f : fs) out << ',' << format_double(field_value(c, f, p.rho));
    out << '\n';
  }
  if (!cfg.event_log.empty()) {
    std::ofstream log(cfg.event_log);
    if (!log) throw ConfigError("cannot open event log " + cfg.event_log);
    write_event_log(log, simulate_ctmc(p, c0, cfg.T, cfg.seed, 1));
  }
  RunOutcome o;
  o.passed = true;
  o.verdict = {{"events", events}, {"final_density", density}, {"rho", p.rho}, {"passed", true}};
  return o;
}

// ---------------------------------------------------------------- fluct

RunOutcome run_fluct_martingale(const ExperimentConfig& cfg, std::ostream& out) {
  const auto p = model_params(cfg, cfg.n);
  std::vector<TestFunction> fs;
  for (int k : cfg.modes) fs.push_back(TestFunction::cosine_mode(k));
  EnsembleSpec spec{.params = p,
                    .functions = fs,
                    .horizon = cfg.T,
                    .sample_dt = cfg.T / cfg.samples,
                    .burn_in = 0.0,
                    .replicas = cfg.replicas,
                    .seed = cfg.seed,
                    .full = true,
                    .threads = 0};
  const auto ens = run_field_ensemble(spec);

  write_header(out, cfg, "fluct-martingale/1");
  CsvWriter csv(out);
  csv.row("mode", "replicas", "max_residual", "m_mean", "m_se", "n_mean", "n_se", "qv_mean", "qv_se",
          "increment_slope", "increment_slope_se", "exclusion_rate", "exclusion_rate_se", "exclusion_riemann",
          "exclusion_relative_error", "reaction_rate", "reaction_rate_se", "reaction_product");
  RunOutcome o;
  o.passed = true;
  json modes = json::array();
  for (std::size_t i = 0; i < fs.size(); ++i) {
    std::vector<std::vector<FieldTrajectory>> slice(ens.size());
    for (std::size_t r = 0; r < ens.size(); ++r) slice[r] = {ens[r][i]};
    const auto m = martingale_report(slice);
    const auto q = qv_report(slice, p, fs[i]);
    csv.row(cfg.modes[i], m.replicas, m.max_residual, m.m_final.mean, m.m_final.se, m.n_final.mean, m.n_final.se,
            m.qv_final.mean, m.qv_final.se, m.increment_slope, m.increment_slope_se, q.exclusion_rate.mean,
            q.exclusion_rate.se, q.exclusion_riemann, q.exclusion_relative_error(), q.reaction_rate.mean,
            q.reaction_rate.se, q.reaction_product);
    const bool residual_ok = m.max_residual < 1e-9;
    const bool m_ok = std::abs(m.m_final.mean) < 4 * m.m_final.se;
    const bool n_ok = std::abs(m.n_final.mean) < 4 * m.n_final.se;
    const bool qv_ok = q.exclusion_relative_error() < 0.05;
    const bool ok = cfg.kind == "qv" ? qv_ok : residual_ok && m_ok && n_ok;
    o.passed = o.passed && ok;
    modes.push_back({{"mode", cfg.modes[i]},
                     {"max_residual", m.max_residual},
                     {"m_mean", m.m_final.mean},
                     {"m_se", m.m_final.se},
                     {"n_mean", m.n_final.mean},
                     {"n_se", m.n_final.se},
                     {"exclusion_relative_error", q.exclusion_relative_error()},
                     {"reaction_rate", q.reaction_rate.mean},
                     {"reaction_product", q.reaction_product},
                     {"passed", ok}});
  }
  o.verdict = {{"kind", cfg.kind}, {"modes", modes}, {"passed", o.passed}};
  return o;
}

RunOutcome run_fluct_ou(const ExperimentConfig& cfg, std::ostream& out) {
  const auto p = model_params(cfg, cfg.n);
  OuExperiment ex{.params = p, .modes = cfg.modes, .replicas = cfg.replicas, .horizon = cfg.T, .burn_in = 0.03,
                  .seed = cfg.seed, .threads = 0};
  const auto fits = run_ou_experiment(ex);
  write_header(out, cfg, "fluct-ou/1");
  CsvWriter csv(out);
  csv.row("mode", "theta", "se", "relative_se", "theta_guess", "candidate_1", "candidate_2", "candidate_3",
          "deviation_1", "deviation_2", "deviation_3", "lags", "replicas");
  RunOutcome o;
  o.passed = true;
  json modes = json::array();
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const auto& f = fits[i];
    csv.row(f.k, f.theta, f.se, f.se / f.theta, f.theta_guess, f.candidates[0], f.candidates[1], f.candidates[2],
            f.deviation(0), f.deviation(1), f.deviation(2), f.lags, f.replicas);
    const bool ok = f.theta > 0 && f.se < 0.15 * f.theta && (i == 0 || f.theta > fits[i - 1].theta);
    o.passed = o.passed && ok;
    modes.push_back({{"mode", f.k},
                     {"theta", f.theta},
                     {"se", f.se},
                     {"candidates", f.candidates},
                     {"deviations", {f.deviation(0), f.deviation(1), f.deviation(2)}},
                     {"passed", ok}});
  }
  o.verdict = {{"kind", "ou"}, {"modes", modes}, {"passed", o.passed}};
  return o;
}

RunOutcome run_fluct_covariance(const ExperimentConfig& cfg, std::ostream& out) {
  const double rho = effective_density(cfg);
  write_header(out, cfg, "fluct-covariance/1");
  CsvWriter csv(out);
  csv.row("f", "g", "samples", "empirical", "se", "exact", "continuum", "z");
  RunOutcome o;
  o.passed = true;
  json pairs = json::array();
  std::uint64_t stream = 0;
  for (std::size_t i = 0; i < cfg.modes.size(); ++i) {
    for (std::size_t j = i; j < cfg.modes.size(); ++j) {
      const auto r = initial_covariance_test(TestFunction::cosine_mode(cfg.modes[i]),
                                             TestFunction::cosine_mode(cfg.modes[j]), rho, cfg.n, cfg.replicas,
                                             cfg.seed + 1000003 * stream++);
      csv.row(cfg.modes[i], cfg.modes[j], r.samples, r.empirical, r.se, r.exact, r.continuum, r.z());
      const bool ok = std::abs(r.z()) < 3.0;
      o.passed = o.passed && ok;
      pairs.push_back({{"f", cfg.modes[i]}, {"g", cfg.modes[j]}, {"z", r.z()}, {"passed", ok}});
    }
  }
  o.verdict = {{"kind", "covariance"}, {"pairs", pairs}, {"passed", o.passed}};
  return o;
}

RunOutcome run_fluct_local(const ExperimentConfig& cfg, std::ostream& out) {
  TimeAverageExperiment ex;
  ex.lambda = cfg.lambda;
  if (!cfg.ns.empty()) ex.ns = cfg.ns;
  ex.weight = TestFunction::cosine_mode(cfg.modes.front());
  ex.horizon = cfg.T;
  ex.replicas = cfg.replicas;
  ex.seed = cfg.seed;
  const auto r = time_average_local_check(ex);
  write_header(out, cfg, "fluct-local/1");
  CsvWriter csv(out);
  csv.row("n", "mean_abs", "se");
  for (const auto& pt : r.points) csv.row(pt.n, pt.abs_value.mean, pt.abs_value.se);
  RunOutcome o;
  o.passed = r.loglog.slope < 0;
  o.verdict = {{"kind", "local"},
               {"centering", r.centering},
               {"loglog_slope", r.loglog.slope},
               {"loglog_slope_se", r.loglog.slope_se},
               {"passed", o.passed}};
  return o;
}

RunOutcome run_fluct(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.kind == "ou") return run_fluct_ou(cfg, out);
  if (cfg.kind == "covariance") return run_fluct_covariance(cfg, out);
  if (cfg.kind == "local") return run_fluct_local(cfg, out);
  return run_fluct_martingale(cfg, out);
}

// ---------------------------------------------------------------- bg

RunOutcome run_bg(const ExperimentConfig& cfg, std::ostream& out) {
  BgExperiment ex;
  ex.lambda = cfg.lambda;
  ex.ns = bg_ns(cfg);
  ex.phi = TestFunction::cosine_mode(cfg.modes.front());
  ex.horizon = cfg.T;
  ex.replicas = cfg.replicas;
  ex.seed = cfg.seed;
  ex.rho = cfg.rho;
  const auto r = run_bg_experiment(ex);
  write_header(out, cfg, "bg/1");
  CsvWriter csv(out);
  csv.row("n", "mean", "mean_se", "second_moment", "second_moment_se");
  json points = json::array();
  for (const auto& pt : r.points) {
    csv.row(pt.n, pt.mean.mean, pt.mean.se, pt.second_moment.mean, pt.second_moment.se);
    points.push_back({{"n", pt.n}, {"second_moment", pt.second_moment.mean}, {"se", pt.second_moment.se}});
  }
  RunOutcome o;
  o.passed = r.strictly_decreasing && r.separated;
  o.verdict = {{"points", points},
               {"strictly_decreasing", r.strictly_decreasing},
               {"separated", r.separated},
               {"loglog_slope", r.loglog.slope},
               {"loglog_slope_se", r.loglog.slope_se},
               {"passed", o.passed}};
  return o;
}

// ---------------------------------------------------------------- conc

RunOutcome run_conc(const ExperimentConfig& cfg, std::ostream& out) {
  std::vector<SuiteResult> results;
  for (const auto& name : conc_suites(cfg)) {
    if (name == "replacement" && (!cfg.ns.empty() || !cfg.ells.empty())) {
      const std::vector<int> ns = cfg.ns.empty() ? std::vector<int>{6, 8, 10, 12, 14, 16} : cfg.ns;
      const std::vector<int> ells = cfg.ells.empty() ? std::vector<int>{1, 2, 3, 4} : cfg.ells;
      results.push_back(replacement_suite(ns, ells, effective_density(cfg)));
    } else {
      results.push_back(run_concentration_suite(name));
    }
  }
  write_header(out, cfg, "conc/1");
  CsvWriter csv(out);
  csv.row("suite", "check", "lhs", "rhs", "margin", "passed");
  RunOutcome o;
  o.passed = true;
  json suites = json::object();
  for (const auto& r : results) {
    for (const auto& c : r.checks) csv.row(r.name, c.name, c.lhs, c.rhs, c.margin(), c.passed);
    json reported = json::object();
    for (const auto& [k, v] : r.reported) reported[k] = v;
    suites[r.name] = {{"checks", r.checks.size()},
                      {"violations", r.violations()},
                      {"worst_margin", r.worst_margin()},
                      {"passed", r.passed()},
                      {"reported", reported}};
    o.passed = o.passed && r.passed();
  }
  o.verdict = {{"suites", suites}, {"passed", o.passed}};
  return o;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.name, f.get(cfg));
  return out;
}

void write_header(std::ostream& out, const ExperimentConfig& cfg, const std::string& schema) {
  out << "# artifact_version = " << kArtifactVersion << '\n';
  out << "# schema = " << schema << '\n';
  for (const auto& [k, v] : config_entries(cfg)) out << "# " << k << " = " << v << '\n';
}

ExperimentConfig parse_header(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  bool any = false;
  while (in.peek() == '#' && std::getline(in, line)) {
    const auto body = trim(line.substr(1));
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("malformed header line: '" + line + "'");
    const auto key = trim(body.substr(0, eq)), value = trim(body.substr(eq + 1));
    if (key == "artifact_version" || key == "schema") continue;
    const auto& table = fields();
    auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return key == f.name; });
    if (it == table.end()) throw ConfigError("unknown header key: " + key);
    it->set(cfg, value);
    any = true;
  }
  if (!any) throw ConfigError("no config header found");
  return cfg;
}

double effective_density(const ExperimentConfig& cfg) {
  return cfg.rho < 0 ? stationary_density(cfg.lambda, cfg.dim) : cfg.rho;
}

void validate(const ExperimentConfig& cfg) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(std::find(kSubcommands.begin(), kSubcommands.end(), cfg.subcommand) != kSubcommands.end(),
          "unknown subcommand '" + cfg.subcommand + "'");
  require(std::isfinite(cfg.lambda) && cfg.lambda >= 0, "lambda must be finite and >= 0");
  require(cfg.dim >= 1 && cfg.dim <= 3, "dim must be 1, 2 or 3");
  require(cfg.n >= 2, "n must be >= 2");
  require(cfg.rho < 0 || (cfg.rho > 0 && cfg.rho < 1), "rho must lie in (0,1) (negative: stationary root)");
  require(std::isfinite(cfg.T) && cfg.T > 0, "T must be positive");
  require(cfg.samples >= 1, "samples must be >= 1");
  require(cfg.replicas >= 1, "replicas must be >= 1");
  require(!cfg.modes.empty(), "modes must be nonempty");
  for (int k : cfg.modes) require(k >= 1, "modes must be >= 1");
  for (int n : cfg.ns) require(n >= 3, "every n in the grid must be >= 3");

  const auto& s = cfg.subcommand;
  if (s == "flows") {
    require(cfg.lmin >= 2, "lmin must be >= 2");
    require(cfg.lmax >= cfg.lmin, "lmax must be >= lmin");
    const long cap = cfg.dim == 1 ? 1 << 20 : cfg.dim == 2 ? 1024 : 128;
    require(cfg.lmax <= cap, "lmax too large for dim " + std::to_string(cfg.dim));
  } else if (s == "exact") {
    require(std::pow(cfg.n, cfg.dim) <= 20, "exact engine needs n^d <= 20");
  } else if (s == "fluct") {
    require(std::find(kFluctKinds.begin(), kFluctKinds.end(), cfg.kind) != kFluctKinds.end(),
            "unknown fluct kind '" + cfg.kind + "'");
    require(cfg.dim == 1, "fluct is one dimensional");
    require(cfg.n >= 3, "fluct needs n >= 3");
    if (cfg.kind == "martingale" || cfg.kind == "qv") {
      require(cfg.samples % 2 == 0, "martingale suite needs an even sample count");
      require(cfg.replicas >= 3, "martingale suite needs >= 3 replicas");
    }
    if (cfg.kind == "ou") require(cfg.replicas >= 20, "OU fit needs >= 20 replicas");
    if (cfg.kind == "covariance") require(cfg.replicas >= 2, "covariance needs >= 2 samples");
  } else if (s == "bg") {
    require(cfg.dim == 1, "bg is one dimensional");
    require(cfg.replicas >= 2, "bg needs >= 2 replicas");
    require(bg_ns(cfg).size() >= 2, "bg needs at least two n values");
  } else if (s == "conc") {
    const auto& names = concentration_suites();
    require(cfg.suite == "all" || std::find(names.begin(), names.end(), cfg.suite) != names.end(),
            "unknown concentration suite '" + cfg.suite + "'");
    for (int n : cfg.ns) require(n <= 16, "replacement suite needs n <= 16");
    for (int ell : cfg.ells) {
      require(ell >= 1, "box sizes must be >= 1");
      for (int n : cfg.ns.empty() ? std::vector<int>{6, 8, 10, 12, 14, 16} : cfg.ns) {
        require(ell <= n - 1, "box size " + std::to_string(ell) + " must be < n = " + std::to_string(n));
        require(replacement_box_admissible(ell, n, 1),
                "box size " + std::to_string(ell) + " violates l^d |phi^l|^2 <= n^2 at n = " + std::to_string(n));
      }
    }
  }
  if (s != "flows" && s != "conc") model_params(cfg, cfg.n).validate();
}

RunOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& csv) {
  validate(cfg);
  const auto& s = cfg.subcommand;
  if (s == "flows") return run_flows(cfg, csv);
  if (s == "exact") return run_exact(cfg, csv);
  if (s == "simulate") return run_simulate(cfg, csv);
  if (s == "fluct") return run_fluct(cfg, csv);
  if (s == "bg") return run_bg(cfg, csv);
  return run_conc(cfg, csv);
}

json flow_scaling_verdict(const std::vector<CostRow>& rows, int dim, bool audited) {
  json v;
  bool div_ok = true;
  for (const auto& r : rows) div_ok = div_ok && (!audited || r.divergence_exact);
  v["divergence_audited"] = audited;
  v["divergence_exact"] = audited && div_ok;

  bool applicable = false, ok = true;
  if (dim == 1) {
    double worst = 0;
    for (const auto& r : rows) {
      if (r.ell < 64) continue;
      applicable = true;
      worst = std::max(worst, std::abs(r.cost / r.ell - 1.0 / 3.0) * 3.0);
    }
    v["max_relative_deviation_from_one_third"] = worst;
    ok = worst < 0.05;
  } else if (dim == 2) {
    double lo = INFINITY, hi = 0;
    std::size_t count = 0;
    for (const auto& r : rows) {
      if (r.ell < 16) continue;
      ++count;
      lo = std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
    }
    applicable = count >= 2;
    const double spread = applicable ? (hi - lo) / lo : 0.0;
    v["ratio_spread"] = spread;
    ok = spread < 0.25;
  } else {
    const CostRow* base = nullptr;
    for (const auto& r : rows)
      if (r.ell == 16) base = &r;
    applicable = base != nullptr && rows.back().ell > 16;
    const double growth = applicable ? rows.back().cost / base->cost - 1.0 : 0.0;
    v["cost_growth_from_16"] = growth;
    ok = growth < 0.10;
  }
  v["scaling_applicable"] = applicable;
  v["scaling_ok"] = !applicable || ok;
  v["passed"] = (!audited || div_ok) && (!applicable || ok);
  return v;
}

json adjoint_comparison_json(double lambda, int n) {
  const auto c = compare_adjoint_forms(ModelParams::stationary(lambda, TorusGeometry(1, n)));
  json shapes = json::array();
  for (const auto& s : c.shapes)
    shapes.push_back(
        {{"offsets", s.offsets}, {"coefficient", s.coefficient}, {"predicted", s.predicted}, {"count", s.count}});
  return {{"n", c.n},
          {"lambda", c.lambda},
          {"rho", c.rho},
          {"summation_vs_transpose", c.summation_vs_transpose},
          {"polynomial_vs_exact", c.polynomial_vs_exact},
          {"max_constant", c.max_constant},
          {"max_degree_one", c.max_degree_one},
          {"mass", c.mass},
          {"outcome", c.polynomial_matches ? "match" : "corrected"},
          {"shapes", shapes}};
}

}  // namespace rdsim
