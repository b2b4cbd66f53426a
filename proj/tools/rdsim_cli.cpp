#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "rdsim/experiment.hpp"

using rdsim::ExperimentConfig;

namespace {

void emit_error(const std::string& kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", message}, {"kind", kind}}.dump() << '\n';
}

void add_model(CLI::App* sub, ExperimentConfig& c) {
  sub->add_option("--lambda", c.lambda, "Birth rate enhancement");
  sub->add_option("--dim", c.dim, "Torus dimension");
  sub->add_option("--n", c.n, "Torus side");
  sub->add_option("--rho", c.rho, "Reference density (negative: stationary root)");
}

void add_run(CLI::App* sub, ExperimentConfig& c) {
  sub->add_option("--T", c.T, "Time horizon");
  sub->add_option("--samples", c.samples, "Number of time samples");
  sub->add_option("--replicas", c.replicas, "Number of replicas");
  sub->add_option("--seed", c.seed, "Master seed");
  sub->add_option("--modes", c.modes, "Cosine modes")->delimiter(',');
}

void add_outputs(CLI::App* sub, ExperimentConfig& c) {
  sub->add_option("--out", c.out, "CSV output path (default stdout)");
  sub->add_option("--json", c.json, "Verdict JSON path (default stderr)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reaction-diffusion simulation and verification toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI config file with one [section] per subcommand; flags win");
  app.set_version_flag("--version", rdsim::kArtifactVersion);
  ExperimentConfig cfg;

  auto* flows = app.add_subcommand("flows", "Box flow costs and exact divergence audit");
  flows->add_option("--dim", cfg.dim, "Dimension");
  flows->add_option("--lmin", cfg.lmin, "Smallest box side");
  flows->add_option("--lmax", cfg.lmax, "Largest box side");
  flows->add_option("--verify", cfg.verify, "Audit divergences in rational arithmetic");

  auto* exact = app.add_subcommand("exact", "Master equation, entropy production and Yau inequality");
  add_model(exact, cfg);
  exact->add_option("--T", cfg.T, "Time horizon");
  exact->add_option("--samples", cfg.samples, "Number of time samples");

  auto* simulate = app.add_subcommand("simulate", "Single kinetic Monte Carlo path");
  add_model(simulate, cfg);
  add_run(simulate, cfg);
  simulate->add_option("--event-log", cfg.event_log, "Write the event log to this path");

  auto* fluct = app.add_subcommand("fluct", "Fluctuation field suites");
  add_model(fluct, cfg);
  add_run(fluct, cfg);
  fluct->add_option("--kind", cfg.kind, "martingale | qv | ou | covariance | local");
  fluct->add_option("--ns", cfg.ns, "n grid (local)")->delimiter(',');

  auto* bg = app.add_subcommand("bg", "Boltzmann-Gibbs decay of the time-integrated statistic");
  add_model(bg, cfg);
  add_run(bg, cfg);
  bg->add_option("--ns", cfg.ns, "n grid")->delimiter(',');

  auto* conc = app.add_subcommand("conc", "Exact concentration inequality suites");
  conc->add_option("--suite", cfg.suite, "subgaussian | chisq | bdiff | tail | holder | replacement | all");
  conc->add_option("--ns", cfg.ns, "n grid (replacement)")->delimiter(',');
  conc->add_option("--ells", cfg.ells, "box sizes (replacement)")->delimiter(',');
  conc->add_option("--lambda", cfg.lambda, "Birth rate enhancement (replacement density)");
  conc->add_option("--rho", cfg.rho, "Density (negative: stationary root)");

  for (auto* sub : {flows, exact, simulate, fluct, bg, conc}) add_outputs(sub, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("config", e.what());
    return rdsim::kExitConfig;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();

  try {
    rdsim::validate(cfg);
    std::ostringstream body;
    auto outcome = rdsim::run_experiment(cfg, body);
    if (cfg.out.empty()) {
      std::cout << body.str();
    } else {
      std::ofstream f(cfg.out);
      if (!f) throw rdsim::ConfigError("cannot open output " + cfg.out);
      f << body.str();
    }
    outcome.verdict["subcommand"] = cfg.subcommand;
    outcome.verdict["artifact_version"] = rdsim::kArtifactVersion;
    const auto verdict = outcome.verdict.dump(2);
    if (cfg.json.empty()) {
      std::cerr << verdict << '\n';
    } else {
      std::ofstream f(cfg.json);
      if (!f) throw rdsim::ConfigError("cannot open verdict output " + cfg.json);
      f << verdict << '\n';
    }
    return outcome.passed ? rdsim::kExitPass : rdsim::kExitAssertion;
  } catch (const rdsim::ConfigError& e) {
    emit_error("config", e.what());
    return rdsim::kExitConfig;
  } catch (const std::invalid_argument& e) {
    emit_error("config", e.what());
    return rdsim::kExitConfig;
  } catch (const std::exception& e) {
    emit_error("runtime", e.what());
    return rdsim::kExitAssertion;
  }
}
