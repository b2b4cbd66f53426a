#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "rdsim/experiment.hpp"

using namespace rdsim;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("rdsim_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result run(const std::string& args, const std::string& env = "") {
  const char* cli = std::getenv("RDSIM_CLI");
  REQUIRE_MESSAGE(cli != nullptr, "RDSIM_CLI must point at the rdsim binary");
  const auto out = scratch() / "stdout", err = scratch() / "stderr";
  const std::string cmd = env + " '" + std::string(cli) + "' " + args + " > '" + out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// CSV body without the '#' header block
std::string body(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') out += line + "\n";
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> v;
  std::string line;
  while (std::getline(in, line)) v.push_back(line);
  return v;
}

}  // namespace

TEST_CASE("format and header round trip") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);

  ExperimentConfig cfg;
  cfg.subcommand = "bg";
  cfg.lambda = 1.0 / 3.0;
  cfg.ns = {32, 64};
  cfg.rho = 0.123456789012345678;
  cfg.T = 0.1;
  cfg.replicas = 17;
  cfg.seed = 18446744073709551615ull;
  cfg.modes = {1, 3};
  cfg.verify = false;
  std::stringstream ss;
  write_header(ss, cfg, "bg/1");
  ss << "n,mean\n";
  const auto back = parse_header(ss);
  CHECK(back == cfg);
  std::string rest;
  std::getline(ss, rest);
  CHECK(rest == "n,mean");

  std::stringstream bad("# nonsense = 1\n");
  CHECK_THROWS_AS(parse_header(bad), ConfigError);
  std::stringstream none("n,mean\n");
  CHECK_THROWS_AS(parse_header(none), ConfigError);
  std::stringstream malformed("# lambda = x\n");
  CHECK_THROWS_AS(parse_header(malformed), ConfigError);
}

TEST_CASE("validation") {
  ExperimentConfig cfg;
  cfg.subcommand = "exact";
  CHECK_NOTHROW(validate(cfg));
  cfg.n = 5;
  cfg.dim = 2;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = {};
  cfg.subcommand = "fluct";
  cfg.samples = 3;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = {};
  cfg.subcommand = "conc";
  cfg.suite = "replacement";
  cfg.ns = {8};
  cfg.ells = {8};
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.ells = {3};
  CHECK_NOTHROW(validate(cfg));
  cfg = {};
  cfg.subcommand = "what";
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("flows output") {
  auto r = run("flows --dim 2 --lmax 256 --verify false");
  REQUIRE(r.code == 0);
  const auto rows = lines(body(r.out));
  REQUIRE(rows.size() == 9);
  CHECK(rows[0] == "d,ell,cost,g,ratio,divergence_exact");
  CHECK(rows[8].rfind("2,256,", 0) == 0);
  auto verdict = nlohmann::json::parse(r.err);
  CHECK(verdict["scaling_ok"].get<bool>());
  CHECK(verdict["subcommand"] == "flows");
  CHECK(verdict["artifact_version"] == kArtifactVersion);

  auto v = run("flows --dim 1 --lmin 2 --lmax 32");
  REQUIRE(v.code == 0);
  CHECK(nlohmann::json::parse(v.err)["divergence_exact"].get<bool>());
}

TEST_CASE("exact output") {
  auto r = run("exact --dim 1 --n 8 --lambda 1 --T 2");
  REQUIRE(r.code == 0);
  const auto rows = lines(body(r.out));
  REQUIRE(rows.size() == 52);
  CHECK(rows[0] == "t,H,dH_dt,dH_dt_analytic,adjoint_term,dirichlet,yau_rhs,holds");
  CHECK(rows[1].rfind("0,0,", 0) == 0);
  CHECK(rows[51].rfind("2,", 0) == 0);
  auto verdict = nlohmann::json::parse(r.err);
  CHECK(verdict["yau_holds"].get<bool>());
  CHECK(verdict["adjoint_comparison"]["outcome"] == "match");
  CHECK(verdict["adjoint_comparison"]["max_degree_one"].get<double>() < 1e-12);

  // 17 significant digits everywhere
  CHECK(rows[2].find("0.040000000000000001") == 0);
}

TEST_CASE("determinism") {
  const std::string args = "simulate --n 32 --T 0.2 --samples 10 --seed 5 --modes 1,2";
  auto a = run(args), b = run(args);
  REQUIRE(a.code == 0);
  CHECK(body(a.out) == body(b.out));
  CHECK(a.out == b.out);
  auto c = run("simulate --n 32 --T 0.2 --samples 10 --seed 6 --modes 1,2");
  CHECK(body(c.out) != body(a.out));

  // thread count does not change replicated outputs
  const std::string fl = "fluct --kind martingale --n 16 --T 0.1 --samples 4 --replicas 40 --seed 3";
  auto one = run(fl, "RDSIM_THREADS=1"), three = run(fl, "RDSIM_THREADS=3");
  REQUIRE(one.code == 0);
  CHECK(one.out == three.out);
  const std::string bgargs = "bg --ns 8,12 --T 0.05 --replicas 30 --seed 2";
  auto b1 = run(bgargs, "RDSIM_THREADS=1"), b4 = run(bgargs, "RDSIM_THREADS=4");
  CHECK(b1.out == b4.out);
}

TEST_CASE("config echo round trips through the command line") {
  auto r = run("simulate --n 24 --lambda 0.7 --T 0.15 --samples 6 --seed 11 --modes 2");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  const auto cfg = parse_header(in);
  CHECK(cfg.subcommand == "simulate");
  CHECK(cfg.n == 24);
  CHECK(cfg.lambda == 0.7);
  CHECK(cfg.seed == 11);
  CHECK(cfg.modes == std::vector<int>{2});

  // the header with its '#' stripped is a config file reproducing the run
  std::ofstream ini(scratch() / "echo.ini");
  ini << "[simulate]\n";
  for (const auto& [k, v] : config_entries(cfg))
    if (k != "subcommand" && !v.empty()) ini << k << " = " << v << "\n";
  ini.close();
  auto again = run("--config '" + (scratch() / "echo.ini").string() + "' simulate");
  REQUIRE(again.code == 0);
  CHECK(again.out == r.out);

  // flags win over the config file
  auto over = run("--config '" + (scratch() / "echo.ini").string() + "' simulate --seed 12");
  std::istringstream oin(over.out);
  CHECK(parse_header(oin).seed == 12);
}

TEST_CASE("output files") {
  const auto csv = scratch() / "out.csv", js = scratch() / "verdict.json";
  auto r = run("conc --suite tail --out '" + csv.string() + "' --json '" + js.string() + "'");
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  CHECK(r.err.empty());
  const auto verdict = nlohmann::json::parse(slurp(js));
  CHECK(verdict["suites"]["tail"]["violations"] == 0);
  CHECK(verdict["passed"].get<bool>());
  CHECK(lines(body(slurp(csv)))[0] == "suite,check,lhs,rhs,margin,passed");
}

TEST_CASE("exit codes and error JSON") {
  auto bad = run("exact --n 40");
  CHECK(bad.code == kExitConfig);
  auto e = nlohmann::json::parse(bad.err);
  CHECK(e["kind"] == "config");
  CHECK(!e["error"].get<std::string>().empty());

  CHECK(run("").code == kExitConfig);
  CHECK(run("nosuch").code == kExitConfig);
  CHECK(run("exact --n abc").code == kExitConfig);
  CHECK(run("fluct --kind bogus").code == kExitConfig);
  CHECK(run("conc --suite replacement --ns 8 --ells 9").code == kExitConfig);
  CHECK(run("exact --rho 1.5").code == kExitConfig);

  // an assertion suite that fails: the exclusion QV rate is far from its
  // continuum value on a 4-site torus
  auto fail = run("fluct --kind qv --n 4 --T 0.1 --samples 2 --replicas 20");
  CHECK(fail.code == kExitAssertion);
  CHECK_FALSE(nlohmann::json::parse(fail.err)["passed"].get<bool>());

  CHECK(run("--help").code == 0);
}
