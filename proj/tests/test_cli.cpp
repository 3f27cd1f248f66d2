#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sac/cli.hpp"
#include "sac/ensemble.hpp"

using namespace sac;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh(const std::string& name) {
  auto p = fs::temp_directory_path() / ("sac_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> quick(const fs::path& dir) {
  return {"--set", "domain.n=15", "--set", "time.T=0.05", "--set", "time.stride=10",
          "--set", "ensemble.n_traj=3", "--set", "output.dir=" + dir.string()};
}

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("check-hypotheses exit codes") {
  CHECK(cli({"check-hypotheses"}).code == kExitOk);
  auto d3 = cli({"check-hypotheses", "--set", "domain.d=3", "--set", "domain.n=7", "--set", "noise.s0=6"});
  CHECK(d3.code == kExitDomain);
  json j = json::parse(d3.out);
  CHECK(j["all_passed"] == false);
  CHECK(cli({"check-hypotheses", "--set", "domain.bogus=1"}).code == kExitConfig);
  CHECK(cli({"check-hypotheses", "--config", "/nonexistent/cfg.json"}).code == kExitIo);
  CHECK(cli({"no-such-command"}).code == kExitConfig);
}

TEST_CASE("simulate without noise from zero gives delta 1 everywhere") {
  auto dir = fresh("sim");
  auto r = cli(cat({"simulate", "--set", "noise.sigma0=0", "--set", "init.kind=constant",
                    "--set", "init.amplitude=0"},
                   quick(dir)));
  REQUIRE(r.code == kExitOk);
  auto series = read_timeseries_csv((dir / "timeseries.csv").string());
  REQUIRE(series.size() == 1);
  for (const auto& s : series.at(0)) CHECK(s.delta == 1.0);
  fs::remove_all(dir);
}

TEST_CASE("ensemble artifacts are reproducible and certify passes") {
  auto a = fresh("ens_a"), b = fresh("ens_b");
  REQUIRE(cli(cat({"ensemble", "--workers", "2"}, quick(a))).code == kExitOk);
  REQUIRE(cli(cat({"ensemble", "--workers", "3"}, quick(b))).code == kExitOk);
  CHECK(slurp(a / "timeseries.csv") == slurp(b / "timeseries.csv"));
  json ja = json::parse(slurp(a / "report.json")), jb = json::parse(slurp(b / "report.json"));
  // output.dir differs between the two runs; everything else must agree
  ja["config"]["effective"]["output"] = jb["config"]["effective"]["output"];
  ja["config"]["fingerprint"] = jb["config"]["fingerprint"];
  CHECK(ja == jb);
  CHECK(ja["config"]["hypotheses_unverified"] == false);

  auto cert = cli({"certify", "--report", (a / "report.json").string()});
  CHECK(cert.code == kExitOk);
  CHECK(fs::exists(a / "certificate.json"));
  CHECK(cli({"certify", "--report", (a / "nope.json").string()}).code == kExitIo);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("--force watermarks runs with failed hypotheses") {
  auto dir = fresh("force");
  auto args = cat({"ensemble", "--set", "noise.s0=2"}, quick(dir));
  auto refused = cli(args);
  CHECK(refused.code == kExitDomain);
  CHECK_FALSE(fs::exists(dir / "report.json"));
  args.push_back("--force");
  REQUIRE(cli(args).code == kExitOk);
  json j = json::parse(slurp(dir / "report.json"));
  CHECK(j["config"]["hypotheses_unverified"] == true);
  fs::remove_all(dir);
}

TEST_CASE("converge requires a study section") {
  auto dir = fresh("conv");
  CHECK(cli(cat({"converge"}, quick(dir))).code == kExitConfig);
  auto r = cli(cat({"converge", "--set", "study.kind=grid_refine", "--set", "study.levels=[15,31,63]",
                    "--set", "time.dt=1e-4"},
                   quick(dir)));
  CHECK(r.code == kExitOk);
  CHECK(fs::exists(dir / "study.json"));
  fs::remove_all(dir);
}

TEST_CASE("installed binary runs") {
  const char* exe = std::getenv("SAC_CLI");
  if (!exe) return;
  std::string cmd = std::string("\"") + exe + "\" check-hypotheses > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  std::string bad = std::string("\"") + exe + "\" check-hypotheses --set noise.s0=6 --set domain.d=3 --set domain.n=5 > /dev/null";
  int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == kExitDomain);
}
