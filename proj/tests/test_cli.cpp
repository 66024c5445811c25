#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace {

const std::string kCli = TSSP_CLI_PATH;
const std::string kData = TSSP_TEST_DATA;

struct Run {
  int status = -1;
  std::string out;
};

// Runs the CLI through the shell; stderr is folded into the captured output
// only when asked, so JSON parsing sees stdout alone.
Run run(const std::string& args, bool with_stderr = false) {
  const std::string cmd = kCli + " " + args + (with_stderr ? " 2>&1" : " 2>/dev/null");
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tssp_cli_" + name);
}

double num(const nlohmann::json& j) { return std::stod(j.get<std::string>()); }

const std::string kNormalPlan = "plan --aql 0.02 --rql 0.05 --method normal";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("normal specification in JSON") {
  const Run r = run(kNormalPlan + " --format json");
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(num(j["risks"]["alpha2"]) == doctest::Approx(0.0722).epsilon(5e-3));
  CHECK(num(j["risks"]["beta"]) == doctest::Approx(0.00216494845360825).epsilon(1e-10));
  CHECK(num(j["stage1"]["n"]) == 85.0);
  CHECK(num(j["stage1"]["c"]) == doctest::Approx(17.0497152625527).epsilon(1e-12));
  CHECK(num(j["stage2"]["n"]) == 24.0);
  CHECK(j["stage2"]["within_tolerance"] == false);
  CHECK(j["inputs"]["aql"] == "0.02");
}

TEST_CASE("text report") {
  const Run r = run(kNormalPlan);
  REQUIRE(r.status == 0);
  CHECK(r.out.find("n1 = 85") != std::string::npos);
  CHECK(r.out.find("n2 = 24") != std::string::npos);
  CHECK(r.out.find("best effort") != std::string::npos);
}

TEST_CASE("JSON output replays through --config") {
  const Run first = run(kNormalPlan + " --alpha1 0.04 --format json");
  REQUIRE(first.status == 0);
  const auto path = temp_path("replay.json");
  std::ofstream(path) << first.out;
  const Run second = run("plan --config " + path.string() + " --format json");
  std::filesystem::remove(path);
  REQUIRE(second.status == 0);
  const auto a = nlohmann::json::parse(first.out), b = nlohmann::json::parse(second.out);
  CHECK(a["stage1"] == b["stage1"]);
  CHECK(a["stage2"] == b["stage2"]);
  CHECK(a["risks"] == b["risks"]);
}

TEST_CASE("key = value configuration, overridden by the command line") {
  const auto path = temp_path("spec.conf");
  std::ofstream(path) << "# spec\naql = 0.02\nrql = 0.05\nmethod = normal\nalpha1 = 0.07\n";
  const Run r = run("plan --config " + path.string() + " --format json");
  const Run o = run("plan --config " + path.string() + " --alpha1 0.03 --format json");
  std::filesystem::remove(path);
  REQUIRE(r.status == 0);
  REQUIRE(o.status == 0);
  CHECK(num(nlohmann::json::parse(r.out)["stage1"]["n"]) == 53.0);
  CHECK(num(nlohmann::json::parse(o.out)["stage1"]["n"]) == 85.0);
}

TEST_CASE("exit codes") {
  CHECK(run("plan --aql 0.05 --rql 0.02 --method normal").status == 2);
  CHECK(run("plan --aql 0.02").status == 2);
  CHECK(run("plan --aql 0.02 --rql 0.05 --method gps").status == 2);
  CHECK(run("plan --aql 0.02 --rql 0.05 --alpha1 0.2").status == 2);
  CHECK(run("plan --aql 0.02 --rql 0.05 --method normal --rho 1.5").status == 2);
  CHECK(run("simulate --aql 0.02 --rql 0.05 --model 7 --reps 2 --seed 1").status == 2);
  CHECK(run("simulate --aql 0.02 --rql 0.05 --reps 0 --seed 1").status == 2);
  CHECK(run("estimate --data " + kData + "/line.csv --probs 0").status == 2);

  const Run missing = run("plan --aql 0.02 --rql 0.05 --data /nonexistent/line.csv", true);
  CHECK(missing.status == 2);
  CHECK(missing.out.find("/nonexistent/line.csv") != std::string::npos);

  const auto conf = temp_path("bad.conf");
  std::ofstream(conf) << "aql = 0.02\nrql = 0.05\nbogus_key = 1\n";
  const Run bad = run("plan --config " + conf.string(), true);
  std::filesystem::remove(conf);
  CHECK(bad.status == 2);
  CHECK(bad.out.find("bogus") != std::string::npos);

  // 20 values: the 0.02 and 0.05 empirical quantiles are the same order statistic.
  const auto flat = temp_path("flat.csv");
  {
    std::ofstream f(flat);
    for (int i = 0; i < 20; ++i) f << 100 + i << '\n';
  }
  const Run sep = run("plan --aql 0.02 --rql 0.05 --method empirical --data " + flat.string(), true);
  std::filesystem::remove(flat);
  CHECK(sep.status == 3);
  CHECK(sep.out.find("zero-separation") != std::string::npos);
}

TEST_CASE("seed policy") {
  const std::string args = "simulate --aql 0.02 --rql 0.05 --method exact --reps 2";
  CHECK(run(args).status == 0);
  CHECK(std::system(("TSSP_REQUIRE_SEED=1 " + kCli + " " + args + " >/dev/null 2>&1").c_str()) != 0);
  CHECK(run(args + " --seed 4").status == 0);
}

TEST_CASE("simulation output is deterministic for a seed") {
  const std::string args =
      "simulate --aql 0.02 --rql 0.05 --method empirical --m 60 --reps 4 --seed 12 --threads 2";
  const Run a = run(args), b = run(args);
  REQUIRE(a.status == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("alpha1,alpha2,m,type,E_n1,sd_n1,c1,sd_c1,E_n2,sd_n2,c2,sd_c2", 0) == 0);
  const Run c = run("simulate --aql 0.02 --rql 0.05 --method empirical --m 60 --reps 4 --seed 13");
  CHECK(a.out != c.out);
}

TEST_CASE("OC table") {
  const Run r = run("oc --aql 0.02 --rql 0.05 --method normal --n1 85 --c1 17.05 --n2 30 --c2 26 "
                    "--grid 5 --p-lo 0.02 --p-hi 0.06 --format text");
  REQUIRE(r.status == 0);
  CHECK(r.out.rfind("p,oc1,oc2,overall\n", 0) == 0);
  CHECK(r.out.find("\n0.02,") != std::string::npos);
  CHECK(run("oc --aql 0.02 --rql 0.05 --method normal --n1 85").status == 2);
}

TEST_CASE("estimate command") {
  const Run r = run("estimate --data " + kData + "/line.csv --method empirical --probs 0.02,0.5");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("# mean=219.891") != std::string::npos);
  CHECK(r.out.find("0.02,216.204") != std::string::npos);
  CHECK(r.out.find("0.5,219.929") != std::string::npos);
}

}
