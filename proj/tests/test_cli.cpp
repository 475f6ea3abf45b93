#include "gstoep/bench/io.hpp"
#include "gstoep/processes.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace gstoep;

namespace {

const std::filesystem::path kDir = std::filesystem::temp_directory_path() / "gstoep_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(GSTOEP_CLI) + " " + args + " >" + (kDir / "stdout.txt").string() + " 2>" +
                          (kDir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string write_samples(const std::string& name, const MatR& x) {
  const auto p = kDir / name;
  std::ofstream out(p);
  out << "# generated\n";
  bench::write_samples_csv(out, x);
  return p.string();
}

}  // namespace

TEST_CASE("command-line tool") {
  std::filesystem::create_directories(kDir);
  const std::string white = write_samples("white.csv", sample(ProcessSpec::ar(VecR(0), 1.0, 12), 256, 3));

  CHECK(run("list-estimators") == 0);
  CHECK(slurp(kDir / "stdout.txt").find("pgd") != std::string::npos);

  SUBCASE("estimate") {
    const auto out = (kDir / "r.json").string();
    REQUIRE(run("estimate --input " + white + " --estimator pls --out " + out) == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["order"] == 0);
    CHECK(j["estimator"] == "pls");
    CHECK(run("estimate --input " + white + " --estimator pgd --order 2 --icm") == 0);
    const auto k = nlohmann::json::parse(slurp(kDir / "stdout.txt"));
    CHECK(k["order"] == 2);
    CHECK(k["icm"].size() == 12);
    CHECK(run("estimate --input " + white + " --estimator band --order 3") == 0);
  }
  SUBCASE("usage and parse errors exit 1") {
    CHECK(run("estimate --input " + white + " --estimator band --icm") == 1);
    CHECK(slurp(kDir / "stderr.txt").find("positive definite") != std::string::npos);
    CHECK(run("estimate --input " + white + " --estimator nope") == 1);
    CHECK(run("estimate --input " + white + " --estimator pgd --order x") == 1);
    CHECK(run("estimate --input " + white + " --estimator pgd --order 12") == 1);
    CHECK(run("estimate --input /nonexistent.csv --estimator pgd") == 1);
    std::ofstream(kDir / "bad.csv") << "1,2,3\n4,5\n";
    CHECK(run("estimate --input " + (kDir / "bad.csv").string() + " --estimator scm") == 1);
    CHECK(slurp(kDir / "stderr.txt").find("line 2") != std::string::npos);
    CHECK(run("frobnicate") == 1);
    CHECK(run("") == 1);
    std::ofstream(kDir / "bad.toml") << "runs = 2\n[proces]\n";
    CHECK(run("benchmark --config " + (kDir / "bad.toml").string()) == 1);
    CHECK(slurp(kDir / "stderr.txt").find("line 2") != std::string::npos);
  }
  SUBCASE("numerical failure exits 2") {
    // constant samples give a singular SCM; circ's estimate is then not PD
    MatR x = MatR::Zero(4, 6);
    CHECK(run("estimate --input " + write_samples("zero.csv", x) + " --estimator circ --icm") == 2);
  }
  SUBCASE("benchmark and timing") {
    std::ofstream(kDir / "exp.toml") << "runs = 2\nseed = 4\n[process]\nkind = \"ma\"\nsigma2 = 1.0\nb = [0.5]\n"
                                        "[grid]\ndims = [8]\nsamples = [8]\n[estimators]\nnames = [\"band\", \"pgd\"]\n"
                                        "[timing]\ndims = [16, 32]\nmin_ms = 1\ndatasets = 1\n"
                                        "estimators = [\"band\", \"pls\"]\n";
    const auto out = kDir / "bench";
    REQUIRE(run("benchmark --config " + (kDir / "exp.toml").string() + " --runs 3 --seed 9 --svg --out " + out.string()) == 0);
    CHECK(std::filesystem::exists(out / "results.csv"));
    CHECK(std::filesystem::exists(out / "nmse_c_P8_N8.svg"));
    const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
    CHECK(summary["runs"] == 3);
    CHECK(summary["seed"] == 9);
    REQUIRE(run("timing --config " + (kDir / "exp.toml").string() + " --out " + (kDir / "timing").string()) == 0);
    CHECK(slurp(kDir / "timing" / "timing.csv").find("pls,32,") != std::string::npos);
  }
}
