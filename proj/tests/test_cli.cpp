// End-to-end tests of the command line tool: exit codes, artifacts, and
// byte-level determinism.
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef LOGOPT_CLI_PATH
#define LOGOPT_CLI_PATH "logopt"
#endif
#ifndef LOGOPT_FIXTURE_DIR
#define LOGOPT_FIXTURE_DIR "fixtures"
#endif

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const std::string out_file =
      (fs::temp_directory_path() / ("logopt_cli_out_" +
                                    std::to_string(::getpid()) + ".txt"))
          .string();
  const std::string cmd =
      std::string(LOGOPT_CLI_PATH) + " " + args + " > " + out_file + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  std::remove(out_file.c_str());
  return r;
}

std::string fixture(const std::string& name) {
  return std::string(LOGOPT_FIXTURE_DIR) + "/" + name + ".json";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("logopt_test_" + std::to_string(::rand()) + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("solve on the quadratic fixture prints the closed form") {
  const RunResult r = run_cli("solve --model " + fixture("merton"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("phi = (2") != std::string::npos);
  CHECK(r.output.find("optimal expected log wealth = 0.080000000") !=
        std::string::npos);
}

TEST_CASE("solve on the free-lunch fixture exits 3 with the witness") {
  const RunResult r = run_cli("solve --model " + fixture("free_lunch"));
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("non-attainment") != std::string::npos);
  CHECK(r.output.find("witness direction y = (1") != std::string::npos);
}

TEST_CASE("validate rejects a zero atom with exit 2") {
  TempDir tmp;
  const fs::path bad = tmp.path / "bad.json";
  std::ofstream(bad) << R"({"dim":1,"horizon":1.0,"b":[0.0],"c":[[0.0]],
                            "atoms":[{"x":[0.0],"w":1.0}]})";
  const RunResult r = run_cli("validate --model " + bad.string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("F({0})=0") != std::string::npos);
}

TEST_CASE("malformed json reports line and column with exit 2") {
  TempDir tmp;
  const fs::path bad = tmp.path / "broken.json";
  std::ofstream(bad) << "{\n  \"dim\": 1,\n  \"horizon\": oops\n}\n";
  const RunResult r = run_cli("validate --model " + bad.string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("broken.json:3") != std::string::npos);
}

TEST_CASE("eval matches the solved objective") {
  const RunResult r =
      run_cli("eval --model " + fixture("merton") + " --lambda 2.0 --format table");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("value") != std::string::npos);
  CHECK(r.output.find("-0.080000000000000") != std::string::npos);
}

TEST_CASE("analyze-recession reports the witness on free lunch") {
  const RunResult r = run_cli("analyze-recession --model " + fixture("free_lunch"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("attained = no") != std::string::npos);
  CHECK(r.output.find("-0.5") != std::string::npos);
}

TEST_CASE("simulate writes atomic artifacts and is byte deterministic") {
  TempDir run1, run2, run3;
  const std::string base = "simulate --model " + fixture("two_atom") +
                           " --paths 2000 --steps 50 --seed 7 --format table";
  const RunResult a = run_cli(base + " --workers 1 --out " + run1.path.string());
  const RunResult b = run_cli(base + " --workers 4 --out " + run2.path.string());
  const RunResult c = run_cli(base + " --workers 2 --out " + run3.path.string());
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  REQUIRE(c.exit_code == 0);
  CHECK(a.output == b.output);
  CHECK(a.output == c.output);
  const std::string csv1 = slurp(run1.path / "simulate.csv");
  CHECK(!csv1.empty());
  CHECK(csv1 == slurp(run2.path / "simulate.csv"));
  CHECK(csv1 == slurp(run3.path / "simulate.csv"));
  CHECK(csv1.find("mean_product") != std::string::npos);
  // no stray temp files left behind by the atomic writes
  for (const auto& entry : fs::directory_iterator(run1.path))
    CHECK(entry.path().extension() != ".tmp");
}

TEST_CASE("different seeds change the sample") {
  const std::string base = "simulate --model " + fixture("merton") +
                           " --paths 500 --steps 20 --format table --lambda 1.0";
  const RunResult a = run_cli(base + " --seed 1");
  const RunResult b = run_cli(base + " --seed 2");
  CHECK(a.exit_code == 0);
  CHECK(a.output != b.output);
}

TEST_CASE("env overrides supply defaults") {
  const RunResult r = run_cli("simulate --model " + fixture("merton") +
                              " --lambda 0.5 --paths 200 --steps 10 --format text");
  CHECK(r.exit_code == 0);
  // GE_SEED env replaces the default seed
  const std::string out_file =
      (fs::temp_directory_path() / "logopt_env_test.txt").string();
  const std::string cmd = std::string("GE_SEED=99 ") + LOGOPT_CLI_PATH +
                          " simulate --model " + fixture("merton") +
                          " --lambda 0.5 --paths 200 --steps 10 --format text > " +
                          out_file + " 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  const std::string env_out = slurp(out_file);
  std::remove(out_file.c_str());
  CHECK(env_out.find("seed = 99") != std::string::npos);
}

TEST_CASE("verify passes on the attained fixtures") {
  const RunResult r = run_cli("verify --model " + fixture("one_atom") +
                              " --paths 5000 --seed 42");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("verification PASS") != std::string::npos);
}

TEST_CASE("report renders a verdict end to end") {
  TempDir tmp;
  const RunResult r = run_cli("report --model " + fixture("merton") +
                              " --paths 5000 --seed 42 --out " + tmp.path.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("verdict: PASS") != std::string::npos);
  CHECK(r.output.find("optimal value 0.08") != std::string::npos);
  CHECK(fs::exists(tmp.path / "report.txt"));
  CHECK(fs::exists(tmp.path / "report_solve.csv"));

  const RunResult f = run_cli("report --model " + fixture("free_lunch"));
  CHECK(f.exit_code == 3);
  CHECK(f.output.find("NON-ATTAINMENT") != std::string::npos);

  const RunResult t = run_cli("report --model " + fixture("two_atom") +
                              " --paths 5000 --seed 42");
  CHECK(t.exit_code == 0);
  CHECK(t.output.find("verdict: PASS") != std::string::npos);
}

TEST_CASE("simulate --dump-paths writes the per-path table") {
  TempDir tmp;
  const RunResult r = run_cli("simulate --model " + fixture("one_atom") +
                              " --paths 50 --steps 20 --seed 3 --dump-paths --out " +
                              tmp.path.string());
  REQUIRE(r.exit_code == 0);
  const std::string dump = slurp(tmp.path / "paths.csv");
  CHECK(dump.find("path,t,wealth,deflator") != std::string::npos);
  // 50 paths x 21 grid points + header
  CHECK(std::count(dump.begin(), dump.end(), '\n') == 50 * 21 + 1);
}
