// End-to-end exercises of the command line surface. The binary path comes
// from the ROBUSTFAIR_CLI environment variable set by ctest.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

std::string cli() {
  const char* path = std::getenv("ROBUSTFAIR_CLI");
  REQUIRE(path != nullptr);
  return path;
}

int run(const std::string& args, const fs::path& stdout_file = {}) {
  std::string cmd = "'" + cli() + "' " + args;
  if (!stdout_file.empty()) cmd += " > '" + stdout_file.string() + "' 2>&1";
  else cmd += " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "rf_cli_test";
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

}  // namespace

TEST_CASE("no subcommand is a usage error") {
  CHECK(run("") == 1);
  CHECK(run("--help") == 0);
}

TEST_CASE("gen-synth writes a loadable csv") {
  const fs::path dir = scratch();
  write(dir / "params.json", R"({"m": 40, "seed": 9, "shift": 0.05})");
  CHECK(run("gen-synth '" + (dir / "params.json").string() + "' '" +
            (dir / "synth.csv").string() + "'") == 0);
  const std::string csv = slurp(dir / "synth.csv");
  CHECK(csv.rfind("x1,x2,y,s\n", 0) == 0);

  CHECK(run("gen-synth '" + (dir / "missing.json").string() + "' '" +
            (dir / "x.csv").string() + "'") == 1);
  write(dir / "bad.json", R"({"m": 40, "bogus": 1})");
  CHECK(run("gen-synth '" + (dir / "bad.json").string() + "' '" +
            (dir / "x.csv").string() + "'") == 1);
}

TEST_CASE("audit prints the gap table") {
  const fs::path dir = scratch();
  write(dir / "preds.csv",
        "pred,label,sensitive\n1,1,0\n0,0,0\n1,0,1\n1,1,1\n0,1,0\n0,0,1\n");
  const fs::path out = dir / "audit.txt";
  CHECK(run("audit '" + (dir / "preds.csv").string() + "'", out) == 0);
  const std::string table = slurp(out);
  CHECK(table.find("Diff:") != std::string::npos);
  CHECK(table.find("Ind.") != std::string::npos);
  CHECK(table.find("Suff.") != std::string::npos);

  CHECK(run("audit '" + (dir / "nope.csv").string() + "'") == 1);

  // single-group audits are fine by default but fail in strict mode
  write(dir / "single.csv", "pred,label,sensitive\n1,1,0\n0,0,0\n");
  CHECK(run("audit '" + (dir / "single.csv").string() + "'") == 0);
  CHECK(run("audit --strict '" + (dir / "single.csv").string() + "'") == 1);
}

TEST_CASE("sweep runs end to end and honors flag overrides") {
  const fs::path dir = scratch();
  const fs::path out_dir = dir / "sweep_out";
  fs::remove_all(out_dir);
  write(dir / "cfg.json", R"({
    "dataset": {"type": "synthetic", "m_train": 80, "m_test": 50},
    "radii": [0.1],
    "solvers": ["TRS"],
    "train": {"epochs": 2}
  })");
  CHECK(run("sweep '" + (dir / "cfg.json").string() + "' --output-dir '" +
            out_dir.string() + "'") == 0);
  CHECK(fs::exists(out_dir / "fairness.csv"));
  CHECK(fs::exists(out_dir / "accuracy.csv"));
  CHECK(fs::exists(out_dir / "timing.csv"));
  CHECK(fs::exists(out_dir / "summary.json"));

  write(dir / "bad_cfg.json", R"({"dataset": {"type": "synthetic"}, "radii": [0.2, 0.1]})");
  CHECK(run("sweep '" + (dir / "bad_cfg.json").string() + "'") == 1);
  CHECK(run("sweep '" + (dir / "cfg.json").string() + "' --solvers TSR") == 1);
}

TEST_CASE("bench emits the timing table") {
  const fs::path dir = scratch();
  const fs::path out_dir = dir / "bench_out";
  fs::remove_all(out_dir);
  write(dir / "bench.json", R"({
    "dataset": {"type": "synthetic", "m_train": 80, "m_test": 50},
    "radii": [0.1],
    "solvers": ["PGD", "TRS", "RANDOM"],
    "train": {"epochs": 2}
  })");
  const fs::path out = dir / "bench.txt";
  CHECK(run("bench '" + (dir / "bench.json").string() + "' --output-dir '" +
            out_dir.string() + "'", out) == 0);
  const std::string table = slurp(out);
  CHECK(table.find("solver,radius,mean_epoch_seconds") != std::string::npos);
  CHECK(table.find("PGD/TRS,0.1,") != std::string::npos);
  CHECK(fs::exists(out_dir / "timing.csv"));
}
