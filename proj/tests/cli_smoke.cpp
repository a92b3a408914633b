#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FDOE_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
#ifdef _WIN32
  return status;
#else
  return WEXITSTATUS(status);
#endif
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

const char* kGoodConfig = R"({
  "model": {
    "formula": "~ x1",
    "npf": 1,
    "tbounds": [0, 1],
    "dx": [1],
    "knotsx": [[0.333, 0.666]],
    "pars": ["power"],
    "db": [2],
    "knotsb": [[]]
  },
  "criterion": {"kind": "D", "lambda": 10.0},
  "search": {"nruns": 4, "nsd": 2, "seed": 3}
})";

}  // namespace

TEST_CASE("search subcommand runs end to end") {
  const auto config = write_config("cli_good.json", kGoodConfig);
  const auto outdir = fs::temp_directory_path() / "cli_out";
  fs::remove_all(outdir);
  const int code =
      run_cli("search " + config.string() + " --out " + outdir.string() + " > /dev/null");
  CHECK(code == 0);
  CHECK(fs::exists(outdir / "result.json"));
  CHECK(fs::exists(outdir / "design_x1.csv"));
  CHECK(fs::exists(outdir / "plot_x1.svg"));
  fs::remove_all(outdir);
}

TEST_CASE("validation failures exit with code 2") {
  const auto missing = fs::temp_directory_path() / "does_not_exist.json";
  CHECK(run_cli("search " + missing.string() + " 2> /dev/null") == 2);

  const auto bad = write_config("cli_bad.json", R"({"model": {}})");
  CHECK(run_cli("search " + bad.string() + " 2> /dev/null") == 2);

  std::string wrong_pars = kGoodConfig;
  const auto pos = wrong_pars.find("\"pars\": [\"power\"]");
  wrong_pars.replace(pos, std::string("\"pars\": [\"power\"]").size(),
                     "\"pars\": [\"power\", \"power\"]");
  const auto bad2 = write_config("cli_bad2.json", wrong_pars);
  CHECK(run_cli("search " + bad2.string() + " 2> /dev/null") == 2);
}

TEST_CASE("seed and workers overrides are accepted") {
  const auto config = write_config("cli_good2.json", kGoodConfig);
  const auto outdir = fs::temp_directory_path() / "cli_out2";
  fs::remove_all(outdir);
  const int code = run_cli("search " + config.string() + " --seed 9 --workers 2 --out " +
                           outdir.string() + " > /dev/null");
  CHECK(code == 0);
  fs::remove_all(outdir);
}

TEST_CASE("searches that never reach a nonsingular information matrix exit with code 3") {
  // one run but four parameters and no penalty: Z'Z has rank 1, every probe
  // stays singular
  std::string starved = kGoodConfig;
  const auto pos = starved.find("\"lambda\": 10.0");
  starved.replace(pos, std::string("\"lambda\": 10.0").size(), "\"lambda\": 0.0");
  const auto pos2 = starved.find("\"nruns\": 4");
  starved.replace(pos2, std::string("\"nruns\": 4").size(), "\"nruns\": 1");
  const auto config = write_config("cli_infeasible.json", starved);
  CHECK(run_cli("search " + config.string() + " 2> /dev/null") == 3);
}

TEST_CASE("progress flag streams per-sweep lines") {
  const auto config = write_config("cli_good3.json", kGoodConfig);
  const auto outdir = fs::temp_directory_path() / "cli_out3";
  const auto log = fs::temp_directory_path() / "cli_progress.txt";
  fs::remove_all(outdir);
  const int code = run_cli("search " + config.string() + " --progress --out " +
                           outdir.string() + " > " + log.string());
  CHECK(code == 0);
  std::ifstream in(log);
  std::string first;
  std::getline(in, first);
  CHECK(first.starts_with("start 1 sweep 1 objective"));
  fs::remove_all(outdir);
}
