#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "cellhom/fixtures.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string cli_binary() {
  const char* bin = std::getenv("CELLHOM_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "CELLHOM_BIN must point at the cellhom executable");
  return bin;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cellhom_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file: " << p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args, const std::string& tag) {
  const fs::path dir = fresh_dir("io-" + tag);
  const fs::path out_file = dir / "stdout.txt";
  const fs::path err_file = dir / "stderr.txt";
  const std::string cmd = "\"" + cli_binary() + "\" " + args + " > \"" + out_file.string() +
                          "\" 2> \"" + err_file.string() + "\"";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = read_file(out_file);
  r.err = read_file(err_file);
  return r;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("the binary lists every built-in configuration") {
  const RunResult r = run_cli("--list-fixtures", "list");
  CHECK(r.exit_code == 0);
  std::vector<std::string> listed;
  std::istringstream in(r.out);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) listed.push_back(line);
  CHECK(listed == cellhom::fixture_names());
}

TEST_CASE("fixture runs write the full artifact set") {
  const fs::path out = fresh_dir("artifacts");
  const RunResult r =
      run_cli("--fixture validate-square-lattice --out \"" + out.string() + "\"", "artifacts");
  CHECK(r.exit_code == 0);
  for (const char* name : {"config.json", "results.csv", "summary.json", "manifest.txt"})
    CHECK_MESSAGE(fs::exists(out / name), name);

  const json summary = json::parse(read_file(out / "summary.json"));
  CHECK(summary.at("command") == "validate");
  CHECK(summary.at("all_pass") == true);

  const json config = json::parse(read_file(out / "config.json"));
  CHECK(config.at("command") == "validate");
  CHECK(config.contains("seed"));

  const std::string manifest = read_file(out / "manifest.txt");
  CHECK(manifest.find("command: validate") != std::string::npos);
  CHECK(read_file(out / "results.csv").find("check,pass,detail") != std::string::npos);
}

TEST_CASE("exit codes separate configuration, solver, and check failures") {
  CHECK(run_cli("--fixture no-such-fixture", "unknown-fixture").exit_code == 1);

  const RunResult both =
      run_cli("--fixture harmonic-1d --config /dev/null", "both-sources");
  CHECK(both.exit_code == 1);

  CHECK(run_cli("", "no-sources").exit_code == 1);
  CHECK(run_cli("--no-such-flag", "bad-flag").exit_code != 0);

  // A homogenize config for a 2x... gradient must spell out xi.
  const fs::path dir = fresh_dir("missing-xi");
  const fs::path cfg = dir / "config.json";
  write_text(cfg, R"({"command":"homogenize","seed":1,
    "structure":{"type":"euclidean","dim":2},
    "integrand":{"id":"laminate_2d","params":{"a1":1.0,"a2":3.0}}})");
  const RunResult missing =
      run_cli("--config \"" + cfg.string() + "\" --out \"" + (dir / "out").string() + "\"",
              "missing-xi");
  CHECK(missing.exit_code == 1);
  CHECK(missing.err.find("missing-parameter") != std::string::npos);
  CHECK(missing.err.find("xi") != std::string::npos);

  // A wrong oracle value fails only when --check is requested.
  const fs::path dir2 = fresh_dir("wrong-oracle");
  const fs::path cfg2 = dir2 / "config.json";
  write_text(cfg2, R"({"command":"homogenize","seed":1,
    "structure":{"type":"euclidean","dim":1},
    "integrand":{"id":"p_dirichlet_coeff","params":{"profile":"constant","a0":1.0}},
    "xi":[1.0],"k_list":[1],"resolutions":[8,16],
    "oracle":{"id":"constant-power","params":{"a0":9.0}},"check_tol":0.01})");
  const std::string base = "--config \"" + cfg2.string() + "\" --out \"";
  CHECK(run_cli(base + (dir2 / "a").string() + "\" --check", "wrong-oracle-check").exit_code == 3);
  CHECK(run_cli(base + (dir2 / "b").string() + "\"", "wrong-oracle-nocheck").exit_code == 0);

  // Unparsable JSON is a configuration error.
  const fs::path cfg3 = dir2 / "broken.json";
  write_text(cfg3, "{not json");
  CHECK(run_cli("--config \"" + cfg3.string() + "\"", "broken-json").exit_code == 1);

  // Unknown fields are rejected rather than ignored.
  const fs::path cfg4 = dir2 / "extra.json";
  write_text(cfg4, R"({"command":"homogenize","seed":1,"typo_field":3,
    "structure":{"type":"euclidean","dim":1},
    "integrand":{"id":"p_dirichlet_coeff"},"xi":[1.0]})");
  const RunResult extra = run_cli("--config \"" + cfg4.string() + "\"", "extra-field");
  CHECK(extra.exit_code == 1);
  CHECK(extra.err.find("typo_field") != std::string::npos);
}

TEST_CASE("artifacts are byte-identical across reruns and task counts") {
  for (const std::string fixture : {"harmonic-1d", "square-lattice", "gamma-harmonic-1d"}) {
    const fs::path a = fresh_dir(fixture + "-a");
    const fs::path b = fresh_dir(fixture + "-b");
    const fs::path c = fresh_dir(fixture + "-c");
    CHECK(run_cli("--fixture " + fixture + " --tasks 1 --out \"" + a.string() + "\"",
                  fixture + "-a")
              .exit_code == 0);
    CHECK(run_cli("--fixture " + fixture + " --tasks 4 --out \"" + b.string() + "\"",
                  fixture + "-b")
              .exit_code == 0);
    CHECK(run_cli("--fixture " + fixture + " --tasks 1 --out \"" + c.string() + "\"",
                  fixture + "-c")
              .exit_code == 0);
    for (const char* name : {"results.csv", "summary.json", "config.json"}) {
      CAPTURE(fixture);
      CAPTURE(name);
      const std::string ref = read_file(a / name);
      CHECK(read_file(b / name) == ref);
      CHECK(read_file(c / name) == ref);
    }
  }
}

TEST_CASE("seed overrides are echoed into the resolved config") {
  const fs::path out = fresh_dir("seed-override");
  CHECK(run_cli("--fixture periodic-constant-1d --seed 42 --out \"" + out.string() + "\"",
                "seed-override")
            .exit_code == 0);
  const json config = json::parse(read_file(out / "config.json"));
  CHECK(config.at("seed") == 42);

  const fs::path plain = fresh_dir("seed-default");
  CHECK(run_cli("--fixture periodic-constant-1d --out \"" + plain.string() + "\"",
                "seed-default")
            .exit_code == 0);
  const json fixture = json::parse(cellhom::fixture_json("periodic-constant-1d"));
  const json config2 = json::parse(read_file(plain / "config.json"));
  CHECK(config2.at("seed") == fixture.at("seed"));
}

TEST_CASE("built-in fixtures mirror the files checked into the repository") {
  const char* dir = std::getenv("CELLHOM_FIXTURES_DIR");
  REQUIRE_MESSAGE(dir != nullptr, "CELLHOM_FIXTURES_DIR must point at the fixtures directory");
  for (const std::string& name : cellhom::fixture_names()) {
    CAPTURE(name);
    const fs::path file = fs::path(dir) / (name + ".json");
    REQUIRE_MESSAGE(fs::exists(file), "missing fixture file " << file.string());
    const json from_file = json::parse(read_file(file));
    const json embedded = json::parse(cellhom::fixture_json(name));
    CHECK(from_file == embedded);
  }
}

TEST_CASE("the echoed config reproduces the run byte for byte") {
  const fs::path first = fresh_dir("echo-first");
  CHECK(run_cli("--fixture piecewise-1d --out \"" + first.string() + "\"", "echo-first")
            .exit_code == 0);
  const fs::path second = fresh_dir("echo-second");
  CHECK(run_cli("--config \"" + (first / "config.json").string() + "\" --out \"" +
                    second.string() + "\"",
                "echo-second")
            .exit_code == 0);
  CHECK(read_file(second / "results.csv") == read_file(first / "results.csv"));
  CHECK(read_file(second / "summary.json") == read_file(first / "summary.json"));
  CHECK(read_file(second / "config.json") == read_file(first / "config.json"));
}
