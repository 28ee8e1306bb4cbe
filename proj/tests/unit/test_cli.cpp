#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "matschrod/cli.hpp"
#include "matschrod/config.hpp"
#include "matschrod/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using matschrod::ConfigError;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "matschrod_test_cli" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = matschrod::cli::run(args, out, err);
  if (out_text) *out_text = out.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

const std::string kConfigs = MATSCHROD_CONFIG_DIR;

}  // namespace

TEST_CASE("schema validation") {
  CHECK_NOTHROW(matschrod::parse_config(json::object()));
  CHECK_THROWS_AS(matschrod::parse_config(json{{"grdi", json::object()}}), ConfigError);
  CHECK_THROWS_AS(matschrod::parse_config(json{{"grid", {{"n", 5}}}}), ConfigError);
  CHECK_THROWS_AS(matschrod::parse_config(json{{"grid", {{"N", "ten"}}}}), ConfigError);
  CHECK_THROWS_AS(matschrod::parse_config(json{{"grid", {{"N", 1}}}}), ConfigError);
  CHECK_THROWS_AS(matschrod::parse_config(json{{"solver", {{"k", 300}}}}), ConfigError);
  CHECK_THROWS_AS(matschrod::parse_config(json{{"coefficients", {{"family", "mystery"}}}}), ConfigError);
  CHECK_THROWS_AS(matschrod::parse_config(json{{"coefficients", {{"family", "harmonic_oscillator"}, {"V", {{1}}}}}}),
                  ConfigError);
  CHECK_THROWS_AS(matschrod::parse_config(json{{"propagator", {{"p", {0.5}}}}}), ConfigError);
  CHECK_THROWS_AS(matschrod::parse_config(json{{"propagator", {{"method", "euler"}}}}), ConfigError);
  CHECK_THROWS_AS(matschrod::parse_config(json{{"grid", {{"m", 2}}}, {"coefficients", {{"V", {{1, 0}}}}}}),
                  ConfigError);

  const auto c = matschrod::parse_config(json{{"propagator", {{"p", {1, "inf"}}}}});
  CHECK(std::isinf(c.propagator.p_list[1]));
  // Resolved config round-trips to itself.
  const json resolved = matschrod::to_json(c);
  CHECK(matschrod::to_json(matschrod::parse_config(resolved)) == resolved);
}

TEST_CASE("dotted overrides") {
  json doc = {{"grid", {{"N", 10}}}};
  matschrod::apply_override(doc, "grid.N", "50");
  matschrod::apply_override(doc, "solver.method", "lanczos");
  matschrod::apply_override(doc, "coefficients.V", "[[2]]");
  CHECK(doc["grid"]["N"] == 50);
  CHECK(doc["solver"]["method"] == "lanczos");
  CHECK(doc["coefficients"]["V"][0][0] == 2);
  CHECK_THROWS_AS(matschrod::apply_override(doc, "grid..N", "1"), ConfigError);
  CHECK_THROWS_AS(matschrod::apply_override(doc, "grid.N.x", "1"), ConfigError);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("exit");
  CHECK(run({"spectrum", "--grid.N=20", "--solver.k=21", "--out", dir.string()}) == matschrod::cli::kExitConfig);
  CHECK(run({"spectrum", "--grid.N=20", "--solver.k=20", "--out", dir.string()}) == matschrod::cli::kExitOk);
  CHECK(run({"spectrum", "--bogus.key=1", "--out", dir.string()}) == matschrod::cli::kExitConfig);
  CHECK(run({"spectrum", "--config", (dir / "missing.json").string()}) == matschrod::cli::kExitConfig);
  CHECK(run({"frobnicate"}) == matschrod::cli::kExitConfig);
  CHECK(run({"gallery", "--name", "nope", "--out", dir.string()}) == matschrod::cli::kExitConfig);
  // Too coarse for the documented 0.5% tolerance.
  CHECK(run({"gallery", "--name", "harmonic_oscillator", "--check", "spectrum", "--grid.N=30", "--out",
             dir.string()}) == matschrod::cli::kExitVerdictFailed);
  // Unreachable tolerance: solver failure, but the resolved config is still written.
  const fs::path partial = scratch("partial");
  CHECK(run({"spectrum", "--grid.N=300", "--solver.method=lanczos", "--solver.tol=1e-300", "--out", partial.string()}) == matschrod::cli::kExitSolver);
  CHECK(fs::exists(partial / "resolved-config.json"));
}

TEST_CASE("verify on the harmonic oscillator") {
  const fs::path dir = scratch("verify_ho");
  std::string text;
  const int code = run({"verify", "--config", kConfigs + "/harmonic_oscillator.json", "--grid.N=400", "--out",
                        dir.string()},
                       &text);
  CHECK(code == 0);
  const json v = read_json(dir / "verdicts.json");
  bool all = true;
  for (const auto& item : v["verdicts"]) all = all && item["passed"].get<bool>();
  CHECK(v["passed"] == all);
  CHECK(all == (code == 0));
  CHECK(fs::exists(dir / "probes.csv"));
  CHECK(fs::exists(dir / "sandwich.dat"));
  CHECK(read_json(dir / "resolved-config.json")["grid"]["N"] == 400);
}

TEST_CASE("non-positive structure is classified with a witness") {
  const fs::path dir = scratch("witness");
  CHECK(run({"verify", "--config", kConfigs + "/positive_offdiagonal.json", "--out", dir.string()}) == 0);
  const json v = read_json(dir / "verdicts.json");
  CHECK(v["reports"]["violation_witness"]["label"] == "WITNESS-FOUND");
}

TEST_CASE("resolved config reproduces bit-identical artifacts") {
  const fs::path a = scratch("roundtrip_a");
  const fs::path b = scratch("roundtrip_b");
  CHECK(run({"verify", "--config", kConfigs + "/degenerate_counterexample.json", "--grid.N=150", "--solver.k=8",
             "--seed", "5", "--out", a.string()}) == 0);
  CHECK(run({"verify", "--config", (a / "resolved-config.json").string(), "--out", b.string()}) == 0);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const std::string name = entry.path().filename().string();
    if (name == "resolved-config.json") continue;
    REQUIRE(fs::exists(b / name));
    CHECK_MESSAGE(slurp(entry.path()) == slurp(b / name), name);
    ++compared;
  }
  CHECK(compared >= 4);
  json ra = read_json(a / "resolved-config.json"), rb = read_json(b / "resolved-config.json");
  ra["output"].erase("dir");
  rb["output"].erase("dir");
  CHECK(ra == rb);
}

TEST_CASE("other subcommands") {
  const fs::path dir = scratch("subs");
  std::string text;
  CHECK(run({"gallery", "--list"}, &text) == 0);
  CHECK(json::parse(text).size() == 4);
  CHECK(run({"assemble", "--grid.N=30", "--grid.d=2", "--out", dir.string()}) == 0);
  CHECK(read_json(dir / "assemble.json")["symmetry_defect"] == 0.0);
  CHECK(run({"evolve", "--grid.N=50", "--out", dir.string()}) == 0);
  CHECK(fs::exists(dir / "snapshots.csv"));
  CHECK(fs::exists(dir / "norm_trace.dat"));
  CHECK(run({"gallery", "--name", "degenerate_counterexample", "--check", "merge", "--grid.N=100",
             "--solver.k=10", "--out", dir.string()}) == 0);
  CHECK(fs::exists(dir / "merge.csv"));
  CHECK(run({"gallery", "--name", "antisymmetric_continuity", "--out", dir.string()}) == 0);
  CHECK(fs::exists(dir / "continuity.dat"));
}

TEST_CASE("binary entry point") {
  const std::string cmd = std::string(MATSCHROD_CLI_PATH) + " spectrum --grid.N=10 --solver.k=11 >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == matschrod::cli::kExitConfig);
}
