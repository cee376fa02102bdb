#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ifspec/commands.hpp"
#include "ifspec/report.hpp"
#include "ifspec/run_config.hpp"

using namespace ifspec;
namespace fs = std::filesystem;

namespace {

const char* kDesign = R"({
  "scenario": "t",
  "seed": 4,
  "design": {
    "block_lengths": [1, 9, 18],
    "lengths_km": [0, 640, 2000],
    "rates_gbaud": [32],
    "converged_by_km": 2000
  }
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const std::string& text) {
  try {
    config::parse(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path temp_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("ifspec_test_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = config::parse(kDesign);
  CHECK(c.scenario == "t");
  CHECK(c.seed == 4);
  REQUIRE(c.design.has_value());
  CHECK(c.design->block_lengths == std::vector<int>{1, 9, 18});
  CHECK(c.design->rolloff == 0.1);
  CHECK_FALSE(c.psd.has_value());
  CHECK(c.hash().size() == 16);
}

TEST_CASE("config errors name the file, line and key") {
  const auto syntax = error_of("{\n  \"seed\": 1,\n  \"design\": {,}\n}");
  CHECK(syntax.find("cfg.json") != std::string::npos);
  CHECK(syntax.find("line 3") != std::string::npos);

  const auto unknown = error_of("{\n  \"design\": {\n    \"block_lenghts\": [1]\n  }\n}");
  CHECK(unknown.find("cfg.json:3") != std::string::npos);
  CHECK(unknown.find("design.block_lenghts: unknown key") != std::string::npos);

  const auto type = error_of("{\"design\": {\"rolloff\": \"wide\"}}");
  CHECK(type.find("design.rolloff: wrong type") != std::string::npos);

  const auto empty = error_of("{\"seed\": 3}");
  CHECK(empty.find("none of psd, design, xpm") != std::string::npos);

  const auto rank = error_of(R"({"xpm": {"pumps": [{"name": "a"}], "ranks": [{"lower": "a", "upper": "b"}]}})");
  CHECK(rank.find("xpm.ranks[0].upper: unknown pump 'b'") != std::string::npos);

  const auto method = error_of(R"({"psd": {"sources": [{"name": "x", "method": "pcs"}]}})");
  CHECK(method.find("psd.sources[0].method") != std::string::npos);
}

TEST_CASE("seed override changes the hash") {
  auto c = config::parse(kDesign);
  const auto h = c.hash();
  config::override_seed(c, 4);
  CHECK(c.hash() == h);
  config::override_seed(c, 5);
  CHECK(c.hash() != h);
  CHECK(c.seed == 5);
}

TEST_CASE("design command writes stamped, reproducible tables") {
  const auto cfg = config::parse(kDesign);
  const auto dir = temp_dir("design");
  std::ostringstream log;
  cli::CommandOptions opt;
  opt.out = dir;
  opt.check = true;
  const auto rep = cli::cmd_design(cfg, opt, log);
  CHECK(rep.all_pass());
  const auto table = slurp(dir / "design" / "table.csv");
  CHECK(table.rfind("# config_hash=" + cfg.hash() + " seed=4", 0) == 0);
  CHECK(fs::exists(dir / "design" / "manifest.json"));
  cli::cmd_design(cfg, opt, log);
  CHECK(slurp(dir / "design" / "table.csv") == table);
  fs::remove_all(dir);
}

TEST_CASE("psd command, analytic only") {
  const auto cfg = config::parse(R"({
    "seed": 2,
    "psd": {
      "sources": [
        {"name": "ess_a", "order": 16, "method": "ess", "rate": 3.5, "block_length": 4},
        {"name": "ess_b", "order": 16, "method": "ess", "rate": 3.5, "block_length": 12},
        {"name": "ccdm", "order": 16, "method": "ccdm", "rate": 3.5, "block_length": 12}
      ],
      "n_symbols": 8192,
      "monte_carlo": false,
      "fine_grid_factor": 2
    }
  })");
  const auto dir = temp_dir("psd");
  std::ostringstream log;
  cli::CommandOptions opt;
  opt.out = dir;
  opt.check = true;
  opt.threads = 2;
  const auto rep = cli::cmd_psd(cfg, opt, log);
  for (const auto& c : rep.checks) {
    INFO(c.name, ": ", c.detail);
    CHECK(c.pass);
  }
  const auto first = slurp(dir / "psd" / "ccdm_L0" / "fine_decomposition.csv");
  cli::cmd_psd(cfg, opt, log);
  CHECK(slurp(dir / "psd" / "ccdm_L0" / "fine_decomposition.csv") == first);
  fs::remove_all(dir);
}

TEST_CASE("rate verdicts") {
  const RVector grid{2e9, 4e9, 8e9, 16e9, 32e9};
  auto v = cli::judge_rate(grid, 24.3e9, 32e9);
  CHECK(v.nearest == 32e9);
  CHECK(v.pass);
  v = cli::judge_rate(grid, 7.9e9, 32e9);
  CHECK(v.nearest == 8e9);
  CHECK_FALSE(v.pass);
  CHECK(cli::judge_rate(grid, 7.9e9, 16e9).pass);
  CHECK(cli::judge_rate(grid, 7.9e9, 4e9).pass);
}

TEST_CASE("csv helpers") {
  CHECK(report::fmt(0.1) == "0.1");
  CHECK(report::fmt(-INFINITY) == "-inf");
  CHECK(report::signed_db(-100.0) == doctest::Approx(-20.0));
  CHECK(report::signed_db(10.0) == doctest::Approx(10.0));
  CHECK(report::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(report::fnv1a_hex("a") == "af63dc4c8601ec8c");
}
