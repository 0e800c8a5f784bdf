#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "jobs.hpp"

namespace fs = std::filesystem;
using namespace shgq_cli;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("shgq_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<double>> numeric_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream s(line);
    std::string cell;
    while (std::getline(s, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SHGQ_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("a minimal config echoes every default") {
  const Config c = parse_config("[model]\nE = 7\n");
  const std::string echo = c.echo();
  for (const auto& k : schema()) {
    CHECK_MESSAGE(echo.find(k.key + " =") != std::string::npos, k.name());
  }
  CHECK(c.explicitly_set("model.E"));
  CHECK_FALSE(c.explicitly_set("model.delta1"));
  CHECK(c.real("model.delta1") == 2.0);
  CHECK(c.real("grid.L") == 103.057);

  const Config again = parse_config(echo);
  CHECK(again.echo() == echo);
  CHECK_FALSE(again.explicitly_set("model.delta1"));
  CHECK(again.explicitly_set("model.E"));
}

TEST_CASE("config errors name the line and the nearest key") {
  const std::string unknown = config_error("[model]\nE = 7\nDelta3 = 1\n");
  CHECK(unknown.find("line 3") != std::string::npos);
  CHECK(unknown.find("nearest valid key is") != std::string::npos);
  CHECK(unknown.find("'model.delta") != std::string::npos);

  CHECK(config_error("[model]\nE = 1\nE = 2\n").find("line 3") != std::string::npos);
  CHECK(config_error("[grid]\nN = many\n").find("line 2") != std::string::npos);
  CHECK_FALSE(config_error("[modle]\n").empty());
  CHECK(edit_distance("Delta3", "delta2") == 1);
}

TEST_CASE("job validation") {
  JobSpec s;
  s.command = "steady";
  s.config = parse_config("[model]\nE = 1\nE_ratio = 0.9\n");
  CHECK_THROWS_AS(validate_job(s), ConfigError);
  s.config = parse_config("[model]\nE = 1\n[grid]\nN = 100\n");
  CHECK_THROWS_AS(validate_job(s), ConfigError);
  s.config = parse_config("[model]\nE = 1\n");
  s.figure = 3;
  CHECK_THROWS_AS(validate_job(s), ConfigError);
  s.command = "reproduce-figure";
  s.figure = 14;
  CHECK_THROWS_AS(validate_job(s), ConfigError);
}

TEST_CASE("physical parameters give the dimensionless results") {
  // gamma1 = 2e8 /s: delta1 = 2, delta2 = -2, gamma = 0.5, E = E_in g / gamma1^2 = 7.
  const double gamma1 = 2e8, g = 1e4, omega1 = 3.5e15, c = 299792458.0;
  const double E_in = 7.0 * gamma1 * gamma1 / g;
  const double l_d = std::sqrt(c * c / (2.0 * gamma1 * omega1));
  const double n_th = gamma1 * gamma1 * l_d / (g * g);

  std::ostringstream phys;
  phys.precision(17);
  phys << "[physical]\ngamma1 = " << gamma1 << "\ngamma2 = 1e8\ndelta1 = 4e8\ndelta2 = -4e8\ng = " << g
       << "\nomega1 = " << omega1 << "\nE_in = " << E_in << "\n[spectrum]\nk_max = 4\npoints = 41\n";
  std::ostringstream dimless;
  dimless.precision(17);
  dimless << "[model]\nE = 7\nn_th = " << n_th << "\n[spectrum]\nk_max = 4\npoints = 41\n";

  const fs::path root = scratch("physical");
  std::vector<std::vector<std::vector<double>>> spectra;
  for (const auto& [name, text] : {std::pair{"physical", phys.str()}, std::pair{"model", dimless.str()}}) {
    JobSpec s;
    s.command = "linear-corr";
    s.config = parse_config(text);
    s.out_dir = (root / name).string();
    validate_job(s);
    run_job(s);
    spectra.push_back(numeric_rows(root / name / "spectrum.csv"));
  }
  REQUIRE(spectra[0].size() == 41);
  REQUIRE(spectra[0].size() == spectra[1].size());
  for (std::size_t i = 0; i < spectra[0].size(); ++i) {
    REQUIRE(spectra[0][i].size() == spectra[1][i].size());
    for (std::size_t j = 0; j < spectra[0][i].size(); ++j) {
      const double a = spectra[0][i][j], b = spectra[1][i][j];
      CHECK(std::abs(a - b) <= 1e-9 * (1.0 + std::abs(b)));
    }
  }
}

TEST_CASE("exit codes and manifest reruns") {
  const fs::path root = scratch("exit");
  {
    std::ofstream(root / "bad.ini") << "[model]\nE = 7\nDelta3 = 1\n";
    std::ofstream(root / "good.ini") << "[model]\nE_ratio = 0.9\n";
  }
  CHECK(run_cli("steady --config " + (root / "bad.ini").string() + " --out " + (root / "bad").string()) == 2);
  CHECK(run_cli("nonsense") == 2);
  CHECK(run_cli("steady --figure 3 --config " + (root / "good.ini").string() + " --out " + (root / "x").string()) ==
        2);

  const fs::path first = root / "first", second = root / "second";
  REQUIRE(run_cli("steady --config " + (root / "good.ini").string() + " --out " + first.string()) == 0);
  const auto manifest = nlohmann::json::parse(slurp(first / "manifest.json"));
  CHECK(manifest["command"] == "steady");
  CHECK(manifest["exit_code"] == 0);
  CHECK(manifest.contains("git_commit"));
  CHECK(manifest.contains("version"));
  CHECK(manifest["config"].get<std::string>().find("E_ratio = 0.9") != std::string::npos);

  REQUIRE(run_cli("steady --config " + (first / "manifest.json").string() + " --out " + second.string()) == 0);
  CHECK(slurp(first / "steady.csv") == slurp(second / "steady.csv"));
  const auto rerun = nlohmann::json::parse(slurp(second / "manifest.json"));
  CHECK(rerun["config"] == manifest["config"]);
  CHECK(rerun["rerun_of"] == (first / "manifest.json").string());
}
