#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "jobs.hpp"

#ifndef SHGQ_GIT_COMMIT
#define SHGQ_GIT_COMMIT "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace shgq_cli;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumeric = 3, kRegression = 4 };

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-noise simulations of transverse patterns in intracavity second-harmonic generation"};
  app.set_version_flag("--version", std::string(shgq_version()) + " (" + SHGQ_GIT_COMMIT + ")");

  std::string command, config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 1, figure = 0;
  bool self_check = false;
  app.add_option("command", command, "steady | bifurcation | linear-corr | simulate | analyze | reproduce-figure")
      ->check(CLI::IsMember(commands()));
  app.add_option("--config", config_path, "configuration file, or a manifest.json from an earlier run");
  app.add_option("--out", out_dir, "output directory (default: $SHGQ_OUTPUT_ROOT/<command>)");
  auto* seed_opt = app.add_option("--seed", seed, "overrides run.seed");
  app.add_option("--threads", threads, "worker cap")->check(CLI::PositiveNumber);
  app.add_option("--figure", figure, "figure id for reproduce-figure (2-13)");
  app.add_flag("--self-check", self_check, "reproduce-figure: exit 4 when an acceptance check fails");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  json manifest = {{"tool", "shgq"},
                   {"version", shgq_version()},
                   {"git_commit", SHGQ_GIT_COMMIT},
                   {"started_utc", utc_now()},
                   {"argv", std::vector<std::string>(argv, argv + argc)}};
  const auto start = std::chrono::steady_clock::now();
  JobSpec job;
  int code = kOk;
  std::string error;
  JobResult result;
  try {
    std::string text;
    if (!config_path.empty()) {
      text = read_file(config_path);
      const json m = json::parse(text, nullptr, false);
      if (m.is_object() && m.contains("config") && m.contains("command")) {
        const std::string was = m["command"];
        if (!command.empty() && command != was) {
          throw ConfigError("manifest is for command '" + was + "', not '" + command + "'");
        }
        command = was;
        if (figure == 0 && m.value("figure", 0) != 0) figure = m["figure"];
        text = m["config"];
        manifest["rerun_of"] = config_path;
      }
    }
    if (command.empty()) throw ConfigError("no command given (see --help)");
    job.command = command;
    job.figure = figure;
    job.threads = threads;
    job.self_check = self_check;
    job.config = parse_config(text);
    if (seed_opt->count() > 0) job.config.set("run.seed", std::to_string(seed));
    if (command == "reproduce-figure") apply_figure_presets(job.config, figure);
    if (out_dir.empty()) {
      const char* root = std::getenv("SHGQ_OUTPUT_ROOT");
      fs::path base = root && *root ? root : "shgq-out";
      out_dir = (base / (figure ? command + "-" + std::to_string(figure) : command)).string();
    }
    job.out_dir = out_dir;
    manifest["command"] = command;
    manifest["figure"] = figure;
    manifest["threads"] = threads;
    manifest["self_check"] = self_check;
    manifest["seed"] = job.config.unsigned_value("run.seed");
    manifest["config"] = job.config.echo();
    validate_job(job);
    result = run_job(job);
    if (self_check && !result.checks_pass()) code = kRegression;
  } catch (const ConfigError& e) {
    error = e.what();
    code = kConfig;
  } catch (const ApiFailure& e) {
    error = e.what();
    code = kNumeric;
  } catch (const std::exception& e) {
    error = e.what();
    code = kNumeric;
  }

  manifest["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  manifest["exit_code"] = code;
  manifest["outputs"] = result.outputs;
  if (!error.empty()) manifest["error"] = error;
  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    std::ofstream m(fs::path(out_dir) / "manifest.json");
    if (m) m << manifest.dump(2) << "\n";
  }

  if (!error.empty()) {
    std::cerr << "shgq: " << error << "\n";
    return code;
  }
  for (const auto& c : result.checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
  }
  std::cout << "wrote " << result.outputs.size() << " file(s) to " << out_dir << "\n";
  return code;
}
