#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "api.hpp"
#include "config.hpp"

namespace shgq_cli {

struct JobSpec {
  std::string command;
  Config config;
  std::string out_dir;
  int figure = 0;
  int threads = 1;
  bool self_check = false;
};

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct JobResult {
  std::vector<std::string> outputs;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<CheckLine> checks;

  bool checks_pass() const;
};

const std::vector<std::string>& commands();
const std::vector<int>& figure_ids();

/// Throws ConfigError for inconsistent specs (unknown command, stray figure id...).
void validate_job(const JobSpec& job);
JobResult run_job(const JobSpec& job);

// ---- shared by the command implementations -------------------------------

struct Resolved {
  shgq_params p{};
  double E_t = 0.0;
  double k_c = 0.0;
  bool have_threshold = false;
  std::optional<shgq_scales> scales;
};

class Job {
 public:
  explicit Job(const JobSpec& spec);

  const JobSpec& spec;
  const Config& cfg;
  JobResult result;

  std::ofstream csv(const std::string& name, const std::string& header);
  std::string path(const std::string& name) const;

  shgq_threshold_options threshold_options() const;
  /// Model parameters; need_E = false allows a missing pump.
  Resolved resolve(bool need_E = true);
  /// Stationary threshold of the configured detunings.
  shgq_threshold threshold(const shgq_params& p) const;

  /// snapshot_path must outlive the returned config.
  shgq_ensemble_config ensemble(const std::string& snapshot_path = {}) const;
  Estimator run_ensemble(const shgq_params& p, const shgq_ensemble_config& e, const std::string& label);
  void write_observables(const Estimator& e, const std::string& subdir);

  void verify(const std::string& name, bool pass, const std::string& detail);
};

JobResult reproduce_figure(Job& job, int id);
/// Figure presets applied before validation, only for keys not set explicitly.
void apply_figure_presets(Config& c, int id);

nlohmann::json to_json(const shgq_params& p);
nlohmann::json to_json(const shgq_estimate& e);
nlohmann::json to_json(const shgq_run_report& r);

}  // namespace shgq_cli
