#include "jobs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace shgq_cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

const char* kind_name(int kind) {
  switch (kind) {
    case SHGQ_STATIONARY_TRANSVERSE: return "stationary-transverse";
    case SHGQ_OSCILLATORY_TRANSVERSE: return "oscillatory-transverse";
    case SHGQ_SELF_PULSING: return "self-pulsing";
  }
  return "none";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

json to_json(const shgq_params& p) {
  return {{"delta1", p.delta1}, {"delta2", p.delta2}, {"gamma", p.gamma}, {"E", p.E},
          {"n_th", std::isfinite(p.n_th) ? json(p.n_th) : json("inf")}};
}

json to_json(const shgq_estimate& e) {
  return {{"value", num(e.value)}, {"standard_error", num(e.standard_error)}, {"n_effective", num(e.n_effective)}};
}

json to_json(const shgq_run_report& r) {
  return {{"steps", r.steps},         {"samples", r.samples},           {"discards", r.discards},
          {"completed", r.completed != 0}, {"abort_time", r.abort_time}, {"wall_seconds", r.wall_seconds},
          {"min_margin", r.min_margin}};
}

bool JobResult::checks_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckLine& c) { return c.pass; });
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c = {"steady", "bifurcation", "linear-corr", "simulate", "analyze",
                                             "reproduce-figure"};
  return c;
}

const std::vector<int>& figure_ids() {
  static const std::vector<int> ids = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13};
  return ids;
}

void validate_job(const JobSpec& job) {
  const auto& cs = commands();
  if (std::find(cs.begin(), cs.end(), job.command) == cs.end()) {
    throw ConfigError("unknown command '" + job.command + "'");
  }
  if (job.command == "reproduce-figure") {
    const auto& ids = figure_ids();
    if (job.figure == 0) throw ConfigError("reproduce-figure needs --figure ID");
    if (std::find(ids.begin(), ids.end(), job.figure) == ids.end()) {
      throw ConfigError("unsupported figure id " + std::to_string(job.figure) + " (supported: 2-13)");
    }
  } else {
    if (job.figure != 0) throw ConfigError("--figure is only valid with reproduce-figure");
    if (job.self_check) throw ConfigError("--self-check is only valid with reproduce-figure");
  }
  if (job.threads < 1) throw ConfigError("--threads must be >= 1");
  if (job.out_dir.empty()) throw ConfigError("no output directory");
  const Config& c = job.config;
  if (job.command == "analyze" && !c.has("analyze.input")) throw ConfigError("missing required key 'analyze.input'");
  if (c.has("model.E") && c.has("model.E_ratio")) throw ConfigError("set only one of 'model.E' and 'model.E_ratio'");
  if (c.section_used("physical")) {
    for (const char* k : {"model.delta1", "model.delta2", "model.gamma", "model.E", "model.E_ratio", "model.n_th"}) {
      if (c.explicitly_set(k)) throw ConfigError(std::string("'") + k + "' conflicts with the [physical] section");
    }
    for (const char* k : {"physical.gamma1", "physical.gamma2", "physical.delta1", "physical.delta2", "physical.g",
                          "physical.omega1", "physical.E_in"}) {
      if (!c.has(k)) throw ConfigError(std::string("missing required key '") + k + "'");
    }
  }
  for (const char* k : {"grid.N", "run.trajectories", "run.batches", "run.sample_stride", "scan.points",
                        "spectrum.points", "analyze.batches"}) {
    if (c.integer(k) < 1) throw ConfigError(std::string("'") + k + "' must be >= 1");
  }
  const long N = c.integer("grid.N");
  if (N < 8 || (N & (N - 1)) != 0) throw ConfigError("'grid.N' must be a power of two >= 8");
}

// ---------------------------------------------------------------------------

Job::Job(const JobSpec& s) : spec(s), cfg(s.config) { fs::create_directories(s.out_dir); }

std::string Job::path(const std::string& name) const { return (fs::path(spec.out_dir) / name).string(); }

std::ofstream Job::csv(const std::string& name, const std::string& header) {
  const std::string p = path(name);
  fs::create_directories(fs::path(p).parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p);
  out.precision(17);
  out << header << "\n";
  result.outputs.push_back(name);
  return out;
}

shgq_threshold_options Job::threshold_options() const {
  shgq_threshold_options o;
  shgq_threshold_options_default(&o);
  o.k_min = cfg.real("threshold.k_min");
  o.k_max = cfg.real("threshold.k_max");
  o.k_points = static_cast<int>(cfg.integer("threshold.k_points"));
  o.k_tol = cfg.real("threshold.k_tol");
  o.E_min = cfg.real("threshold.E_min");
  o.E_max = cfg.real("threshold.E_max");
  o.E_scan_points = static_cast<int>(cfg.integer("threshold.E_scan_points"));
  o.E_tol = cfg.real("threshold.E_tol");
  return o;
}

shgq_threshold Job::threshold(const shgq_params& p) const {
  const auto o = threshold_options();
  shgq_threshold t;
  check(shgq_find_threshold(&p, &o, &t), "find_threshold");
  return t;
}

Resolved Job::resolve(bool need_E) {
  Resolved r;
  if (cfg.section_used("physical")) {
    shgq_physical_params ph;
    shgq_physical_params_default(&ph);
    ph.gamma1 = cfg.real("physical.gamma1");
    ph.gamma2 = cfg.real("physical.gamma2");
    ph.delta1 = cfg.real("physical.delta1");
    ph.delta2 = cfg.real("physical.delta2");
    ph.g = cfg.real("physical.g");
    ph.omega1 = cfg.real("physical.omega1");
    ph.c = cfg.real("physical.c");
    ph.E_in = cfg.real("physical.E_in");
    shgq_scales sc;
    check(shgq_rescale_physical(&ph, &r.p, &sc), "rescale_physical");
    r.scales = sc;
  } else {
    shgq_params_default(&r.p);
    r.p.delta1 = cfg.real("model.delta1");
    r.p.delta2 = cfg.real("model.delta2");
    r.p.gamma = cfg.real("model.gamma");
    r.p.n_th = cfg.real("model.n_th");
    r.p.E = 0.0;
    if (cfg.has("model.E")) {
      r.p.E = cfg.real("model.E");
    } else if (cfg.has("model.E_ratio")) {
      const auto t = threshold(r.p);
      r.E_t = t.E_t;
      r.k_c = t.k_c;
      r.have_threshold = true;
      r.p.E = cfg.real("model.E_ratio") * t.E_t;
    } else if (need_E) {
      throw ConfigError("missing required key 'model.E' (or 'model.E_ratio')");
    }
  }
  if (!r.have_threshold) {
    try {
      const auto t = threshold(r.p);
      r.E_t = t.E_t;
      r.k_c = t.k_c;
      r.have_threshold = true;
    } catch (const ApiFailure&) {
      r.E_t = r.k_c = kNaN;
    }
  }
  json& s = result.summary;
  s["params"] = to_json(r.p);
  if (r.have_threshold) {
    s["threshold"] = {{"E_t", r.E_t}, {"k_c", r.k_c}, {"E_ratio", r.p.E / r.E_t}};
  }
  if (r.scales) {
    s["scales"] = {{"l_d", r.scales->l_d}, {"time_unit", r.scales->time_unit}, {"field_scale", r.scales->field_scale}};
  }
  return r;
}

shgq_ensemble_config Job::ensemble(const std::string& snapshot_path) const {
  shgq_ensemble_config e;
  shgq_ensemble_config_default(&e);
  e.run.N = static_cast<int>(cfg.integer("grid.N"));
  e.run.L = cfg.real("grid.L");
  e.run.dt = cfg.real("run.dt");
  e.run.t_transient = cfg.real("run.t_transient");
  e.run.t_total = cfg.real("run.t_total");
  e.run.sample_stride = cfg.integer("run.sample_stride");
  e.run.seed = cfg.unsigned_value("run.seed");
  e.run.perturbation = cfg.real("run.perturbation");
  e.trajectories = static_cast<int>(cfg.integer("run.trajectories"));
  e.batches_per_trajectory = static_cast<int>(cfg.integer("run.batches"));
  e.full_pairs = cfg.boolean("run.full_pairs") ? 1 : 0;
  e.threads = spec.threads;
  e.snapshot_path = nullptr;
  if (!snapshot_path.empty()) {
    e.snapshot_path = snapshot_path.c_str();
    e.snapshot_format = cfg.text("run.snapshots") == "csv" ? SHGQ_SNAPSHOT_CSV : SHGQ_SNAPSHOT_BINARY;
  }
  return e;
}

Estimator Job::run_ensemble(const shgq_params& p, const shgq_ensemble_config& e, const std::string& label) {
  std::vector<shgq_run_report> reports(e.trajectories);
  shgq_ensemble_summary sum;
  shgq_estimator* raw = nullptr;
  check(shgq_run_ensemble(&p, &e, reports.data(), &sum, &raw), "run_ensemble");
  Estimator est(raw);
  json runs = json::array();
  for (const auto& r : reports) runs.push_back(to_json(r));
  json& entry = result.summary["ensembles"][label];
  entry = {{"params", to_json(p)},
           {"grid", {{"N", e.run.N}, {"L", e.run.L}}},
           {"seed", e.run.seed},
           {"dt", e.run.dt},
           {"t_transient", e.run.t_transient},
           {"t_total", e.run.t_total},
           {"sample_stride", e.run.sample_stride},
           {"trajectories", e.trajectories},
           {"samples", sum.samples},
           {"discards", sum.discards},
           {"sample_interval", sum.sample_interval},
           {"kappa", sum.kappa},
           {"wall_seconds", sum.wall_seconds},
           {"reports", runs}};
  return est;
}

void Job::write_observables(const Estimator& e, const std::string& subdir) {
  shgq_observables* raw = nullptr;
  check(shgq_standard_observables(e.get(), &raw), "standard_observables");
  std::unique_ptr<shgq_observables, ObservablesDeleter> obs(raw);
  fs::create_directories(path(subdir));
  for (size_t i = 0; i < shgq_observables_count(raw); ++i) {
    const std::string name = subdir + "/" + shgq_observable_name(raw, i) + ".csv";
    check(shgq_observable_write_csv(raw, i, path(name).c_str()), "write_csv");
    result.outputs.push_back(name);
  }
}

void Job::verify(const std::string& name, bool pass, const std::string& detail) {
  result.checks.push_back({name, pass, detail});
}

// ---------------------------------------------------------------------------

namespace {

void steady(Job& job) {
  const Resolved r = job.resolve();
  std::vector<shgq_steady_state> states(3);
  size_t n = 0;
  check(shgq_steady_states(&r.p, states.data(), states.size(), &n), "steady_states");
  auto out = job.csv("steady.csv",
                     "branch,intensity,A1_re,A1_im,A2_re,A2_im,abs_A2,phase1,phase2,residual,q_valid,marginal");
  json rows = json::array();
  for (size_t i = 0; i < n && i < states.size(); ++i) {
    const auto& s = states[i];
    const double a2[2] = {s.a2_re, s.a2_im};
    double margin;
    int valid;
    check(shgq_q_validity(a2, 1, &margin, &valid, nullptr), "q_validity");
    const double I = s.a1_re * s.a1_re + s.a1_im * s.a1_im;
    out << i << ',' << I << ',' << s.a1_re << ',' << s.a1_im << ',' << s.a2_re << ',' << s.a2_im << ','
        << std::hypot(s.a2_re, s.a2_im) << ',' << s.phase1 << ',' << s.phase2 << ',' << s.residual << ',' << valid
        << ',' << s.marginal << '\n';
    rows.push_back({{"intensity", I}, {"abs_A2", std::hypot(s.a2_re, s.a2_im)}, {"q_valid", valid != 0}});
  }
  job.result.summary["steady_states"] = rows;
  if (r.have_threshold) {
    double rate;
    check(shgq_growth_rate(&r.p, r.k_c, &rate), "growth_rate");
    job.result.summary["growth_rate_at_k_c"] = rate;
  }
}

void bifurcation(Job& job) {
  const auto& c = job.cfg;
  const long n = c.integer("scan.points");
  const double lo = c.real("scan.delta2_min"), hi = c.real("scan.delta2_max");
  std::vector<double> d2(n);
  for (long i = 0; i < n; ++i) d2[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  const auto o = job.threshold_options();
  shgq_scan* raw = nullptr;
  check(shgq_bifurcation_scan(d2.data(), d2.size(), c.real("model.delta1"), c.real("model.gamma"), &o,
                              job.spec.threads, &raw),
        "bifurcation_scan");
  std::unique_ptr<shgq_scan, ScanDeleter> scan(raw);
  auto out = job.csv("bifurcation.csv",
                     "delta2,E_stationary,k_stationary,A2_stationary,E_oscillatory,k_oscillatory,omega_oscillatory,"
                     "A2_oscillatory,E_self_pulsing,omega_self_pulsing,A2_self_pulsing,primary,note");
  auto opt = [](int has, double v) { return has ? v : kNaN; };
  int failures = 0;
  for (size_t i = 0; i < shgq_scan_size(raw); ++i) {
    shgq_scan_row r;
    check(shgq_scan_row_get(raw, i, &r), "scan_row");
    const std::string note = shgq_scan_note(raw, i);
    failures += !note.empty();
    out << r.delta2 << ',' << opt(r.has_stationary, r.stationary.E_t) << ','
        << opt(r.has_stationary, r.stationary.k_c) << ',' << r.A2_stationary << ','
        << opt(r.has_oscillatory, r.oscillatory.E_t) << ',' << opt(r.has_oscillatory, r.oscillatory.k_c) << ','
        << opt(r.has_oscillatory, r.oscillatory.lambda_imag) << ',' << r.A2_oscillatory << ','
        << opt(r.has_self_pulsing, r.self_pulsing.E_t) << ','
        << opt(r.has_self_pulsing, r.self_pulsing.lambda_imag) << ',' << r.A2_self_pulsing << ','
        << kind_name(r.primary) << ',' << quoted(note) << '\n';
  }
  job.result.summary["scan"] = {{"points", n}, {"delta2_min", lo}, {"delta2_max", hi}, {"rows_with_notes", failures}};
}

void linear_corr(Job& job) {
  const Resolved r = job.resolve();
  if (!r.have_threshold) throw ConfigError("linear-corr needs a stationary threshold for the k range");
  const double k_max = job.cfg.has("spectrum.k_max") ? job.cfg.real("spectrum.k_max") : 2.5 * r.k_c;
  const long n = job.cfg.integer("spectrum.points");
  std::vector<double> k(n);
  for (long i = 0; i < n; ++i) k[i] = n == 1 ? 0.0 : k_max * i / (n - 1);
  std::vector<shgq_prediction> pred(n);
  check(shgq_correlation_spectrum(&r.p, k.data(), k.size(), job.spec.threads, pred.data()), "correlation_spectrum");
  auto out = job.csv("spectrum.csv",
                     "k,cn11,cn22,cn12_same,cn12_opp,c11_minus,c11_plus,c22_minus,c22_plus,c12_same_minus,"
                     "c12_same_plus,c12_opp_minus,c12_opp_plus,gminus11_re,gminus11_im,gminus12_re,gminus12_im,"
                     "gminus22_re,gminus22_im,gplus11_re,gplus11_im,gplus12_re,gplus12_im,gplus22_re,gplus22_im");
  std::size_t peak = n > 1 ? 1 : 0;
  for (long i = 0; i < n; ++i) {
    const auto& p = pred[i];
    out << p.k << ',' << p.cn11 << ',' << p.cn22 << ',' << p.cn12_same << ',' << p.cn12_opp << ','
        << p.self_minus[0] << ',' << p.self_plus[0] << ',' << p.self_minus[1] << ',' << p.self_plus[1] << ','
        << p.cross_same_minus << ',' << p.cross_same_plus << ',' << p.cross_opp_minus << ',' << p.cross_opp_plus;
    for (int e : {0, 1, 3}) out << ',' << p.g_minus[2 * e] << ',' << p.g_minus[2 * e + 1];
    for (int e : {0, 1, 3}) out << ',' << p.g_plus[2 * e] << ',' << p.g_plus[2 * e + 1];
    out << '\n';
    if (i > 0 && p.self_plus[0] > pred[peak].self_plus[0]) peak = i;
  }
  job.result.summary["spectrum"] = {{"points", n},
                                    {"k_max", k_max},
                                    {"cn12_00", pred[0].cn12_same},
                                    {"max_c11_plus", pred[peak].self_plus[0]},
                                    {"argmax_c11_plus", pred[peak].k}};
}

std::string snapshot_name(const Config& c) {
  const std::string mode = c.text("run.snapshots");
  if (mode == "none") return {};
  return mode == "csv" ? "snapshots.csv" : "snapshots.bin";
}

void theory_table(Job& job, const shgq_params& p, int N, double L, const std::string& name) {
  auto out = job.csv(name,
                     "k,cn11,cn22,cn12_same,cn12_opp,c11_minus,c11_plus,c22_minus,c22_plus,c12_same_minus,"
                     "c12_same_plus,c12_opp_minus,c12_opp_plus");
  const double dk = 2.0 * M_PI / L;
  for (int m = 1; m < N / 2; ++m) {
    shgq_prediction r;
    check(shgq_predict(&p, m * dk, &r), "predict");
    out << r.k << ',' << r.cn11 << ',' << r.cn22 << ',' << r.cn12_same << ',' << r.cn12_opp << ',' << r.self_minus[0]
        << ',' << r.self_plus[0] << ',' << r.self_minus[1] << ',' << r.self_plus[1] << ',' << r.cross_same_minus
        << ',' << r.cross_same_plus << ',' << r.cross_opp_minus << ',' << r.cross_opp_plus << '\n';
  }
}

void simulate(Job& job) {
  const Resolved r = job.resolve();
  const std::string snap = snapshot_name(job.cfg);
  const std::string snap_path = snap.empty() ? std::string{} : job.path(snap);
  const auto e = job.ensemble(snap_path);
  Estimator est = job.run_ensemble(r.p, e, "main");
  if (!snap.empty()) job.result.outputs.push_back(snap);
  job.write_observables(est, "observables");
  if (r.have_threshold && r.p.E < r.E_t) theory_table(job, r.p, e.run.N, e.run.L, "theory.csv");
  if (r.have_threshold) {
    const int m = static_cast<int>(std::lround(r.k_c * e.run.L / (2.0 * M_PI)));
    if (m >= 1 && m < e.run.N / 2) {
      job.result.summary["critical_mode"] = {{"mode", m},
                                             {"k", m * 2.0 * M_PI / e.run.L},
                                             {"tau_int_samples", num(est.tau(1, m))},
                                             {"cn11_opp", to_json(est.corr(1, m, 1, -m))}};
    }
  }
}

void analyze(Job& job) {
  const std::string input = job.cfg.text("analyze.input");
  shgq_estimator* raw = nullptr;
  check(shgq_analyze_snapshots(input.c_str(), job.cfg.real("model.n_th"),
                               static_cast<int>(job.cfg.integer("analyze.batches")),
                               job.cfg.boolean("run.full_pairs") ? 1 : 0, &raw),
        "analyze_snapshots");
  Estimator est(raw);
  job.write_observables(est, "observables");
  job.result.summary["input"] = input;
  job.result.summary["samples"] = est.samples();
  job.result.summary["grid_N"] = est.N();
}

}  // namespace

JobResult run_job(const JobSpec& spec) {
  validate_job(spec);
  Job job(spec);
  const auto start = std::chrono::steady_clock::now();
  if (spec.command == "steady") {
    steady(job);
  } else if (spec.command == "bifurcation") {
    bifurcation(job);
  } else if (spec.command == "linear-corr") {
    linear_corr(job);
  } else if (spec.command == "simulate") {
    simulate(job);
  } else if (spec.command == "analyze") {
    analyze(job);
  } else {
    reproduce_figure(job, spec.figure);
  }
  job.result.summary["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!job.result.checks.empty()) {
    json checks = json::array();
    for (const auto& c : job.result.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    job.result.summary["checks"] = checks;
  }
  std::ofstream s(job.path("summary.json"));
  s << job.result.summary.dump(2) << "\n";
  job.result.outputs.push_back("summary.json");
  return job.result;
}

}  // namespace shgq_cli
