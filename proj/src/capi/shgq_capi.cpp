#include "shgq/shgq.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "estimators.hpp"

#ifndef SHGQ_VERSION_STRING
#define SHGQ_VERSION_STRING "0.0.0"
#endif

struct shgq_scan {
  std::vector<shgq::ScanRow> rows;
};

struct shgq_estimator {
  shgq::BatchedEstimator est;
};

struct shgq_observables {
  std::vector<shgq::Observable> obs;
};

struct shgq_snapshots {
  shgq::SnapshotFile file;
};

namespace {

thread_local std::string g_last_error;

struct ApiError {
  shgq_status status;
  std::string message;
};

void require(const void* p, const char* name) {
  if (!p) throw ApiError{SHGQ_ERR_NULL_ARGUMENT, std::string("null argument: ") + name};
}

template <class F>
shgq_status guarded(F&& f) noexcept {
  try {
    f();
    g_last_error.clear();
    return SHGQ_OK;
  } catch (const ApiError& e) {
    g_last_error = e.message;
    return e.status;
  } catch (const shgq::Error& e) {
    g_last_error = e.what();
    return static_cast<shgq_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SHGQ_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SHGQ_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return SHGQ_ERR_INTERNAL;
  }
}

shgq::DimensionlessParams to_core(const shgq_params* p) {
  require(p, "params");
  shgq::DimensionlessParams d;
  d.delta1 = p->delta1;
  d.delta2 = p->delta2;
  d.gamma = p->gamma;
  d.E = p->E;
  d.n_th = p->n_th;
  d.validate();
  return d;
}

shgq::ThresholdOptions to_core(const shgq_threshold_options* o) {
  shgq::ThresholdOptions t;
  if (!o) return t;
  t.k_min = o->k_min;
  t.k_max = o->k_max;
  t.k_points = o->k_points;
  t.k_tol = o->k_tol;
  t.E_min = o->E_min;
  t.E_max = o->E_max;
  t.E_scan_points = o->E_scan_points;
  t.E_tol = o->E_tol;
  t.zero_k_only = o->zero_k_only != 0;
  if (o->filter < 0 || o->filter > 2) throw ApiError{SHGQ_ERR_INVALID_PARAMETER, "unknown eigen filter"};
  t.filter = static_cast<shgq::EigenFilter>(o->filter);
  t.branch = o->branch;
  t.first_crossing = o->first_crossing != 0;
  return t;
}

shgq::RunConfig to_core(const shgq_params* p, const shgq_run_config* c) {
  require(c, "run config");
  shgq::RunConfig r;
  r.p = to_core(p);
  r.grid = {c->N, c->L};
  r.dt = c->dt;
  r.t_transient = c->t_transient;
  r.t_total = c->t_total;
  if (c->sample_stride < 1 || c->sample_stride > 1000000000L)
    throw ApiError{SHGQ_ERR_INVALID_PARAMETER, "sample_stride out of range"};
  r.sample_stride = static_cast<int>(c->sample_stride);
  r.seed = c->seed;
  r.trajectory = c->trajectory;
  r.perturbation = c->perturbation;
  r.validate();
  return r;
}

shgq_threshold from_core(const shgq::ThresholdResult& t) {
  return {t.E_t, t.k_c, t.lambda_imag, static_cast<int>(t.kind)};
}

shgq_run_report from_core(const shgq::RunReport& r) {
  return {r.steps, r.samples, r.discards, r.completed ? 1 : 0, r.abort_time, r.wall_seconds, r.min_margin};
}

shgq_estimate from_core(const shgq::Estimate& e) { return {e.value, e.standard_error, e.n_effective}; }

void put_mat(const shgq::Mat2& m, double* out) {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      out[2 * (2 * i + j)] = m(i, j).real();
      out[2 * (2 * i + j) + 1] = m(i, j).imag();
    }
}

shgq_prediction from_core(const shgq::CorrelationPrediction& r) {
  shgq_prediction o{};
  o.k = r.k;
  o.cn11 = r.cn.c11;
  o.cn22 = r.cn.c22;
  o.cn12_same = r.cn.c12_same;
  o.cn12_opp = r.cn.c12_opp;
  for (int j = 0; j < 2; ++j) {
    o.self_minus[j] = r.self.minus[j];
    o.self_plus[j] = r.self.plus[j];
  }
  o.cross_same_minus = r.cross_same.minus;
  o.cross_same_plus = r.cross_same.plus;
  o.cross_opp_minus = r.cross_opp.minus;
  o.cross_opp_plus = r.cross_opp.plus;
  put_mat(r.G.Gminus, o.g_minus);
  put_mat(r.G.Gplus, o.g_plus);
  return o;
}

void put_field(const std::vector<shgq::Complex>& v, double* out) {
  std::memcpy(out, v.data(), v.size() * sizeof(shgq::Complex));
}

shgq::ModeRef mode(const shgq::BatchedEstimator& e, int field, int m) {
  const int N = e.total().grid().N;
  if (field != 1 && field != 2) throw ApiError{SHGQ_ERR_OUT_OF_RANGE, "field must be 1 or 2"};
  if (m <= -N / 2 || m > N / 2) throw ApiError{SHGQ_ERR_OUT_OF_RANGE, "mode index outside the grid"};
  return {field, m};
}

const shgq::Observable& observable(const shgq_observables* o, size_t i) {
  require(o, "observables");
  if (i >= o->obs.size()) throw ApiError{SHGQ_ERR_OUT_OF_RANGE, "observable index out of range"};
  return o->obs[i];
}

template <class F>
void transform(const double* in, int N, double L, double* out, F f) {
  if (N < 1 || (N & (N - 1)) != 0) throw ApiError{SHGQ_ERR_INVALID_PARAMETER, "N must be a power of two"};
  require(in, "input");
  require(out, "output");
  shgq::GridSpec g{N, L};
  g.validate();
  const auto* z = reinterpret_cast<const shgq::Complex*>(in);
  shgq::FieldGrid grid;
  grid.grid = g;
  grid.A1.assign(z, z + N);
  grid.A2.assign(N, shgq::Complex{});
  put_field(f(grid, shgq::Fft(N)), out);
}

}  // namespace

extern "C" {

const char* shgq_last_error(void) { return g_last_error.c_str(); }

const char* shgq_status_name(shgq_status s) {
  switch (s) {
    case SHGQ_OK: return "ok";
    case SHGQ_ERR_NULL_ARGUMENT: return "null-argument";
    case SHGQ_ERR_OUT_OF_RANGE: return "out-of-range";
    case SHGQ_ERR_INTERNAL: return "internal";
    default:
      if (s >= SHGQ_ERR_INVALID_PARAMETER && s <= SHGQ_ERR_SINK_FAILURE)
        return shgq::to_string(static_cast<shgq::ErrorCode>(static_cast<int>(s)));
      return "unknown";
  }
}

const char* shgq_version(void) { return SHGQ_VERSION_STRING; }

void shgq_params_default(shgq_params* p) {
  if (!p) return;
  const shgq::DimensionlessParams d;
  *p = {d.delta1, d.delta2, d.gamma, d.E, d.n_th};
}

void shgq_physical_params_default(shgq_physical_params* p) {
  if (!p) return;
  const shgq::PhysicalParams d;
  *p = {d.gamma1, d.gamma2, d.delta1, d.delta2, d.g, d.omega1, d.c, d.E_in};
}

shgq_status shgq_rescale_physical(const shgq_physical_params* in, shgq_params* out, shgq_scales* scales) {
  return guarded([&] {
    require(in, "physical params");
    require(out, "output params");
    shgq::PhysicalParams p;
    p.gamma1 = in->gamma1;
    p.gamma2 = in->gamma2;
    p.delta1 = in->delta1;
    p.delta2 = in->delta2;
    p.g = in->g;
    p.omega1 = in->omega1;
    p.c = in->c;
    p.E_in = in->E_in;
    const auto r = shgq::rescale_physical(p);
    *out = {r.params.delta1, r.params.delta2, r.params.gamma, r.params.E, r.params.n_th};
    if (scales) *scales = {r.scales.l_d, r.scales.time_unit, r.scales.field_scale};
  });
}

shgq_status shgq_steady_states(const shgq_params* p, shgq_steady_state* out, size_t capacity, size_t* count) {
  return guarded([&] {
    const auto states = shgq::steady_state(to_core(p));
    if (capacity > 0) require(out, "output states");
    for (size_t i = 0; i < states.size() && i < capacity; ++i) {
      const auto& s = states[i];
      out[i] = {s.A1.real(), s.A1.imag(), s.A2.real(), s.A2.imag(), s.phase1, s.phase2, s.residual,
                s.marginal ? 1 : 0};
    }
    if (count) *count = states.size();
  });
}

shgq_status shgq_q_validity(const double* a2, size_t n, double* margin, int* valid, size_t* worst_index) {
  return guarded([&] {
    if (n > 0) require(a2, "a2");
    const auto* z = reinterpret_cast<const shgq::Complex*>(a2);
    const auto q = shgq::q_validity(std::span<const shgq::Complex>(z, n));
    if (margin) *margin = q.margin;
    if (valid) *valid = q.valid ? 1 : 0;
    if (worst_index) *worst_index = q.worst_index;
  });
}

void shgq_threshold_options_default(shgq_threshold_options* o) {
  if (!o) return;
  const shgq::ThresholdOptions t;
  *o = {t.k_min, t.k_max, t.k_points, t.k_tol, t.E_min, t.E_max, t.E_scan_points, t.E_tol,
        t.zero_k_only ? 1 : 0, static_cast<int>(t.filter), t.branch, t.first_crossing ? 1 : 0};
}

shgq_status shgq_eigenvalues(const shgq_params* p, double k, double re[4], double im[4]) {
  return guarded([&] {
    require(re, "re");
    require(im, "im");
    const auto d = to_core(p);
    const auto lin = shgq::linearize(d, shgq::lower_steady_state(d), k);
    for (int i = 0; i < 4; ++i) {
      re[i] = lin.eigenvalues(i).real();
      im[i] = lin.eigenvalues(i).imag();
    }
  });
}

shgq_status shgq_growth_rate(const shgq_params* p, double k, double* rate) {
  return guarded([&] {
    require(rate, "rate");
    const auto d = to_core(p);
    *rate = shgq::growth_rate(d, shgq::lower_steady_state(d), k);
  });
}

shgq_status shgq_find_threshold(const shgq_params* p, const shgq_threshold_options* o, shgq_threshold* out) {
  return guarded([&] {
    require(out, "threshold");
    *out = from_core(shgq::find_threshold(to_core(p), to_core(o)));
  });
}

shgq_status shgq_bifurcation_scan(const double* delta2, size_t n, double delta1, double gamma,
                                  const shgq_threshold_options* o, int threads, shgq_scan** out) {
  return guarded([&] {
    require(out, "scan");
    if (n > 0) require(delta2, "delta2");
    auto s = std::make_unique<shgq_scan>();
    s->rows = shgq::bifurcation_scan(std::vector<double>(delta2, delta2 + n), delta1, gamma, to_core(o), threads);
    *out = s.release();
  });
}

size_t shgq_scan_size(const shgq_scan* s) { return s ? s->rows.size() : 0; }

shgq_status shgq_scan_row_get(const shgq_scan* s, size_t i, shgq_scan_row* out) {
  return guarded([&] {
    require(s, "scan");
    require(out, "row");
    if (i >= s->rows.size()) throw ApiError{SHGQ_ERR_OUT_OF_RANGE, "scan row out of range"};
    const auto& r = s->rows[i];
    shgq_scan_row o{};
    o.delta2 = r.delta2;
    o.has_stationary = r.stationary.has_value();
    o.has_oscillatory = r.oscillatory.has_value();
    o.has_self_pulsing = r.self_pulsing.has_value();
    if (r.stationary) o.stationary = from_core(*r.stationary);
    if (r.oscillatory) o.oscillatory = from_core(*r.oscillatory);
    if (r.self_pulsing) o.self_pulsing = from_core(*r.self_pulsing);
    o.A2_stationary = r.A2_stationary;
    o.A2_oscillatory = r.A2_oscillatory;
    o.A2_self_pulsing = r.A2_self_pulsing;
    o.primary = r.primary ? static_cast<int>(*r.primary) : -1;
    *out = o;
  });
}

const char* shgq_scan_note(const shgq_scan* s, size_t i) {
  if (!s || i >= s->rows.size()) return "";
  return s->rows[i].note.c_str();
}

void shgq_scan_free(shgq_scan* s) { delete s; }

shgq_status shgq_predict(const shgq_params* p, double k, shgq_prediction* out) {
  return guarded([&] {
    require(out, "prediction");
    const auto d = to_core(p);
    *out = from_core(shgq::predict(d, shgq::lower_steady_state(d), k));
  });
}

shgq_status shgq_correlation_spectrum(const shgq_params* p, const double* k, size_t n, int threads,
                                      shgq_prediction* out) {
  return guarded([&] {
    if (n == 0) return;
    require(k, "k");
    require(out, "predictions");
    const auto d = to_core(p);
    const auto r = shgq::correlation_spectrum(d, shgq::lower_steady_state(d), std::vector<double>(k, k + n), threads);
    for (size_t i = 0; i < n; ++i) out[i] = from_core(r[i]);
  });
}

void shgq_run_config_default(shgq_run_config* c) {
  if (!c) return;
  const shgq::RunConfig r;
  *c = {r.grid.N, r.grid.L, r.dt, r.t_transient, r.t_total, r.sample_stride, r.seed, r.trajectory, r.perturbation};
}

double shgq_mode_kappa(const shgq_params* p, int N, double L) {
  double out = std::nan("");
  guarded([&] { out = shgq::mode_kappa(to_core(p), shgq::GridSpec{N, L}); });
  return out;
}

shgq_status shgq_run_trajectory(const shgq_params* p, const shgq_run_config* c, shgq_snapshot_fn fn, void* user,
                                shgq_run_report* report, double* final_a1, double* final_a2) {
  return guarded([&] {
    const auto cfg = to_core(p, c);
    const int N = cfg.grid.N;
    std::vector<double> b1(2 * N), b2(2 * N);
    shgq::SnapshotSink sink;
    if (fn) {
      sink = [&](const shgq::Snapshot& s) {
        put_field(s.field->a1, b1.data());
        put_field(s.field->a2, b2.data());
        if (fn(user, s.t, s.trajectory, b1.data(), b2.data(), N) != 0)
          throw shgq::Error(shgq::ErrorCode::SinkFailure, "snapshot callback requested abort");
      };
    }
    shgq::FieldGrid final_state;
    const auto r = shgq::run_trajectory(cfg, sink, final_state);
    if (report) *report = from_core(r);
    if (final_a1) put_field(final_state.A1, final_a1);
    if (final_a2) put_field(final_state.A2, final_a2);
  });
}

shgq_status shgq_far_field(const double* near, int N, double L, double* far) {
  return guarded([&] { transform(near, N, L, far, [](const shgq::FieldGrid& g, const shgq::Fft& fft) { return shgq::far_field(g, fft).a1; }); });
}

shgq_status shgq_near_field(const double* far, int N, double L, double* near) {
  return guarded([&] {
    transform(far, N, L, near, [](const shgq::FieldGrid& g, const shgq::Fft& fft) {
      shgq::FarField f{g.A1, g.A2};
      return shgq::near_field(g.grid, f, fft).A1;
    });
  });
}

void shgq_ensemble_config_default(shgq_ensemble_config* c) {
  if (!c) return;
  const shgq::EnsembleConfig e;
  shgq_run_config_default(&c->run);
  c->trajectories = e.trajectories;
  c->threads = e.threads;
  c->batches_per_trajectory = e.batches_per_trajectory;
  c->full_pairs = e.full_pairs ? 1 : 0;
  c->snapshot_path = nullptr;
  c->snapshot_format = SHGQ_SNAPSHOT_BINARY;
}

shgq_status shgq_run_ensemble(const shgq_params* p, const shgq_ensemble_config* c, shgq_run_report* reports,
                              shgq_ensemble_summary* summary, shgq_estimator** out) {
  return guarded([&] {
    require(c, "ensemble config");
    shgq::EnsembleConfig cfg;
    cfg.run = to_core(p, &c->run);
    cfg.trajectories = c->trajectories;
    cfg.threads = c->threads;
    cfg.batches_per_trajectory = c->batches_per_trajectory;
    cfg.full_pairs = c->full_pairs != 0;
    // One part per trajectory keeps the file independent of the thread schedule.
    std::vector<std::unique_ptr<shgq::SnapshotWriter>> writers;
    std::vector<std::string> parts;
    if (c->snapshot_path) {
      if (c->snapshot_format != SHGQ_SNAPSHOT_BINARY && c->snapshot_format != SHGQ_SNAPSHOT_CSV)
        throw ApiError{SHGQ_ERR_INVALID_PARAMETER, "unknown snapshot format"};
      const auto format =
          c->snapshot_format == SHGQ_SNAPSHOT_CSV ? shgq::SnapshotFormat::Csv : shgq::SnapshotFormat::Binary;
      for (int i = 0; i < std::max(cfg.trajectories, 0); ++i) {
        parts.push_back(std::string(c->snapshot_path) + ".part" + std::to_string(i));
        writers.push_back(std::make_unique<shgq::SnapshotWriter>(parts.back(), cfg.run.grid, format));
      }
      cfg.extra_sink = [&writers](const shgq::Snapshot& s) { writers.at(s.trajectory)->write(s); };
    }
    auto cleanup = [&] {
      for (auto& w : writers) w->close();
      for (const auto& p : parts) std::remove(p.c_str());
    };
    shgq::EnsembleResult r;
    try {
      r = shgq::run_ensemble(cfg);
      for (auto& w : writers) w->close();
      if (!parts.empty()) shgq::concatenate_snapshots(parts, c->snapshot_path);
    } catch (...) {
      cleanup();
      throw;
    }
    cleanup();
    if (reports)
      for (size_t i = 0; i < r.reports.size(); ++i) reports[i] = from_core(r.reports[i]);
    if (summary) {
      *summary = {cfg.trajectories, r.discards, r.estimator.count(), r.wall_seconds, r.sample_interval,
                  shgq::mode_kappa(cfg.run.p, cfg.run.grid)};
    }
    if (out) *out = new shgq_estimator{std::move(r.estimator)};
  });
}

shgq_status shgq_analyze_snapshots(const char* path, double n_th, int batches_per_trajectory, int full_pairs,
                                   shgq_estimator** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "estimator");
    const auto file = shgq::read_snapshots(path);
    shgq::DimensionlessParams p;
    p.n_th = n_th;
    p.validate();
    const double kappa = shgq::mode_kappa(p, file.grid);
    *out = new shgq_estimator{shgq::analyze_snapshots(file, kappa, batches_per_trajectory, full_pairs != 0)};
  });
}

void shgq_estimator_free(shgq_estimator* e) { delete e; }

shgq_status shgq_estimator_grid(const shgq_estimator* e, int* N, double* L, long* samples, double* kappa) {
  return guarded([&] {
    require(e, "estimator");
    const auto& t = e->est.total();
    if (N) *N = t.grid().N;
    if (L) *L = t.grid().L;
    if (samples) *samples = t.count();
    if (kappa) *kappa = t.kappa();
  });
}

shgq_status shgq_mean_intensity(const shgq_estimator* e, int field, int m, shgq_estimate* out) {
  return guarded([&] {
    require(e, "estimator");
    require(out, "estimate");
    const auto a = mode(e->est, field, m);
    *out = from_core(e->est.estimate([&](const auto& acc) { return acc.mean(a); }, {a}));
  });
}

shgq_status shgq_corr_normalized(const shgq_estimator* e, int f1, int m1, int f2, int m2, shgq_estimate* out) {
  return guarded([&] {
    require(e, "estimator");
    require(out, "estimate");
    const auto a = mode(e->est, f1, m1), b = mode(e->est, f2, m2);
    *out = from_core(e->est.estimate([&](const auto& acc) { return shgq::corr_normalized(acc, a, b); }, {a, b}));
  });
}

shgq_status shgq_variance_normalized(const shgq_estimator* e, int f1, int m1, int f2, int m2, int sign,
                                     shgq_estimate* out) {
  return guarded([&] {
    require(e, "estimator");
    require(out, "estimate");
    const auto a = mode(e->est, f1, m1), b = mode(e->est, f2, m2);
    *out = from_core(
        e->est.estimate([&](const auto& acc) { return shgq::variance_normalized(acc, a, b, sign); }, {a, b}));
  });
}

shgq_status shgq_estimate_k0(const shgq_estimator* e, shgq_k0_estimate* out) {
  return guarded([&] {
    require(e, "estimator");
    require(out, "estimate");
    const shgq::ModeRef z1{1, 0}, z2{2, 0};
    auto est = [&](auto f) { return from_core(e->est.estimate(f, {z1, z2})); };
    using Acc = shgq::CorrelationAccumulator;
    out->cn12 = est([](const Acc& a) { return shgq::estimate_k0(a).cn12; });
    out->cross_minus = est([](const Acc& a) { return shgq::estimate_k0(a).variance.cross.minus; });
    out->cross_plus = est([](const Acc& a) { return shgq::estimate_k0(a).variance.cross.plus; });
    out->self_plus[0] = est([](const Acc& a) { return shgq::estimate_k0(a).variance.self_plus[0]; });
    out->self_plus[1] = est([](const Acc& a) { return shgq::estimate_k0(a).variance.self_plus[1]; });
  });
}

shgq_status shgq_tau_int(const shgq_estimator* e, int field, int m, double* tau) {
  return guarded([&] {
    require(e, "estimator");
    require(tau, "tau");
    *tau = e->est.tau_int(mode(e->est, field, m));
  });
}

shgq_status shgq_standard_observables(const shgq_estimator* e, shgq_observables** out) {
  return guarded([&] {
    require(e, "estimator");
    require(out, "observables");
    *out = new shgq_observables{shgq::standard_observables(e->est)};
  });
}

size_t shgq_observables_count(const shgq_observables* o) { return o ? o->obs.size() : 0; }

const char* shgq_observable_name(const shgq_observables* o, size_t i) {
  if (!o || i >= o->obs.size()) return "";
  return o->obs[i].name.c_str();
}

size_t shgq_observable_rows(const shgq_observables* o, size_t i) {
  if (!o || i >= o->obs.size()) return 0;
  return o->obs[i].rows.size();
}

shgq_status shgq_observable_row(const shgq_observables* o, size_t i, size_t row, double* k, shgq_estimate* out) {
  return guarded([&] {
    const auto& ob = observable(o, i);
    if (row >= ob.rows.size()) throw ApiError{SHGQ_ERR_OUT_OF_RANGE, "observable row out of range"};
    if (k) *k = ob.rows[row].k;
    if (out) *out = from_core(ob.rows[row].e);
  });
}

shgq_status shgq_observable_write_csv(const shgq_observables* o, size_t i, const char* path) {
  return guarded([&] {
    require(path, "path");
    shgq::write_observable_csv(path, observable(o, i));
  });
}

void shgq_observables_free(shgq_observables* o) { delete o; }

shgq_status shgq_snapshots_read(const char* path, shgq_snapshots** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "snapshots");
    *out = new shgq_snapshots{shgq::read_snapshots(path)};
  });
}

shgq_status shgq_snapshots_info(const shgq_snapshots* s, int* N, double* L, size_t* records) {
  return guarded([&] {
    require(s, "snapshots");
    if (N) *N = s->file.grid.N;
    if (L) *L = s->file.grid.L;
    if (records) *records = s->file.records.size();
  });
}

shgq_status shgq_snapshots_record(const shgq_snapshots* s, size_t i, double* t, uint64_t* trajectory, double* a1,
                                  double* a2) {
  return guarded([&] {
    require(s, "snapshots");
    if (i >= s->file.records.size()) throw ApiError{SHGQ_ERR_OUT_OF_RANGE, "record index out of range"};
    const auto& r = s->file.records[i];
    if (t) *t = r.t;
    if (trajectory) *trajectory = r.trajectory;
    if (a1) put_field(r.field.a1, a1);
    if (a2) put_field(r.field.a2, a2);
  });
}

void shgq_snapshots_free(shgq_snapshots* s) { delete s; }

}  // extern "C"
