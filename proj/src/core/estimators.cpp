#include "estimators.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace shgq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

long key(int a, int b, int width) { return static_cast<long>(std::min(a, b)) * width + std::max(a, b); }

}  // namespace

CorrelationAccumulator::CorrelationAccumulator(const GridSpec& grid, double kappa, bool full)
    : grid_(grid), kappa_(kappa), full_(full) {
  grid.validate();
  if (!(kappa > 0.0)) throw Error(ErrorCode::InvalidParameter, "accumulator: kappa must be positive");
  const int size = 2 * grid.N;
  mean_.assign(size, 0.0);
  m2_.assign(size, 0.0);
  scratch_old_.assign(size, 0.0);
  scratch_new_.assign(size, 0.0);
  build_pairs();
  co_.assign(pairs_.size(), 0.0);
}

void CorrelationAccumulator::build_pairs() {
  const int N = grid_.N;
  const int width = 2 * N;
  auto add = [&](int a, int b) {
    if (a == b) return;
    const long k = key(a, b, width);
    if (slot_.count(k)) return;
    slot_.emplace(k, static_cast<long>(pairs_.size()));
    pairs_.emplace_back(std::min(a, b), std::max(a, b));
  };
  if (full_) {
    for (int a = 0; a < width; ++a)
      for (int b = a + 1; b < width; ++b) add(a, b);
    return;
  }
  for (int n = 0; n < N; ++n) {
    const int m = grid_.mirror(n);
    add(n, m);
    add(N + n, N + m);
    add(n, N + m);
    add(n, N + n);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) add(i * N + n, j * N);
  }
}

int CorrelationAccumulator::index(ModeRef a) const {
  if (a.field != 1 && a.field != 2) throw Error(ErrorCode::InvalidParameter, "field index must be 1 or 2");
  if (grid_.N == 0) throw Error(ErrorCode::InvalidParameter, "accumulator is not configured");
  return (a.field - 1) * grid_.N + grid_.mode_of(a.mode);
}

long CorrelationAccumulator::pair_slot(int a, int b) const {
  const auto it = slot_.find(key(a, b, 2 * grid_.N));
  return it == slot_.end() ? -1 : it->second;
}

void CorrelationAccumulator::accumulate(const FarField& f) {
  const int N = grid_.N;
  if (static_cast<int>(f.a1.size()) != N || static_cast<int>(f.a2.size()) != N) {
    throw Error(ErrorCode::ShapeMismatch, "accumulate: snapshot does not match the accumulator grid");
  }
  ++n_;
  const double inv = 1.0 / static_cast<double>(n_);
  for (int j = 0; j < 2; ++j) {
    const auto& a = j == 0 ? f.a1 : f.a2;
    for (int n = 0; n < N; ++n) {
      const int idx = j * N + n;
      const double x = std::norm(a[n]);
      const double d_old = x - mean_[idx];
      mean_[idx] += d_old * inv;
      const double d_new = x - mean_[idx];
      m2_[idx] += d_old * d_new;
      scratch_old_[idx] = d_old;
      scratch_new_[idx] = d_new;
    }
  }
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    co_[p] += scratch_old_[pairs_[p].first] * scratch_new_[pairs_[p].second];
  }
  const std::array<double, 4> z{f.a1[0].real(), f.a1[0].imag(), f.a2[0].real(), f.a2[0].imag()};
  std::array<double, 4> z_old{}, z_new{};
  for (int i = 0; i < 4; ++i) {
    z_old[i] = z[i] - zmean_[i];
    zmean_[i] += z_old[i] * inv;
    z_new[i] = z[i] - zmean_[i];
  }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) zco_[4 * i + j] += z_old[i] * z_new[j];
}

void CorrelationAccumulator::merge(const CorrelationAccumulator& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  if (o.grid_.N != grid_.N || o.grid_.L != grid_.L || o.full_ != full_ || o.kappa_ != kappa_) {
    throw Error(ErrorCode::ShapeMismatch, "merge: accumulators have different configurations");
  }
  const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
  const double n = na + nb;
  const double w = na * nb / n;
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    const double d = o.mean_[i] - mean_[i];
    scratch_old_[i] = d;
    m2_[i] += o.m2_[i] + d * d * w;
    mean_[i] += d * nb / n;
  }
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    co_[p] += o.co_[p] + scratch_old_[pairs_[p].first] * scratch_old_[pairs_[p].second] * w;
  }
  std::array<double, 4> d{};
  for (int i = 0; i < 4; ++i) d[i] = o.zmean_[i] - zmean_[i];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) zco_[4 * i + j] += o.zco_[4 * i + j] + d[i] * d[j] * w;
  for (int i = 0; i < 4; ++i) zmean_[i] += d[i] * nb / n;
  n_ += o.n_;
}

bool CorrelationAccumulator::tracks(ModeRef a, ModeRef b) const {
  const int ia = index(a), ib = index(b);
  return ia == ib || pair_slot(ia, ib) >= 0;
}

double CorrelationAccumulator::mean(ModeRef a) const { return mean_[index(a)]; }

double CorrelationAccumulator::variance(ModeRef a) const {
  if (n_ < 2) throw Error(ErrorCode::InsufficientSamples, "variance: fewer than two samples");
  return m2_[index(a)] / static_cast<double>(n_ - 1);
}

double CorrelationAccumulator::covariance(ModeRef a, ModeRef b) const {
  const int ia = index(a), ib = index(b);
  if (ia == ib) return variance(a);
  const long s = pair_slot(ia, ib);
  if (s < 0) throw Error(ErrorCode::Unsupported, "covariance: mode pair is not tracked");
  if (n_ < 2) throw Error(ErrorCode::InsufficientSamples, "covariance: fewer than two samples");
  return co_[s] / static_cast<double>(n_ - 1);
}

Complex CorrelationAccumulator::mean_amplitude0(int field) const {
  if (field != 1 && field != 2) throw Error(ErrorCode::InvalidParameter, "field index must be 1 or 2");
  const int o = 2 * (field - 1);
  return {zmean_[o], zmean_[o + 1]};
}

namespace {

// Covariances c(p, q) of the real components (x1, y1, x2, y2).
template <class C>
std::pair<Mat2, Mat2> complex_moments(C c) {
  Mat2 S, P;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double xx = c(2 * i, 2 * j), yy = c(2 * i + 1, 2 * j + 1);
      const double xy = c(2 * i, 2 * j + 1), yx = c(2 * i + 1, 2 * j);
      S(i, j) = Complex{xx + yy, yx - xy};
      P(i, j) = Complex{xx - yy, yx + xy};
    }
  }
  return {S, P};
}

}  // namespace

Mat2 CorrelationAccumulator::amplitude0_S() const {
  if (n_ < 2) throw Error(ErrorCode::InsufficientSamples, "amplitude moments: fewer than two samples");
  const double f = 1.0 / static_cast<double>(n_ - 1);
  return complex_moments([&](int p, int q) { return zco_[4 * p + q] * f; }).first;
}

Mat2 CorrelationAccumulator::amplitude0_P() const {
  if (n_ < 2) throw Error(ErrorCode::InsufficientSamples, "amplitude moments: fewer than two samples");
  const double f = 1.0 / static_cast<double>(n_ - 1);
  return complex_moments([&](int p, int q) { return zco_[4 * p + q] * f; }).second;
}

namespace {

void require_samples(const CorrelationAccumulator& acc) {
  if (acc.count() < kMinSamples) {
    throw Error(ErrorCode::InsufficientSamples,
                "estimator needs at least " + std::to_string(kMinSamples) + " samples, have " +
                    std::to_string(acc.count()));
  }
}

// Fluctuation variance of the photon number: anti-normal variance minus one
// commutator times the anti-normal mean.
double number_variance(const CorrelationAccumulator& acc, ModeRef a) {
  return acc.variance(a) - acc.kappa() * acc.mean(a);
}

}  // namespace

double corr_normalized(const CorrelationAccumulator& acc, ModeRef a, ModeRef b) {
  require_samples(acc);
  const auto& g = acc.grid();
  if (a.field == b.field && g.mode_of(a.mode) == g.mode_of(b.mode)) return 1.0;
  const double va = number_variance(acc, a), vb = number_variance(acc, b);
  if (!(va > 0.0) || !(vb > 0.0)) {
    throw Error(ErrorCode::ZeroVariance, "corr_normalized: non-positive photon-number variance");
  }
  return acc.covariance(a, b) / std::sqrt(va * vb);
}

double variance_normalized(const CorrelationAccumulator& acc, ModeRef a, ModeRef b, int sign) {
  require_samples(acc);
  if (sign != 1 && sign != -1) throw Error(ErrorCode::InvalidParameter, "variance_normalized: sign must be +1 or -1");
  const auto& g = acc.grid();
  if (g.mode_of(a.mode) == 0 || g.mode_of(b.mode) == 0) {
    throw Error(ErrorCode::InvalidParameter, "variance_normalized: k = 0 needs the zero-mode estimator");
  }
  if (a.field == b.field && g.mode_of(a.mode) == g.mode_of(b.mode)) {
    throw Error(ErrorCode::InvalidParameter, "variance_normalized: modes must be distinct");
  }
  const double kappa = acc.kappa();
  const double var = acc.variance(a) + acc.variance(b) + 2.0 * sign * acc.covariance(a, b);
  const double means = acc.mean(a) + acc.mean(b);
  const double shot = kappa * means - 2.0 * kappa * kappa;
  if (!(shot > 0.0)) throw Error(ErrorCode::ZeroVariance, "variance_normalized: non-positive shot-noise level");
  return (var - kappa * means) / shot;
}

K0Estimate estimate_k0(const CorrelationAccumulator& acc) {
  require_samples(acc);
  const double scale = 1.0 / (2.0 * acc.kappa());
  K0Estimate out;
  out.G.k = 0.0;
  out.G.Gminus = acc.amplitude0_S() * scale;
  out.G.Gplus = acc.amplitude0_P() * scale;
  SteadyState mean_field;
  mean_field.A1 = acc.mean_amplitude0(1);
  mean_field.A2 = acc.mean_amplitude0(2);
  mean_field.phase1 = std::arg(mean_field.A1);
  mean_field.phase2 = std::arg(mean_field.A2);
  out.cn12 = normalized_correlation_k0(out.G, mean_field);
  out.variance = variance_k0(out.G, mean_field);
  return out;
}

// ---------------------------------------------------------------------------

BatchedEstimator::BatchedEstimator(const GridSpec& grid, double kappa, long batch_size, bool full)
    : grid_(grid), kappa_(kappa), batch_size_(std::max(1L, batch_size)), full_(full),
      current_(grid, kappa, full) {}

void BatchedEstimator::accumulate(const FarField& f) {
  current_.accumulate(f);
  if (current_.count() >= batch_size_) {
    batches_.push_back(current_);
    current_ = CorrelationAccumulator(grid_, kappa_, full_);
  }
  total_.reset();
  loo_.clear();
}

void BatchedEstimator::merge(const BatchedEstimator& other) {
  if (grid_.N == 0) {
    grid_ = other.grid_;
    kappa_ = other.kappa_;
    batch_size_ = other.batch_size_;
    full_ = other.full_;
    current_ = CorrelationAccumulator(grid_, kappa_, full_);
  }
  for (const auto& b : other.batches_) batches_.push_back(b);
  if (other.current_.count() > 0) batches_.push_back(other.current_);
  total_.reset();
  loo_.clear();
}

void BatchedEstimator::finalize() const {
  if (total_) return;
  CorrelationAccumulator t(grid_, kappa_, full_);
  for (const auto& b : batches_) t.merge(b);
  t.merge(current_);
  total_ = std::move(t);
}

const CorrelationAccumulator& BatchedEstimator::total() const {
  finalize();
  return *total_;
}

std::size_t BatchedEstimator::batch_count() const {
  return batches_.size() + (current_.count() > 0 ? 1 : 0);
}

namespace {

std::vector<const CorrelationAccumulator*> groups(const std::vector<CorrelationAccumulator>& batches,
                                                  const CorrelationAccumulator& current) {
  std::vector<const CorrelationAccumulator*> g;
  for (const auto& b : batches) g.push_back(&b);
  if (current.count() > 0) g.push_back(&current);
  return g;
}

}  // namespace

Estimate BatchedEstimator::estimate(const std::function<double(const CorrelationAccumulator&)>& f,
                                    std::initializer_list<ModeRef> modes) const {
  Estimate e;
  e.value = f(total());
  const auto g = groups(batches_, current_);
  const std::size_t B = g.size();
  if (B < 2) {
    e.standard_error = kNaN;
  } else {
    if (loo_.empty()) {
      // Leave-one-out accumulators from prefix and suffix merges.
      std::vector<CorrelationAccumulator> prefix(B + 1, CorrelationAccumulator(grid_, kappa_, full_));
      std::vector<CorrelationAccumulator> suffix(B + 1, CorrelationAccumulator(grid_, kappa_, full_));
      for (std::size_t i = 0; i < B; ++i) {
        prefix[i + 1] = prefix[i];
        prefix[i + 1].merge(*g[i]);
      }
      for (std::size_t i = B; i-- > 0;) {
        suffix[i] = suffix[i + 1];
        suffix[i].merge(*g[i]);
      }
      loo_.reserve(B);
      for (std::size_t i = 0; i < B; ++i) {
        CorrelationAccumulator l = prefix[i];
        l.merge(suffix[i + 1]);
        loo_.push_back(std::move(l));
      }
    }
    std::vector<double> values(B);
    double mean = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
      try {
        values[i] = f(loo_[i]);
      } catch (const Error&) {
        values[i] = kNaN;
      }
      mean += values[i];
    }
    mean /= static_cast<double>(B);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    e.standard_error = std::sqrt(ss * static_cast<double>(B - 1) / static_cast<double>(B));
  }
  e.n_effective = static_cast<double>(total().count());
  for (const ModeRef m : modes) e.n_effective = std::min(e.n_effective, n_effective(m));
  return e;
}

double BatchedEstimator::tau_int(ModeRef a) const {
  const auto g = groups(batches_, current_);
  const auto& t = total();
  if (g.size() < 2 || t.count() < 2) return kNaN;
  const double mean = t.mean(a);
  double between = 0.0;
  for (const auto* b : g) {
    const double d = b->mean(a) - mean;
    between += static_cast<double>(b->count()) * d * d;
  }
  between /= static_cast<double>(g.size() - 1);
  const double var = t.variance(a);
  if (!(var > 0.0)) return kNaN;
  return 0.5 * between / var;
}

double BatchedEstimator::n_effective(ModeRef a) const {
  const double n = static_cast<double>(total().count());
  const double tau = tau_int(a);
  if (!std::isfinite(tau) || tau <= 0.5) return n;
  return n / (2.0 * tau);
}

// ---------------------------------------------------------------------------

std::vector<Observable> standard_observables(const BatchedEstimator& est) {
  const GridSpec& g = est.total().grid();
  const int half = g.N / 2;
  std::vector<Observable> out;

  auto family = [&](const std::string& name, bool signed_k, auto make) {
    Observable o{name, {}};
    for (int m = signed_k ? -(half - 1) : 1; m < half; ++m) {
      if (m == 0) continue;
      const auto [a, b, f] = make(m);
      ObservableRow row{g.dk() * m, {}};
      try {
        row.e = est.estimate(f, {a, b});
      } catch (const Error&) {
        row.e = {kNaN, kNaN, 0.0};
      }
      o.rows.push_back(row);
    }
    out.push_back(std::move(o));
  };
  auto corr = [](ModeRef a, ModeRef b) {
    return std::make_tuple(a, b, std::function<double(const CorrelationAccumulator&)>(
                                     [a, b](const CorrelationAccumulator& acc) { return corr_normalized(acc, a, b); }));
  };
  auto var = [](ModeRef a, ModeRef b, int sign) {
    return std::make_tuple(a, b, std::function<double(const CorrelationAccumulator&)>(
                                     [a, b, sign](const CorrelationAccumulator& acc) {
                                       return variance_normalized(acc, a, b, sign);
                                     }));
  };
  auto occupation = [](ModeRef a) {
    return std::make_tuple(a, a, std::function<double(const CorrelationAccumulator&)>(
                                     [a](const CorrelationAccumulator& acc) { return acc.mean(a) / (2.0 * acc.kappa()); }));
  };

  family("cn11_opp", false, [&](int m) { return corr({1, m}, {1, -m}); });
  family("cn22_opp", false, [&](int m) { return corr({2, m}, {2, -m}); });
  family("cn12_opp", false, [&](int m) { return corr({1, m}, {2, -m}); });
  family("cn12_same", false, [&](int m) { return corr({1, m}, {2, m}); });
  family("c11_minus", false, [&](int m) { return var({1, m}, {1, -m}, -1); });
  family("c11_plus", false, [&](int m) { return var({1, m}, {1, -m}, 1); });
  family("c22_minus", false, [&](int m) { return var({2, m}, {2, -m}, -1); });
  family("c22_plus", false, [&](int m) { return var({2, m}, {2, -m}, 1); });
  family("c12_minus_same", false, [&](int m) { return var({1, m}, {2, m}, -1); });
  family("c12_plus_same", false, [&](int m) { return var({1, m}, {2, m}, 1); });
  family("c12_minus_opp", false, [&](int m) { return var({1, m}, {2, -m}, -1); });
  family("c12_plus_opp", false, [&](int m) { return var({1, m}, {2, -m}, 1); });
  family("gminus11", true, [&](int m) { return occupation({1, m}); });
  family("gminus22", true, [&](int m) { return occupation({2, m}); });
  family("cn12_k_0", true, [&](int m) { return corr({1, m}, {2, 0}); });
  family("cn12_0_k", true, [&](int m) { return corr({1, 0}, {2, m}); });
  family("cn11_k_0", true, [&](int m) { return corr({1, m}, {1, 0}); });
  family("cn22_k_0", true, [&](int m) { return corr({2, m}, {2, 0}); });

  const ModeRef z1{1, 0}, z2{2, 0};
  auto scalar = [&](const std::string& name, std::function<double(const K0Estimate&)> pick) {
    Observable o{name, {}};
    ObservableRow row{0.0, {}};
    try {
      row.e = est.estimate([&](const CorrelationAccumulator& acc) { return pick(estimate_k0(acc)); }, {z1, z2});
    } catch (const Error&) {
      row.e = {kNaN, kNaN, 0.0};
    }
    o.rows.push_back(row);
    out.push_back(std::move(o));
  };
  scalar("cn12_00", [](const K0Estimate& k) { return k.cn12; });
  scalar("c12_minus_00", [](const K0Estimate& k) { return k.variance.cross.minus; });
  scalar("c12_plus_00", [](const K0Estimate& k) { return k.variance.cross.plus; });
  scalar("c11_plus_00", [](const K0Estimate& k) { return k.variance.self_plus[0]; });
  scalar("c22_plus_00", [](const K0Estimate& k) { return k.variance.self_plus[1]; });
  return out;
}

void write_observable_csv(const std::string& path, const Observable& obs) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out.precision(17);
  out << "k,value,standard_error,n_effective\n";
  for (const auto& r : obs.rows) {
    out << r.k << ',' << r.e.value << ',' << r.e.standard_error << ',' << r.e.n_effective << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path);
}

// ---------------------------------------------------------------------------

EnsembleResult run_ensemble(const EnsembleConfig& cfg) {
  if (cfg.trajectories < 1) throw Error(ErrorCode::InvalidParameter, "ensemble: need at least one trajectory");
  if (cfg.batches_per_trajectory < 1) throw Error(ErrorCode::InvalidParameter, "ensemble: batches must be >= 1");
  cfg.run.validate();
  const auto start = std::chrono::steady_clock::now();

  RunConfig per = cfg.run;
  per.t_total = cfg.run.t_total / cfg.trajectories;
  const long samples = per.total_steps() / per.sample_stride;
  const long batch = std::max(1L, samples / cfg.batches_per_trajectory);
  const double kappa = mode_kappa(cfg.run.p, cfg.run.grid);

  const int n = cfg.trajectories;
  std::vector<BatchedEstimator> parts(n);
  std::vector<RunReport> reports(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        RunConfig rc = per;
        rc.trajectory = cfg.run.trajectory + static_cast<std::uint64_t>(i);
        BatchedEstimator est(cfg.run.grid, kappa, batch, cfg.full_pairs);
        reports[i] = run_trajectory(rc, [&](const Snapshot& s) {
          est.accumulate(*s.field);
          if (cfg.extra_sink) cfg.extra_sink(s);
        });
        parts[i] = std::move(est);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(cfg.threads, 1, n);
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  EnsembleResult result;
  result.estimator = BatchedEstimator(cfg.run.grid, kappa, batch, cfg.full_pairs);
  for (int i = 0; i < n; ++i) {
    if (reports[i].discards > 0) {
      ++result.discards;
      continue;
    }
    result.estimator.merge(parts[i]);
  }
  result.reports = std::move(reports);
  result.sample_interval = per.dt * per.sample_stride;
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

BatchedEstimator analyze_snapshots(const SnapshotFile& file, double kappa, int batches_per_trajectory,
                                   bool full_pairs) {
  if (batches_per_trajectory < 1) throw Error(ErrorCode::InvalidParameter, "analyze: batches must be >= 1");
  std::map<std::uint64_t, std::vector<const SnapshotRecord*>> by_traj;
  for (const auto& r : file.records) by_traj[r.trajectory].push_back(&r);
  if (by_traj.empty()) throw Error(ErrorCode::InsufficientSamples, "analyze: no snapshots");
  BatchedEstimator out;
  bool first = true;
  for (auto& [id, recs] : by_traj) {
    std::stable_sort(recs.begin(), recs.end(), [](auto* a, auto* b) { return a->t < b->t; });
    const long batch = std::max(1L, static_cast<long>(recs.size()) / batches_per_trajectory);
    BatchedEstimator est(file.grid, kappa, batch, full_pairs);
    for (const auto* r : recs) est.accumulate(r->field);
    if (first) {
      out = std::move(est);
      first = false;
    } else {
      out.merge(est);
    }
  }
  return out;
}

}  // namespace shgq
