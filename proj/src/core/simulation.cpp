#include "simulation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>
#include <unsupported/Eigen/MatrixFunctions>

namespace shgq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Complex expm1(Complex z) {
  const double x = z.real(), y = z.imag();
  const double s = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

}  // namespace

double GridSpec::dk() const { return kTwoPi / L; }

double GridSpec::k(int n) const { return dk() * (n < N / 2 ? n : n - N); }

int GridSpec::mode_of(int m) const { return ((m % N) + N) % N; }

void GridSpec::validate() const {
  if (N < 8 || (N & (N - 1)) != 0) {
    throw Error(ErrorCode::InvalidParameter, "grid: N must be a power of two and at least 8");
  }
  if (!(L > 0.0) || !std::isfinite(L)) throw Error(ErrorCode::InvalidParameter, "grid: L must be positive");
}

FieldGrid FieldGrid::homogeneous(const GridSpec& g, Complex A1, Complex A2) {
  FieldGrid f;
  f.grid = g;
  f.A1.assign(g.N, A1);
  f.A2.assign(g.N, A2);
  return f;
}

FarField far_field(const FieldGrid& f, const Fft& fft) {
  const double scale = f.grid.dx() / std::sqrt(kTwoPi);
  FarField a{f.A1, f.A2};
  fft.backward(a.a1);
  fft.backward(a.a2);
  for (auto& v : a.a1) v *= scale;
  for (auto& v : a.a2) v *= scale;
  return a;
}

FieldGrid near_field(const GridSpec& g, const FarField& a, const Fft& fft) {
  const double scale = g.dk() / std::sqrt(kTwoPi);
  FieldGrid f{g, a.a1, a.a2};
  fft.forward(f.A1);
  fft.forward(f.A2);
  for (auto& v : f.A1) v *= scale;
  for (auto& v : f.A2) v *= scale;
  return f;
}

double mode_kappa(const DimensionlessParams& p, const GridSpec& g) { return 1.0 / (p.n_th * g.dk()); }

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t trajectory, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trajectory),
                    static_cast<std::uint32_t>(trajectory >> 32), static_cast<std::uint32_t>(tag)};
  engine_.seed(seq);
}

void NormalStream::fill(std::span<double> out) {
  for (double& v : out) v = dist_(engine_);
}

void noise_from_normals(std::span<const Complex> A2, double dx, double dt, std::span<const double> z,
                        NoiseDraw& out, double time) {
  const std::size_t N = A2.size();
  if (z.size() < 4 * N) throw Error(ErrorCode::ShapeMismatch, "noise: not enough normals");
  const QValidity v = q_validity(A2);
  if (!v.valid) throw PositivityError(v.worst_index, 2.0 - v.margin, time);

  out.xi1.resize(N);
  out.xi2.resize(N);
  const double s = 1.0 / std::sqrt(dx * dt);
  const double circ = s / std::numbers::sqrt2;
  for (std::size_t m = 0; m < N; ++m) {
    const double a = A2[m].real(), b = A2[m].imag();
    // Cholesky factor of the (u, v) covariance, in units of s^2.
    const double l11 = 0.5 * std::sqrt(2.0 - a);
    const double l21 = -0.25 * b / l11;
    const double l22 = std::sqrt(std::max(0.25 * (2.0 + a) - l21 * l21, 0.0));
    const double z0 = z[4 * m], z1 = z[4 * m + 1];
    out.xi1[m] = {s * l11 * z0, s * (l21 * z0 + l22 * z1)};
    out.xi2[m] = {circ * z[4 * m + 2], circ * z[4 * m + 3]};
  }
}

NoiseDraw sample_noise(std::span<const Complex> A2, double dx, double dt, NormalStream& rng,
                       double time) {
  std::vector<double> z(4 * A2.size());
  rng.fill(z);
  NoiseDraw d;
  noise_from_normals(A2, dx, dt, z, d, time);
  return d;
}

Stepper::Stepper(const DimensionlessParams& p, const GridSpec& g, double dt)
    : p_(p), grid_(g), dt_(dt), noisy_(std::isfinite(p.n_th)), fft_(g.N) {
  p.validate();
  g.validate();
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidParameter, "stepper: dt must be positive");
  const int N = g.N;
  prop1_.resize(N);
  prop2_.resize(N);
  phi1_.resize(N);
  phi2_.resize(N);
  for (int n = 0; n < N; ++n) {
    const double k2 = g.k(n) * g.k(n);
    const Complex L1{-1.0, p.delta1 - k2}, L2{-p.gamma, p.delta2 - 0.5 * k2};
    prop1_[n] = std::exp(L1 * dt);
    prop2_[n] = std::exp(L2 * dt);
    phi1_[n] = expm1(L1 * dt) / L1;
    phi2_[n] = expm1(L2 * dt) / L2;
  }
  work1_.resize(N);
  work2_.resize(N);
  spec1_.resize(N);
  spec2_.resize(N);
  normals_.resize(normals_per_step(N));
}

void Stepper::advance(std::vector<Complex>& A1, std::vector<Complex>& A2, std::vector<Complex>& spec1,
                      std::vector<Complex>& spec2, std::span<const double> normals, double time) {
  const int N = grid_.N;
  const bool use_noise = noisy_ && !normals.empty();
  if (use_noise) noise_from_normals(A2, grid_.dx(), dt_, normals, noise_, time);
  const double s1 = use_noise ? std::sqrt(2.0 / p_.n_th) : 0.0;
  const double s2 = use_noise ? std::sqrt(2.0 * p_.gamma / p_.n_th) : 0.0;
  for (int m = 0; m < N; ++m) {
    const Complex a1 = A1[m], a2 = A2[m];
    work1_[m] = std::conj(a1) * a2 + p_.E;
    work2_[m] = -0.5 * a1 * a1;
    if (use_noise) {
      work1_[m] += s1 * noise_.xi1[m];
      work2_[m] += s2 * noise_.xi2[m];
    }
  }
  fft_.backward(work1_);
  fft_.backward(work2_);
  const double inv = 1.0 / N;
  for (int n = 0; n < N; ++n) {
    spec1[n] = prop1_[n] * spec1[n] + phi1_[n] * work1_[n];
    spec2[n] = prop2_[n] * spec2[n] + phi2_[n] * work2_[n];
    A1[n] = spec1[n] * inv;
    A2[n] = spec2[n] * inv;
  }
  fft_.forward(A1);
  fft_.forward(A2);
}

void Stepper::step(FieldGrid& f, std::span<const double> normals, double time) {
  const int N = grid_.N;
  if (static_cast<int>(f.A1.size()) != N || static_cast<int>(f.A2.size()) != N) {
    throw Error(ErrorCode::ShapeMismatch, "step: field size does not match the grid");
  }
  spec1_ = f.A1;
  spec2_ = f.A2;
  fft_.backward(spec1_);
  fft_.backward(spec2_);
  advance(f.A1, f.A2, spec1_, spec2_, normals, time);
}

void Stepper::step(FieldGrid& f, NormalStream& rng, double time) {
  if (!noisy_) return step(f);
  rng.fill(normals_);
  step(f, std::span<const double>(normals_), time);
}

void Stepper::step(FieldGrid& f) { step(f, std::span<const double>{}, 0.0); }

void RunConfig::validate() const {
  p.validate();
  grid.validate();
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidParameter, "run: dt must be positive");
  if (!(t_transient >= 0.0) || !(t_total >= 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "run: durations must be non-negative");
  }
  if (sample_stride < 1) throw Error(ErrorCode::InvalidParameter, "run: sample_stride must be >= 1");
  if (!(perturbation >= 0.0)) throw Error(ErrorCode::InvalidParameter, "run: perturbation must be >= 0");
}

long RunConfig::transient_steps() const { return std::lround(t_transient / dt); }
long RunConfig::total_steps() const { return std::lround(t_total / dt); }

RunReport run_trajectory(const RunConfig& cfg, const SnapshotSink& sink) {
  FieldGrid final_state;
  return run_trajectory(cfg, sink, final_state);
}

RunReport run_trajectory(const RunConfig& cfg, const SnapshotSink& sink, FieldGrid& state) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  Stepper stepper(cfg.p, cfg.grid, cfg.dt);
  NormalStream rng(cfg.seed, cfg.trajectory, 0);

  const SteadyState s = lower_steady_state(cfg.p);
  state = FieldGrid::homogeneous(cfg.grid, s.A1, s.A2);
  if (cfg.perturbation > 0.0) {
    NormalStream kick(cfg.seed, cfg.trajectory, 1);
    const double a = cfg.perturbation / std::numbers::sqrt2;
    for (int m = 0; m < cfg.grid.N; ++m) {
      state.A1[m] += a * Complex{kick(), kick()};
      state.A2[m] += a * Complex{kick(), kick()};
    }
  }

  RunReport report;
  const long transient = cfg.transient_steps();
  const long total = transient + cfg.total_steps();
  FarField snapshot;
  std::vector<Complex> spec1 = state.A1, spec2 = state.A2;
  stepper.fft().backward(spec1);
  stepper.fft().backward(spec2);
  std::vector<double> normals(stepper.noisy() ? normals_per_step(cfg.grid.N) : 0);
  const double far_scale = cfg.grid.dx() / std::sqrt(kTwoPi);
  for (long i = 1; i <= total; ++i) {
    const double t = (i - 1) * cfg.dt;
    try {
      rng.fill(normals);
      stepper.advance(state.A1, state.A2, spec1, spec2, normals, t);
    } catch (const PositivityError& e) {
      report.discards = 1;
      report.abort_time = e.time();
      report.message = e.what();
      break;
    }
    report.steps = i;
    if (i <= transient || (i - transient) % cfg.sample_stride != 0) continue;

    const QValidity v = q_validity(state.A2);
    report.min_margin = std::min(report.min_margin, v.margin);
    snapshot.a1.resize(cfg.grid.N);
    snapshot.a2.resize(cfg.grid.N);
    for (int n = 0; n < cfg.grid.N; ++n) {
      snapshot.a1[n] = far_scale * spec1[n];
      snapshot.a2[n] = far_scale * spec2[n];
    }
    for (int n = 0; n < cfg.grid.N; ++n) {
      if (!std::isfinite(snapshot.a1[n].real() + snapshot.a1[n].imag() + snapshot.a2[n].real() +
                         snapshot.a2[n].imag())) {
        std::ostringstream os;
        os << "run_trajectory: field became non-finite at t = " << i * cfg.dt;
        throw Error(ErrorCode::Numeric, os.str());
      }
    }
    if (sink) {
      try {
        sink(Snapshot{i * cfg.dt, cfg.trajectory, &snapshot});
      } catch (const std::exception& e) {
        throw Error(ErrorCode::SinkFailure, std::string("snapshot sink failed: ") + e.what());
      }
    }
    ++report.samples;
  }
  report.completed = report.discards == 0;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// ---------------------------------------------------------------------------

GFunctions LinearMoments::g_of(double k, const Mat4& S) {
  GFunctions G;
  G.k = k;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      G.Gminus(i, j) = S(2 * i, 2 * j);
      G.Gplus(i, j) = S(2 * i, 2 * j + 1);
    }
  }
  return G;
}

GFunctions LinearMoments::g() const { return g_of(k, S); }

namespace {

using Mat8 = Eigen::Matrix<double, 8, 8>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat16 = Eigen::Matrix<double, 16, 16>;

Mat8 real_form(const Mat4& M) {
  Mat8 R;
  R << M.real(), -M.imag(), M.imag(), M.real();
  return R;
}

// Covariance of (Re w, Im w) from C = <w w^dagger> and P = <w w^T>.
Mat8 real_covariance(const Mat4& C, const Mat4& P) {
  Mat8 Q;
  Q << 0.5 * (C + P).real(), 0.5 * (P - C).imag(), 0.5 * (C + P).imag(), 0.5 * (C - P).real();
  return 0.5 * (Q + Q.transpose());
}

LinearMoments simulate_mode(const DimensionlessParams& p, const SteadyState& s, double k,
                            const LinearRunConfig& cfg, std::uint64_t stream) {
  const ModeLinearization lin = linearize(p, s, k);
  if (!(lin.eigenvalues(0).real() < 0.0)) {
    std::ostringstream os;
    os << "simulate_linearized: mode k = " << k << " is not damped";
    throw Error(ErrorCode::ThresholdDivergence, os.str());
  }
  Mat4 C = Mat4::Zero(), P = Mat4::Zero();
  C(0, 0) = C(1, 1) = 1.0;
  C(0, 1) = -0.5 * s.A2;
  C(1, 0) = -0.5 * std::conj(s.A2);
  C(2, 2) = C(3, 3) = p.gamma;
  if (k == 0.0) {
    // At k = 0 the second and fourth components are conjugates of the first and third.
    P(0, 0) = -0.5 * s.A2;
    P(1, 1) = -0.5 * std::conj(s.A2);
    P(0, 1) = P(1, 0) = 1.0;
    P(2, 3) = P(3, 2) = p.gamma;
  }
  const Mat8 R = real_form(lin.M);
  const Mat8 Q = real_covariance(C, P);

  Mat16 H = Mat16::Zero();
  H.topLeftCorner<8, 8>() = -R * cfg.dt;
  H.topRightCorner<8, 8>() = Q * cfg.dt;
  H.bottomRightCorner<8, 8>() = R.transpose() * cfg.dt;
  const Mat16 F = H.exp();
  const Mat8 Phi = F.bottomRightCorner<8, 8>().transpose();
  Mat8 Qd = Phi * F.topRightCorner<8, 8>();
  Qd = 0.5 * (Qd + Qd.transpose());
  Eigen::SelfAdjointEigenSolver<Mat8> es(Qd);
  const Mat8 root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  NormalStream rng(cfg.seed, stream, 2);
  Vec8 x = Vec8::Zero(), z;
  const long transient = std::lround(cfg.t_transient / cfg.dt);
  const long steps = std::lround(cfg.t_total / cfg.dt);
  const long samples = steps / cfg.sample_stride;
  const int B = std::max(1, cfg.batches);
  const long per_batch = samples / B;
  if (per_batch < 1) throw Error(ErrorCode::InsufficientSamples, "simulate_linearized: too few samples");

  LinearMoments out;
  out.k = k;
  out.batch_means.assign(B, Mat4::Zero());
  auto advance = [&] {
    for (int i = 0; i < 8; ++i) z(i) = rng();
    x = Phi * x + root * z;
  };
  for (long i = 0; i < transient; ++i) advance();
  Eigen::Matrix<Complex, 4, 1> w;
  for (int b = 0; b < B; ++b) {
    Mat4 sum = Mat4::Zero();
    for (long n = 0; n < per_batch; ++n) {
      for (int r = 0; r < cfg.sample_stride; ++r) advance();
      for (int i = 0; i < 4; ++i) w(i) = Complex{x(i), x(i + 4)};
      sum.noalias() += w * w.adjoint();
    }
    out.batch_means[b] = sum / static_cast<double>(per_batch);
  }
  out.samples = per_batch * B;
  for (const auto& m : out.batch_means) out.S += m;
  out.S /= static_cast<double>(B);
  if (B > 1) {
    Mat4 var_re = Mat4::Zero(), var_im = Mat4::Zero();
    for (const auto& m : out.batch_means) {
      const Mat4 d = m - out.S;
      var_re += d.real().cwiseAbs2().cast<Complex>();
      var_im += d.imag().cwiseAbs2().cast<Complex>();
    }
    const double f = 1.0 / (static_cast<double>(B) * (B - 1));
    out.S_stderr_re = (var_re * f).cwiseSqrt();
    out.S_stderr_im = (var_im * f).cwiseSqrt();
  }
  return out;
}

}  // namespace

std::vector<LinearMoments> simulate_linearized(const DimensionlessParams& p, const SteadyState& s,
                                               const std::vector<double>& k,
                                               const LinearRunConfig& cfg, int threads) {
  if (!(cfg.dt > 0.0) || cfg.sample_stride < 1 || !(cfg.t_total > 0.0) || !(cfg.t_transient >= 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "simulate_linearized: invalid run configuration");
  }
  std::vector<LinearMoments> out(k.size());
  std::vector<std::exception_ptr> errors(k.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < k.size(); i = next++) {
      try {
        out[i] = simulate_mode(p, s, k[i], cfg, i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::clamp<int>(threads, 1, std::max<int>(1, static_cast<int>(k.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'S', 'H', 'G', 'Q', 'S', 'N', 'A', 'P'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(bytes, sizeof(T));
}

template <class T>
T get(std::istream& is) {
  char bytes[sizeof(T)];
  if (!is.read(bytes, sizeof(T))) throw Error(ErrorCode::Io, "snapshot file truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

struct SnapshotWriter::Impl {
  std::ofstream out;
  GridSpec grid;
  SnapshotFormat format;
  std::mutex mutex;
};

SnapshotWriter::SnapshotWriter(const std::string& path, const GridSpec& grid, SnapshotFormat format)
    : impl_(new Impl) {
  impl_->grid = grid;
  impl_->format = format;
  impl_->out.open(path, format == SnapshotFormat::Binary ? std::ios::binary | std::ios::out
                                                         : std::ios::out);
  if (!impl_->out) {
    delete impl_;
    throw Error(ErrorCode::Io, "cannot open snapshot file " + path);
  }
  if (format == SnapshotFormat::Binary) {
    impl_->out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(impl_->out, kVersion);
    put<std::uint32_t>(impl_->out, static_cast<std::uint32_t>(grid.N));
    put<double>(impl_->out, grid.L);
  } else {
    impl_->out.precision(17);
    impl_->out << "# shgq snapshots version=" << kVersion << " N=" << grid.N << " L=" << grid.L << "\n"
               << "t,trajectory,mode,k,a1_re,a1_im,a2_re,a2_im\n";
  }
}

SnapshotWriter::~SnapshotWriter() {
  if (impl_) impl_->out.close();
  delete impl_;
}

void SnapshotWriter::write(const Snapshot& s) {
  const FarField& f = *s.field;
  const int N = impl_->grid.N;
  if (static_cast<int>(f.a1.size()) != N || static_cast<int>(f.a2.size()) != N) {
    throw Error(ErrorCode::ShapeMismatch, "snapshot size does not match the file grid");
  }
  std::lock_guard<std::mutex> lock(impl_->mutex);
  auto& out = impl_->out;
  if (impl_->format == SnapshotFormat::Binary) {
    put<double>(out, s.t);
    put<std::uint64_t>(out, s.trajectory);
    for (const auto* a : {&f.a1, &f.a2}) {
      for (const Complex v : *a) {
        put<double>(out, v.real());
        put<double>(out, v.imag());
      }
    }
  } else {
    for (int n = 0; n < N; ++n) {
      out << s.t << ',' << s.trajectory << ',' << n << ',' << impl_->grid.k(n) << ','
          << f.a1[n].real() << ',' << f.a1[n].imag() << ',' << f.a2[n].real() << ','
          << f.a2[n].imag() << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::Io, "snapshot write failed");
}

void SnapshotWriter::close() {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  impl_->out.flush();
  impl_->out.close();
}

void concatenate_snapshots(const std::vector<std::string>& parts, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open snapshot file " + path);
  std::string first_header;
  for (const auto& part : parts) {
    std::ifstream in(part, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open snapshot file " + part);
    char magic[8] = {};
    in.read(magic, 8);
    std::string header;
    if (in.gcount() == 8 && std::memcmp(magic, kMagic, 8) == 0) {
      header.assign(magic, 8);
      char rest[16];
      if (!in.read(rest, sizeof rest)) throw Error(ErrorCode::Io, "snapshot file truncated");
      header.append(rest, sizeof rest);
    } else {
      in.clear();
      in.seekg(0);
      std::string a, b;
      std::getline(in, a);
      std::getline(in, b);
      header = a + "\n" + b + "\n";
    }
    if (first_header.empty()) {
      first_header = header;
      out << header;
    } else if (header != first_header) {
      throw Error(ErrorCode::ShapeMismatch, "snapshot headers differ: " + part);
    }
    out << in.rdbuf();
  }
  if (!out) throw Error(ErrorCode::Io, "snapshot write failed");
}

SnapshotFile read_snapshots(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open snapshot file " + path);
  char magic[8] = {};
  in.read(magic, 8);
  SnapshotFile file;
  if (in.gcount() == 8 && std::memcmp(magic, kMagic, 8) == 0) {
    const auto version = get<std::uint32_t>(in);
    if (version != kVersion) throw Error(ErrorCode::Io, "unsupported snapshot version");
    file.grid.N = static_cast<int>(get<std::uint32_t>(in));
    file.grid.L = get<double>(in);
    file.grid.validate();
    const int N = file.grid.N;
    while (in.peek() != std::char_traits<char>::eof()) {
      SnapshotRecord r;
      r.t = get<double>(in);
      r.trajectory = get<std::uint64_t>(in);
      for (auto* a : {&r.field.a1, &r.field.a2}) {
        a->resize(N);
        for (auto& v : *a) {
          const double re = get<double>(in);
          v = {re, get<double>(in)};
        }
      }
      file.records.push_back(std::move(r));
    }
    return file;
  }

  in.clear();
  in.seekg(0);
  std::string line;
  std::getline(in, line);
  if (line.rfind("# shgq snapshots", 0) != 0) throw Error(ErrorCode::Io, "not a snapshot file: " + path);
  if (std::sscanf(line.c_str(), "# shgq snapshots version=%*u N=%d L=%lf", &file.grid.N, &file.grid.L) != 2) {
    throw Error(ErrorCode::Io, "malformed snapshot header");
  }
  file.grid.validate();
  std::getline(in, line);
  const int N = file.grid.N;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double t, k, v[4];
    unsigned long long traj;
    int mode;
    if (std::sscanf(line.c_str(), "%lf,%llu,%d,%lf,%lf,%lf,%lf,%lf", &t, &traj, &mode, &k, &v[0], &v[1],
                    &v[2], &v[3]) != 8 || mode != row % N) {
      throw Error(ErrorCode::Io, "malformed snapshot row: " + line);
    }
    if (mode == 0) {
      SnapshotRecord r;
      r.t = t;
      r.trajectory = traj;
      r.field.a1.resize(N);
      r.field.a2.resize(N);
      file.records.push_back(std::move(r));
    }
    auto& r = file.records.back();
    r.field.a1[mode] = {v[0], v[1]};
    r.field.a2[mode] = {v[2], v[3]};
    ++row;
  }
  if (row % N != 0) throw Error(ErrorCode::Io, "snapshot file ends inside a record");
  return file;
}

}  // namespace shgq
