#pragma once

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fft.hpp"
#include "linear_correlations.hpp"

namespace shgq {

/// Periodic 1D grid. Mode n of a far-field array (FFT order) has wavenumber
/// 2 pi n / L for n < N/2 and 2 pi (n - N) / L otherwise.
struct GridSpec {
  int N = 256;
  double L = 103.057;

  double dx() const { return L / N; }
  double dk() const;
  double k(int n) const;
  int mode_of(int signed_index) const;  ///< FFT-order index of mode m, m may be negative
  int mirror(int n) const { return (N - n) % N; }
  void validate() const;
};

struct FieldGrid {
  GridSpec grid;
  std::vector<Complex> A1;
  std::vector<Complex> A2;

  static FieldGrid homogeneous(const GridSpec& g, Complex A1, Complex A2);
};

/// Far-field amplitudes a(k_n) = dx / sqrt(2 pi) sum_m A(x_m) exp(i k_n x_m).
struct FarField {
  std::vector<Complex> a1;
  std::vector<Complex> a2;
};

FarField far_field(const FieldGrid& f, const Fft& fft);
FieldGrid near_field(const GridSpec& g, const FarField& a, const Fft& fft);

/// Commutator constant of a discrete mode, 1 / (n_th dk).
double mode_kappa(const DimensionlessParams& p, const GridSpec& g);

/// Gaussian stream for one trajectory, seeded from (seed, trajectory).
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t trajectory, std::uint64_t tag = 0);
  double operator()() { return dist_(engine_); }
  void fill(std::span<double> out);

 private:
  boost::random::mt19937_64 engine_;
  boost::random::normal_distribution<double> dist_;
};

/// One step's noise fields, pre-scaled by 1/sqrt(dx dt).
struct NoiseDraw {
  std::vector<Complex> xi1;
  std::vector<Complex> xi2;
};

/// Standard normals needed per step (four per grid point).
inline std::size_t normals_per_step(int N) { return 4 * static_cast<std::size_t>(N); }

/// Builds the noise from 4N standard normals. z[4m], z[4m+1] drive xi1 at
/// point m; z[4m+2], z[4m+3] drive xi2.
void noise_from_normals(std::span<const Complex> A2, double dx, double dt,
                        std::span<const double> z, NoiseDraw& out, double time = 0.0);

NoiseDraw sample_noise(std::span<const Complex> A2, double dx, double dt, NormalStream& rng,
                       double time = 0.0);

/// Exponential-Euler integrator: linear diagonal part exact in k-space, Ito
/// evaluation of coupling, pump and noise at step start.
class Stepper {
 public:
  Stepper(const DimensionlessParams& p, const GridSpec& g, double dt);

  const GridSpec& grid() const { return grid_; }
  double dt() const { return dt_; }
  bool noisy() const { return noisy_; }

  /// Advances f by dt using the supplied normals (ignored when noise is off).
  void step(FieldGrid& f, std::span<const double> normals, double time = 0.0);
  void step(FieldGrid& f, NormalStream& rng, double time = 0.0);
  /// Deterministic step.
  void step(FieldGrid& f);

  /// Spectral form of the step. spec1/spec2 hold the unnormalised transforms
  /// (Fft::backward) of A1/A2 and are advanced together with them.
  void advance(std::vector<Complex>& A1, std::vector<Complex>& A2, std::vector<Complex>& spec1,
               std::vector<Complex>& spec2, std::span<const double> normals, double time);

  const Fft& fft() const { return fft_; }

 private:
  DimensionlessParams p_;
  GridSpec grid_;
  double dt_;
  bool noisy_;
  Fft fft_;
  std::vector<Complex> prop1_, prop2_, phi1_, phi2_;
  std::vector<Complex> work1_, work2_, spec1_, spec2_;
  std::vector<double> normals_;
  NoiseDraw noise_;
};

struct RunConfig {
  DimensionlessParams p;
  GridSpec grid;
  double dt = 1e-3;
  double t_transient = 200.0;
  double t_total = 2e4;
  int sample_stride = 50;
  std::uint64_t seed = 1;
  std::uint64_t trajectory = 0;
  double perturbation = 0.0;  ///< amplitude of a seeded random kick to the initial state

  void validate() const;
  long transient_steps() const;
  long total_steps() const;  ///< steps after the transient
};

struct Snapshot {
  double t = 0.0;
  std::uint64_t trajectory = 0;
  const FarField* field = nullptr;
};

using SnapshotSink = std::function<void(const Snapshot&)>;

struct RunReport {
  long steps = 0;
  long samples = 0;
  int discards = 0;  ///< trajectories aborted on a positivity violation
  bool completed = false;
  double abort_time = 0.0;
  double wall_seconds = 0.0;
  double min_margin = 2.0;  ///< smallest 2 - max|A2| seen at sampling times
  std::string message;
};

/// Starts from the lower homogeneous steady state (plus the optional kick),
/// discards the transient and feeds far-field snapshots to the sink every
/// sample_stride steps. A positivity violation ends the trajectory and is
/// reported, not thrown.
RunReport run_trajectory(const RunConfig& cfg, const SnapshotSink& sink);

/// As run_trajectory, also returning the final near field.
RunReport run_trajectory(const RunConfig& cfg, const SnapshotSink& sink, FieldGrid& final_state);

// ---------------------------------------------------------------------------
// Linearised per-mode dynamics

struct LinearRunConfig {
  double dt = 0.05;
  double t_transient = 500.0;
  double t_total = 1e5;
  int sample_stride = 1;
  int batches = 32;
  std::uint64_t seed = 1;
};

/// Estimated equal-time moments of w = (b1(k), b1*(-k), b2(k), b2*(-k)) in
/// units of 2 kappa: S = <w w^dagger> / (2 kappa). Gminus_ij = S(2i, 2j) and
/// Gplus_ij = S(2i, 2j+1).
struct LinearMoments {
  double k = 0.0;
  Mat4 S = Mat4::Zero();
  Mat4 S_stderr_re = Mat4::Zero();  ///< standard errors of Re S (stored as real values)
  Mat4 S_stderr_im = Mat4::Zero();
  std::vector<Mat4> batch_means;
  long samples = 0;

  GFunctions g() const;
  static GFunctions g_of(double k, const Mat4& S);
};

/// Exact Ornstein-Uhlenbeck stepping of the linearised equations at each k.
/// Throws ThresholdDivergence when a mode is not damped.
std::vector<LinearMoments> simulate_linearized(const DimensionlessParams& p, const SteadyState& s,
                                               const std::vector<double>& k,
                                               const LinearRunConfig& cfg, int threads = 1);

/// Jackknife standard error of f over batch means.
template <class F>
double jackknife_stderr(const std::vector<Mat4>& batches, F f) {
  const std::size_t B = batches.size();
  if (B < 2) return 0.0;
  Mat4 total = Mat4::Zero();
  for (const auto& b : batches) total += b;
  std::vector<double> loo(B);
  double mean = 0.0;
  for (std::size_t i = 0; i < B; ++i) {
    loo[i] = f(Mat4((total - batches[i]) / static_cast<double>(B - 1)));
    mean += loo[i];
  }
  mean /= static_cast<double>(B);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return std::sqrt(ss * static_cast<double>(B - 1) / static_cast<double>(B));
}

// ---------------------------------------------------------------------------
// Snapshot stream files

enum class SnapshotFormat { Binary, Csv };

class SnapshotWriter {
 public:
  SnapshotWriter(const std::string& path, const GridSpec& grid, SnapshotFormat format);
  ~SnapshotWriter();
  SnapshotWriter(const SnapshotWriter&) = delete;
  SnapshotWriter& operator=(const SnapshotWriter&) = delete;

  /// Thread-safe; records from one trajectory keep their order.
  void write(const Snapshot& s);
  void close();

 private:
  struct Impl;
  Impl* impl_;
};

struct SnapshotRecord {
  double t = 0.0;
  std::uint64_t trajectory = 0;
  FarField field;
};

struct SnapshotFile {
  GridSpec grid;
  std::vector<SnapshotRecord> records;
};

SnapshotFile read_snapshots(const std::string& path);

/// Concatenates snapshot files with identical headers into `path`, in order.
void concatenate_snapshots(const std::vector<std::string>& parts, const std::string& path);

}  // namespace shgq
