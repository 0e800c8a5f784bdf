#pragma once

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "simulation.hpp"

namespace shgq {

/// A far-field intensity I_j(k_m): field j in {1, 2}, signed mode m (k = m dk).
struct ModeRef {
  int field = 1;
  int mode = 0;
};

/// Streaming means and co-moments of far-field mode intensities (anti-normally
/// ordered, as produced by the Q-function simulation) plus the first and
/// second moments of the two k = 0 amplitudes.
class CorrelationAccumulator {
 public:
  CorrelationAccumulator() = default;
  /// full = true tracks every pair of intensities (O(N^2) memory).
  CorrelationAccumulator(const GridSpec& grid, double kappa, bool full = false);

  void accumulate(const FarField& f);
  /// Chan-style exact merge; merging is equivalent to accumulating both streams.
  void merge(const CorrelationAccumulator& other);

  long count() const { return n_; }
  double kappa() const { return kappa_; }
  const GridSpec& grid() const { return grid_; }
  bool full() const { return full_; }
  std::size_t pair_count() const { return co_.size(); }

  bool tracks(ModeRef a, ModeRef b) const;
  double mean(ModeRef a) const;
  /// Sample variance of the anti-normally ordered intensity.
  double variance(ModeRef a) const;
  /// Sample covariance; throws Unsupported for pairs that are not tracked.
  double covariance(ModeRef a, ModeRef b) const;

  Complex mean_amplitude0(int field) const;
  /// <da_i da_j*> and <da_i da_j> of the k = 0 amplitudes (fields 1, 2).
  Mat2 amplitude0_S() const;
  Mat2 amplitude0_P() const;

 private:
  int index(ModeRef a) const;
  long pair_slot(int a, int b) const;
  void build_pairs();

  GridSpec grid_;
  double kappa_ = 0.0;
  bool full_ = false;
  long n_ = 0;
  std::vector<double> mean_, m2_;
  std::vector<std::pair<int, int>> pairs_;
  std::unordered_map<long, long> slot_;
  std::vector<double> co_;
  std::array<double, 4> zmean_{};
  std::array<double, 16> zco_{};
  std::vector<double> scratch_old_, scratch_new_;
};

constexpr long kMinSamples = 100;

/// Normalized intensity-fluctuation correlation with normal-ordering
/// corrections. Exactly 1 for identical modes.
double corr_normalized(const CorrelationAccumulator& acc, ModeRef a, ModeRef b);

/// Shot-noise normalised variance of N_a + sign N_b; generic path, k != 0.
double variance_normalized(const CorrelationAccumulator& acc, ModeRef a, ModeRef b, int sign);

/// Leading-order k = 0 observables from the measured mean fields and
/// amplitude moments.
struct K0Estimate {
  double cn12 = 0.0;
  VarianceK0 variance;
  GFunctions G;
};

K0Estimate estimate_k0(const CorrelationAccumulator& acc);

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
  double n_effective = 0.0;
};

/// Samples grouped into consecutive batches; standard errors are jackknife
/// estimates over batches, effective sample counts come from batch means.
class BatchedEstimator {
 public:
  BatchedEstimator() = default;
  BatchedEstimator(const GridSpec& grid, double kappa, long batch_size, bool full = false);

  void accumulate(const FarField& f);
  /// Appends the other estimator's batches.
  void merge(const BatchedEstimator& other);

  const CorrelationAccumulator& total() const;
  std::size_t batch_count() const;
  long batch_size() const { return batch_size_; }
  long count() const { return total().count(); }

  Estimate estimate(const std::function<double(const CorrelationAccumulator&)>& f,
                    std::initializer_list<ModeRef> modes) const;

  /// n / (2 tau_int) for one intensity, from the batch means.
  double n_effective(ModeRef a) const;
  /// Integrated autocorrelation time of an intensity, in samples.
  double tau_int(ModeRef a) const;

 private:
  void finalize() const;

  GridSpec grid_;
  double kappa_ = 0.0;
  long batch_size_ = 1;
  bool full_ = false;
  mutable std::vector<CorrelationAccumulator> batches_;
  CorrelationAccumulator current_;
  mutable std::optional<CorrelationAccumulator> total_;
  mutable std::vector<CorrelationAccumulator> loo_;
};

struct ObservableRow {
  double k = 0.0;
  Estimate e;
};

struct Observable {
  std::string name;
  std::vector<ObservableRow> rows;
};

/// Every observable family reported from a run (positive k for the paired
/// families, signed k for the k-to-0 families, scalars at k = 0).
std::vector<Observable> standard_observables(const BatchedEstimator& est);

void write_observable_csv(const std::string& path, const Observable& obs);

struct EnsembleConfig {
  RunConfig run;  ///< run.t_total is the total averaging time, split over trajectories
  int trajectories = 4;
  int threads = 1;
  int batches_per_trajectory = 16;
  bool full_pairs = false;
  SnapshotSink extra_sink;  ///< optional, called from worker threads
};

struct EnsembleResult {
  BatchedEstimator estimator;
  std::vector<RunReport> reports;
  int discards = 0;
  double wall_seconds = 0.0;
  double sample_interval = 0.0;
};

/// Runs independent trajectories (ids 0..n-1) and merges their batches in
/// trajectory order, so the result does not depend on the thread count.
EnsembleResult run_ensemble(const EnsembleConfig& cfg);

/// Rebuilds the estimator from stored snapshots, batching each trajectory
/// separately in time order and merging trajectories by ascending id.
BatchedEstimator analyze_snapshots(const SnapshotFile& file, double kappa, int batches_per_trajectory,
                                   bool full_pairs = false);

}  // namespace shgq
