#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"

namespace shgq {

using Mat4 = Eigen::Matrix<Complex, 4, 4>;
using Vec4 = Eigen::Matrix<Complex, 4, 1>;

/// Fluctuation matrix in the basis (b1(k), b1*(-k), b2(k), b2*(-k)).
Mat4 build_M(const DimensionlessParams& p, const SteadyState& s, double k);

struct ModeLinearization {
  double k = 0.0;
  Mat4 M = Mat4::Zero();
  Vec4 eigenvalues = Vec4::Zero();  ///< sorted by descending real part
  Mat4 V = Mat4::Zero();            ///< column l is the eigenvector of eigenvalue l
  Mat4 T = Mat4::Zero();            ///< V^-1
  double condition = 1.0;           ///< 2-norm condition number of V
};

/// Eigen-decomposition of M. Throws NearDegeneracy when V is numerically
/// singular (condition number above 1e12).
ModeLinearization eigen(const Mat4& M, double k = 0.0);

ModeLinearization linearize(const DimensionlessParams& p, const SteadyState& s, double k);

double growth_rate(const DimensionlessParams& p, const SteadyState& s, double k);

enum class InstabilityKind { StationaryTransverse, OscillatoryTransverse, SelfPulsing };

const char* to_string(InstabilityKind kind);

/// Which eigenvalues take part in the growth-rate maximisation.
enum class EigenFilter { All, RealOnly, ComplexOnly };

struct ThresholdOptions {
  double k_min = 0.0;
  double k_max = 4.0;
  int k_points = 512;
  double k_tol = 1e-6;
  double E_min = 0.0;
  double E_max = 30.0;
  int E_scan_points = 64;
  double E_tol = 1e-7;
  bool zero_k_only = false;  ///< homogeneous (self-pulsing) scan at k = 0
  EigenFilter filter = EigenFilter::All;
  int branch = 0;  ///< steady-state branch index, ascending intensity
  bool first_crossing = false;  ///< take the first sign change instead of rejecting several
};

struct ThresholdResult {
  double E_t = 0.0;
  double k_c = 0.0;
  double lambda_imag = 0.0;
  InstabilityKind kind = InstabilityKind::StationaryTransverse;
};

struct GrowthMaximum {
  double rate = 0.0;
  double k = 0.0;
  Complex lambda{};
};

/// max over the k window of the (filtered) leading real part at fixed pump.
GrowthMaximum max_growth(const DimensionlessParams& p, const ThresholdOptions& opt);

/// Pump at which max_k Re(lambda) crosses zero. `base` supplies delta1,
/// delta2, gamma; its E and n_th are ignored.
ThresholdResult find_threshold(const DimensionlessParams& base, const ThresholdOptions& opt = {});

struct ScanRow {
  double delta2 = 0.0;
  std::optional<ThresholdResult> stationary;
  std::optional<ThresholdResult> oscillatory;
  std::optional<ThresholdResult> self_pulsing;
  double A2_stationary = std::nan("");
  double A2_oscillatory = std::nan("");
  double A2_self_pulsing = std::nan("");
  std::optional<InstabilityKind> primary;
  std::string note;  ///< per-point failure messages, empty on success
};

/// Threshold curves of the three instability kinds over a delta2 sweep.
/// Failures at individual points are recorded in `note`, not thrown.
std::vector<ScanRow> bifurcation_scan(const std::vector<double>& delta2_values, double delta1,
                                      double gamma, const ThresholdOptions& opt = {},
                                      int threads = 1);

}  // namespace shgq
