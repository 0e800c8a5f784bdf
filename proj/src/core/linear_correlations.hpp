#pragma once

#include <array>
#include <vector>

#include "linear_analysis.hpp"

namespace shgq {

using Mat2 = Eigen::Matrix<Complex, 2, 2>;

/// Noise matrices projected on the eigenbasis: A = <eta eta^dagger>,
/// B = <eta eta^T> for the eigen-coordinates eta = T w.
struct NoiseMatrices {
  Mat4 A = Mat4::Zero();
  Mat4 B = Mat4::Zero();
};

NoiseMatrices noise_matrices(const Mat4& T, const DimensionlessParams& p, const SteadyState& s);

/// Scaled equal-time moments of the linear fluctuations: with
/// kappa = 1/(n_th dk), <b_i(k) b_j(k)*> = 2 kappa Gminus(i,j) and
/// <b_i(k) b_j(-k)> = 2 kappa Gplus(i,j).
struct GFunctions {
  double k = 0.0;
  Mat2 Gminus = Mat2::Zero();
  Mat2 Gplus = Mat2::Zero();
};

/// Throws ThresholdDivergence when any pair sum of eigenvalues has real part
/// above -1e-12.
GFunctions g_functions(const ModeLinearization& lin, const NoiseMatrices& nm);

GFunctions g_functions(const DimensionlessParams& p, const SteadyState& s, double k);

/// Normalized intensity correlations between the paired modes.
struct NormalizedCorrelations {
  double c11 = 0.0;      ///< C11(k,-k)
  double c22 = 0.0;      ///< C22(k,-k)
  double c12_same = 0.0; ///< C12(k,k)
  double c12_opp = 0.0;  ///< C12(k,-k)
};

NormalizedCorrelations normalized_correlation(const GFunctions& G);

/// C12(0,0) from the interference terms with the mean fields.
double normalized_correlation_k0(const GFunctions& G, const SteadyState& s);

/// Shot-noise normalised variances of N_j(k) -/+ N_j(-k), index j-1.
struct VarianceSelf {
  std::array<double, 2> minus{};
  std::array<double, 2> plus{};
};

VarianceSelf variance_self(const GFunctions& G);

struct VarianceCross {
  double minus = 0.0;
  double plus = 0.0;
};

/// Shot-noise normalised variances of N_1(k) -/+ N_2(nu k), nu = +1 or -1.
VarianceCross variance_cross(const GFunctions& G, int nu);

struct VarianceK0 {
  VarianceCross cross;  ///< N_1(0) -/+ N_2(0)
  std::array<double, 2> self_minus{};
  std::array<double, 2> self_plus{};
};

VarianceK0 variance_k0(const GFunctions& G, const SteadyState& s);

struct CorrelationPrediction {
  double k = 0.0;
  NormalizedCorrelations cn;
  VarianceSelf self;
  VarianceCross cross_same;  ///< (k, k)
  VarianceCross cross_opp;   ///< (k, -k)
  GFunctions G;
};

/// Full prediction at one wavenumber. At k = 0 the mean-field interference
/// formulas replace the generic ones.
CorrelationPrediction predict(const DimensionlessParams& p, const SteadyState& s, double k);

/// n points on [0, k_max].
std::vector<double> uniform_k_grid(double k_max, int n);

std::vector<CorrelationPrediction> correlation_spectrum(const DimensionlessParams& p,
                                                        const SteadyState& s,
                                                        const std::vector<double>& k,
                                                        int threads = 1);

}  // namespace shgq
