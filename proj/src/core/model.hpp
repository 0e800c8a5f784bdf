#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "error.hpp"

namespace shgq {

using Complex = std::complex<double>;

/// Cavity parameters in laboratory units.
struct PhysicalParams {
  double gamma1 = 0.0;  ///< FH cavity loss rate [1/s]
  double gamma2 = 0.0;  ///< SH cavity loss rate [1/s]
  double delta1 = 0.0;  ///< FH detuning from the nearest cavity resonance [rad/s]
  double delta2 = 0.0;  ///< SH detuning [rad/s]
  double g = 0.0;       ///< nonlinear coupling
  double omega1 = 0.0;  ///< fundamental angular frequency [rad/s]
  double c = 299792458.0;
  double E_in = 0.0;    ///< injected pump amplitude

  void validate() const;
};

/// Control parameters of the scaled model.
///
/// The Q representation is only admissible while the intra-cavity SH field
/// stays inside |A2| < 2, which for the homogeneous state requires delta1 > 0.
/// That condition is checked where noise is actually sampled, not here.
struct DimensionlessParams {
  double delta1 = 2.0;
  double delta2 = -2.0;
  double gamma = 0.5;
  double E = 0.0;
  double n_th = 1e8;  ///< +inf switches the noise off

  void validate() const;
};

struct ScaleReport {
  double l_d = 0.0;          ///< diffraction length [m]
  double time_unit = 0.0;    ///< 1/gamma1 [s]
  double field_scale = 0.0;  ///< A = alpha * field_scale
};

struct Rescaled {
  DimensionlessParams params;
  ScaleReport scales;
};

Rescaled rescale_physical(const PhysicalParams& p);

struct SteadyState {
  Complex A1{};
  Complex A2{};
  double phase1 = 0.0;
  double phase2 = 0.0;
  double residual = 0.0;
  bool marginal = false;  ///< merged double root of the intensity cubic (fold point)

  double intensity() const { return std::norm(A1); }
};

/// Coefficients (c3, c2, c1, c0) of the real cubic in I = |A1|^2 whose
/// nonnegative roots are the homogeneous states.
std::array<double, 4> intensity_cubic(const DimensionlessParams& p);

/// All homogeneous steady states sorted by ascending |A1|^2.
std::vector<SteadyState> steady_state(const DimensionlessParams& p);

/// Lowest-intensity branch; convenience for the monostable parameter region.
SteadyState lower_steady_state(const DimensionlessParams& p);

struct Drift {
  Complex dA1;
  Complex dA2;
};

/// Deterministic part of the scaled Langevin equations for homogeneous fields.
Drift deterministic_rhs(Complex A1, Complex A2, const DimensionlessParams& p);

double rhs_residual(Complex A1, Complex A2, const DimensionlessParams& p);

struct QValidity {
  double margin = 2.0;  ///< 2 - max |A2|
  bool valid = true;
  std::size_t worst_index = 0;
};

QValidity q_validity(Complex A2);
QValidity q_validity(std::span<const Complex> A2);

}  // namespace shgq
