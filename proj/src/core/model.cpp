#include "model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace shgq {

namespace {

bool finite(double x) { return std::isfinite(x); }

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidParameter, what);
}

// Real roots of c3 x^3 + c2 x^2 + c1 x + c0 with c3 > 0 (trigonometric/Cardano).
std::vector<double> real_cubic_roots(double c3, double c2, double c1, double c0) {
  const double a = c2 / c3, b = c1 / c3, c = c0 / c3;
  const double q = (a * a - 3.0 * b) / 9.0;
  const double r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
  const double q3 = q * q * q;
  std::vector<double> roots;
  if (r * r < q3) {
    const double theta = std::acos(std::clamp(r / std::sqrt(q3), -1.0, 1.0));
    const double s = -2.0 * std::sqrt(q);
    roots = {s * std::cos(theta / 3.0) - a / 3.0,
             s * std::cos((theta + 2.0 * M_PI) / 3.0) - a / 3.0,
             s * std::cos((theta - 2.0 * M_PI) / 3.0) - a / 3.0};
  } else {
    const double big = -std::copysign(std::cbrt(std::abs(r) + std::sqrt(r * r - q3)), r);
    const double small = big == 0.0 ? 0.0 : q / big;
    roots = {big + small - a / 3.0};
    // Double root when the discriminant vanishes.
    if (std::abs(big - small) <= 1e-12 * std::max(1.0, std::abs(big))) {
      roots.push_back(-0.5 * (big + small) - a / 3.0);
    }
  }
  return roots;
}

double polish(double x, double c3, double c2, double c1, double c0) {
  for (int it = 0; it < 50; ++it) {
    const double f = ((c3 * x + c2) * x + c1) * x + c0;
    const double df = (3.0 * c3 * x + 2.0 * c2) * x + c1;
    if (df == 0.0) break;
    const double step = f / df;
    x -= step;
    if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

}  // namespace

void PhysicalParams::validate() const {
  require(finite(gamma1) && gamma1 > 0.0, "gamma1 must be positive");
  require(finite(gamma2) && gamma2 > 0.0, "gamma2 must be positive");
  require(finite(omega1) && omega1 > 0.0, "omega1 must be positive");
  require(finite(g) && g > 0.0, "g must be positive");
  require(finite(c) && c > 0.0, "c must be positive");
  require(finite(delta1) && finite(delta2) && finite(E_in), "non-finite parameter");
}

void DimensionlessParams::validate() const {
  require(finite(delta1) && finite(delta2), "detunings must be finite");
  require(finite(gamma) && gamma > 0.0, "gamma must be positive");
  require(finite(E) && E >= 0.0, "E must be finite and nonnegative");
  require(!std::isnan(n_th) && n_th > 0.0, "n_th must be positive");
}

Rescaled rescale_physical(const PhysicalParams& p) {
  p.validate();
  Rescaled out;
  out.scales.l_d = std::sqrt(p.c * p.c / (2.0 * p.gamma1 * p.omega1));
  out.scales.time_unit = 1.0 / p.gamma1;
  out.scales.field_scale = p.g / p.gamma1;
  out.params.delta1 = p.delta1 / p.gamma1;
  out.params.delta2 = p.delta2 / p.gamma1;
  out.params.gamma = p.gamma2 / p.gamma1;
  out.params.E = p.E_in * p.g / (p.gamma1 * p.gamma1);
  out.params.n_th = p.gamma1 * p.gamma1 * out.scales.l_d / (p.g * p.g);
  out.params.validate();
  return out;
}

std::array<double, 4> intensity_cubic(const DimensionlessParams& p) {
  // Eliminating A2 = A1^2 b with b = 1/(2(-gamma + i delta2)) from the FH
  // equation gives (a + I b) A1 = -E, a = -1 + i delta1, hence
  // |a + I b|^2 I = E^2.
  const Complex a{-1.0, p.delta1};
  const Complex b = 1.0 / (2.0 * Complex{-p.gamma, p.delta2});
  return {std::norm(b), 2.0 * std::real(a * std::conj(b)), std::norm(a), -p.E * p.E};
}

Drift deterministic_rhs(Complex A1, Complex A2, const DimensionlessParams& p) {
  if (!std::isfinite(A1.real()) || !std::isfinite(A1.imag()) || !std::isfinite(A2.real()) ||
      !std::isfinite(A2.imag())) {
    throw Error(ErrorCode::Numeric, "deterministic_rhs: non-finite field value");
  }
  return {Complex{-1.0, p.delta1} * A1 + std::conj(A1) * A2 + p.E,
          Complex{-p.gamma, p.delta2} * A2 - 0.5 * A1 * A1};
}

double rhs_residual(Complex A1, Complex A2, const DimensionlessParams& p) {
  const auto d = deterministic_rhs(A1, A2, p);
  return std::max(std::abs(d.dA1), std::abs(d.dA2));
}

std::vector<SteadyState> steady_state(const DimensionlessParams& p) {
  p.validate();
  if (p.E == 0.0) {
    SteadyState zero;
    return {zero};
  }
  const auto [c3, c2, c1, c0] = intensity_cubic(p);
  std::vector<double> roots;
  for (double r : real_cubic_roots(c3, c2, c1, c0)) {
    const double x = polish(r, c3, c2, c1, c0);
    if (std::isfinite(x) && x >= 0.0) roots.push_back(x);
  }
  if (roots.empty()) {
    throw Error(ErrorCode::Numeric, "steady_state: intensity cubic has no nonnegative root");
  }
  std::sort(roots.begin(), roots.end());

  struct Root {
    double value;
    bool marginal;
  };
  std::vector<Root> merged;
  for (double r : roots) {
    if (!merged.empty() && std::abs(r - merged.back().value) <= 1e-10 * std::max(1.0, r)) {
      merged.back().marginal = true;
      continue;
    }
    merged.push_back({r, false});
  }

  const Complex a{-1.0, p.delta1};
  const Complex b = 1.0 / (2.0 * Complex{-p.gamma, p.delta2});
  std::vector<SteadyState> states;
  for (const auto& root : merged) {
    SteadyState s;
    s.A1 = -p.E / (a + root.value * b);
    s.A2 = s.A1 * s.A1 * b;
    s.phase1 = std::arg(s.A1);
    s.phase2 = std::arg(s.A2);
    s.residual = rhs_residual(s.A1, s.A2, p);
    s.marginal = root.marginal;
    if (!(s.residual <= 1e-10)) {
      std::ostringstream os;
      os << "steady_state: fixed-point residual " << s.residual << " exceeds 1e-10";
      throw Error(ErrorCode::Numeric, os.str());
    }
    states.push_back(s);
  }
  return states;
}

SteadyState lower_steady_state(const DimensionlessParams& p) { return steady_state(p).front(); }

QValidity q_validity(Complex A2) { return q_validity(std::span<const Complex>(&A2, 1)); }

QValidity q_validity(std::span<const Complex> A2) {
  QValidity v;
  double worst = 0.0;
  for (std::size_t i = 0; i < A2.size(); ++i) {
    const double m = std::norm(A2[i]);
    if (!(m <= worst) || i == 0) {
      worst = m;
      v.worst_index = i;
    }
  }
  v.margin = A2.empty() ? 2.0 : 2.0 - std::abs(A2[v.worst_index]);
  v.valid = v.margin > 0.0;
  return v;
}

}  // namespace shgq
