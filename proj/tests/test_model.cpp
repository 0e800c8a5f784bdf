#include <doctest.h>

#include <cmath>
#include <random>

#include "model.hpp"

using namespace shgq;

namespace {

DimensionlessParams reference(double E) {
  DimensionlessParams p;
  p.delta1 = 2.0;
  p.delta2 = -2.0;
  p.gamma = 0.5;
  p.E = E;
  return p;
}

double cubic_at(const DimensionlessParams& p, double I) {
  // |(-1 + i d1) + I/(2(-g + i d2))|^2 I - E^2, written out independently.
  const Complex a{-1.0, p.delta1};
  const Complex b = 1.0 / (2.0 * Complex{-p.gamma, p.delta2});
  return std::norm(a + I * b) * I - p.E * p.E;
}

}  // namespace

TEST_CASE("zero pump has the single empty state") {
  const auto states = steady_state(reference(0.0));
  REQUIRE(states.size() == 1);
  CHECK(std::abs(states[0].A1) == 0.0);
  CHECK(std::abs(states[0].A2) == 0.0);
}

TEST_CASE("intensity at the reference threshold matches a bisection on the cubic") {
  const auto p = reference(7.481757);
  const auto states = steady_state(p);
  REQUIRE(states.size() == 1);
  double lo = 0.0, hi = p.E * p.E;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cubic_at(p, mid) < 0.0 ? lo : hi) = mid;
  }
  CHECK(states[0].intensity() == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-12));
  CHECK(states[0].residual <= 1e-10);
  CHECK(rhs_residual(states[0].A1, states[0].A2, p) <= 1e-10);
  CHECK(std::abs(states[0].A2) < 2.0);
  CHECK(q_validity(states[0].A2).valid);
}

TEST_CASE("branch count agrees with dense sampling of the cubic") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> d1(0.5, 4.0), d2(-4.0, 4.0), g(0.1, 2.0), e(0.0, 20.0);
  for (int trial = 0; trial < 1000; ++trial) {
    DimensionlessParams p;
    p.delta1 = d1(rng);
    p.delta2 = d2(rng);
    p.gamma = g(rng);
    p.E = e(rng);
    const auto states = steady_state(p);
    const double I_max = std::pow(p.E / std::min(1.0, p.gamma), 2) * 4.0;
    const int samples = 200000;
    int changes = 0;
    double prev = cubic_at(p, 0.0);
    for (int i = 1; i <= samples; ++i) {
      const double cur = cubic_at(p, I_max * i / samples);
      if ((prev < 0.0) != (cur < 0.0)) ++changes;
      prev = cur;
    }
    if (p.E == 0.0) changes = 1;
    CHECK_MESSAGE(static_cast<int>(states.size()) == changes, "trial " << trial);
    for (std::size_t b = 0; b < states.size(); ++b) {
      CHECK(rhs_residual(states[b].A1, states[b].A2, p) <= 1e-10);
      if (b > 0) CHECK(states[b].intensity() > states[b - 1].intensity());
    }
  }
}

TEST_CASE("harmonic amplitude follows from the fundamental") {
  const auto p = reference(5.0);
  const auto s = lower_steady_state(p);
  const Drift d = deterministic_rhs(s.A1, s.A2, p);
  CHECK(std::abs(d.dA2) < 1e-10);
  CHECK(std::abs(Complex{-p.gamma, p.delta2} * s.A2 - 0.5 * s.A1 * s.A1) < 1e-10);
  CHECK(s.phase1 == doctest::Approx(std::arg(s.A1)));
  CHECK(s.phase2 == doctest::Approx(std::arg(s.A2)));
}

TEST_CASE("fields decouple without fundamental and pump") {
  DimensionlessParams p = reference(0.0);
  const Complex A2{0.3, -0.7};
  const Drift d = deterministic_rhs(0.0, A2, p);
  CHECK(std::abs(d.dA1) == 0.0);
  CHECK(std::abs(d.dA2 - Complex{-p.gamma, p.delta2} * A2) < 1e-15);
}

TEST_CASE("non-finite drift input is rejected") {
  CHECK_THROWS_AS(deterministic_rhs(Complex{NAN, 0.0}, 0.0, reference(1.0)), Error);
}

TEST_CASE("validity margin") {
  CHECK(q_validity(Complex{0.0, 0.0}).margin == 2.0);
  CHECK(q_validity(Complex{0.0, 0.0}).valid);
  CHECK_FALSE(q_validity(Complex{2.0, 0.0}).valid);
  CHECK_FALSE(q_validity(Complex{0.0, -2.0}).valid);
  const std::vector<Complex> field{{0.1, 0.0}, {1.5, 0.5}, {-0.2, 0.0}};
  const auto v = q_validity(field);
  CHECK(v.worst_index == 1);
  CHECK(v.margin == doctest::Approx(2.0 - std::abs(field[1])));
}

TEST_CASE("physical rescaling") {
  PhysicalParams ph;
  ph.gamma1 = 2.0e7;
  ph.gamma2 = 1.0e7;
  ph.delta1 = 4.0e7;
  ph.delta2 = -4.0e7;
  ph.g = 35.0;
  ph.omega1 = 1.77e15;
  ph.E_in = 2.0e13;

  const Rescaled r = rescale_physical(ph);
  CHECK(r.params.delta1 == doctest::Approx(2.0));
  CHECK(r.params.delta2 == doctest::Approx(-2.0));
  CHECK(r.params.gamma == doctest::Approx(0.5));

  // Step-by-step arithmetic for n_th.
  const double c2 = ph.c * ph.c;
  const double denom = 2.0 * ph.gamma1 * ph.omega1;
  const double l_d = std::sqrt(c2 / denom);
  const double g2 = ph.g * ph.g;
  const double n_th = (ph.gamma1 * ph.gamma1) * l_d / g2;
  CHECK(std::abs(r.params.n_th - n_th) <= 1e-12 * n_th);
  CHECK(std::abs(r.scales.l_d - l_d) <= 1e-12 * l_d);
  CHECK(r.params.E == doctest::Approx(ph.E_in * ph.g / (ph.gamma1 * ph.gamma1)).epsilon(1e-14));

  PhysicalParams doubled = ph;
  doubled.g *= 2.0;
  const Rescaled r2 = rescale_physical(doubled);
  CHECK(r2.params.n_th == doctest::Approx(r.params.n_th / 4.0).epsilon(1e-14));
  CHECK(r2.params.E == doctest::Approx(2.0 * r.params.E).epsilon(1e-14));

  DimensionlessParams direct;
  direct.delta1 = ph.delta1 / ph.gamma1;
  direct.delta2 = ph.delta2 / ph.gamma1;
  direct.gamma = ph.gamma2 / ph.gamma1;
  direct.E = ph.E_in * ph.g / (ph.gamma1 * ph.gamma1);
  const auto a = steady_state(r.params), b = steady_state(direct);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a[i].A1 - b[i].A1) <= 1e-14 * std::abs(b[i].A1));
  }

  PhysicalParams bad = ph;
  bad.gamma2 = 0.0;
  CHECK_THROWS_AS(rescale_physical(bad), Error);
}
