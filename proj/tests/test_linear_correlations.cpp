#include <doctest.h>

#include <cmath>
#include <random>

#include "linear_correlations.hpp"

using namespace shgq;

namespace {

DimensionlessParams reference(double E = 0.0) {
  DimensionlessParams p;
  p.delta1 = 2.0;
  p.delta2 = -2.0;
  p.gamma = 0.5;
  p.E = E;
  return p;
}

const ThresholdResult& critical() {
  static const ThresholdResult r = find_threshold(reference(), ThresholdOptions{});
  return r;
}

DimensionlessParams at_ratio(double ratio) { return reference(ratio * critical().E_t); }

// Equal-time covariance of the linear system dw = M w dt + noise with
// <noise noise^dagger> = C dt, from the Kronecker form of M S + S M^dagger + C = 0.
Mat4 lyapunov(const Mat4& M, const Mat4& C) {
  using Mat16 = Eigen::Matrix<Complex, 16, 16>;
  using Vec16 = Eigen::Matrix<Complex, 16, 1>;
  const Mat4 I = Mat4::Identity();
  Mat16 K;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d)
          // vec index column-major: S(c,d) -> c + 4d; row (a,b) -> a + 4b.
          K(a + 4 * b, c + 4 * d) = M(a, c) * I(d, b) + I(a, c) * std::conj(M(b, d));
  Vec16 rhs;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) rhs(a + 4 * b) = -C(a, b);
  const Vec16 x = K.fullPivLu().solve(rhs);
  Mat4 S;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) S(a, b) = x(a + 4 * b);
  return S;
}

Mat4 diffusion(const DimensionlessParams& p, const SteadyState& s) {
  Mat4 C = Mat4::Zero();
  C(0, 0) = C(1, 1) = 1.0;
  C(0, 1) = -0.5 * s.A2;
  C(1, 0) = -0.5 * std::conj(s.A2);
  C(2, 2) = C(3, 3) = p.gamma;
  return C;
}

}  // namespace

TEST_CASE("noise matrices for an identity transform") {
  DimensionlessParams p = reference();
  p.gamma = 1.0;
  const NoiseMatrices nm = noise_matrices(Mat4::Identity(), p, SteadyState{});
  CHECK((nm.A - Mat4::Identity()).norm() == 0.0);
  Mat4 B = Mat4::Zero();
  B(0, 1) = B(1, 0) = B(2, 3) = B(3, 2) = 1.0;
  CHECK((nm.B - B).norm() == 0.0);
}

TEST_CASE("noise matrices match the congruence form") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 50; ++trial) {
    Mat4 T;
    for (int i = 0; i < 16; ++i) T.data()[i] = Complex{n(rng), n(rng)};
    DimensionlessParams p = reference();
    p.gamma = 0.3 + std::abs(n(rng));
    SteadyState s;
    s.A2 = Complex{n(rng), n(rng)};
    const NoiseMatrices nm = noise_matrices(T, p, s);

    Mat4 D = Mat4::Zero();
    D(0, 0) = -0.5 * s.A2;
    D(1, 1) = -0.5 * std::conj(s.A2);
    D(0, 1) = D(1, 0) = 1.0;
    D(2, 3) = D(3, 2) = p.gamma;
    const Mat4 A = T * diffusion(p, s) * T.adjoint();
    const Mat4 B = T * D * T.transpose();
    CHECK((nm.A - A).norm() < 1e-12 * A.norm());
    CHECK((nm.B - B).norm() < 1e-12 * B.norm());
  }
  const auto ps = at_ratio(0.99);
  const auto s = lower_steady_state(ps);
  for (double k : {0.0, 0.5, 1.83, 3.0}) {
    const auto lin = linearize(ps, s, k);
    const auto nm = noise_matrices(lin.T, ps, s);
    CHECK((nm.A - nm.A.adjoint()).norm() < 1e-12 * nm.A.norm());
    CHECK((nm.B - nm.B.transpose()).norm() < 1e-12 * nm.B.norm());
  }
}

TEST_CASE("empty cavity is in the vacuum state") {
  const auto p = reference(0.0);
  for (double k : {0.0, 0.7, 2.0}) {
    const GFunctions G = g_functions(p, lower_steady_state(p), k);
    CHECK(std::abs(G.Gminus(0, 0) - 0.5) < 1e-13);
    CHECK(std::abs(G.Gminus(1, 1) - 0.5) < 1e-13);
    CHECK(std::abs(G.Gminus(0, 1)) < 1e-13);
    CHECK(G.Gplus.norm() < 1e-13);
  }
  CHECK_THROWS_AS(normalized_correlation_k0(g_functions(p, lower_steady_state(p), 0.0),
                                            lower_steady_state(p)),
                  Error);
}

TEST_CASE("eigenbasis sums agree with the Lyapunov solution") {
  for (double ratio : {0.5, 0.9, 0.99}) {
    const auto p = at_ratio(ratio);
    const auto s = lower_steady_state(p);
    for (double k : {0.0, 0.4, 1.2, 1.83, 2.6, 10.0}) {
      const auto G = g_functions(p, s, k);
      const Mat4 S = lyapunov(build_M(p, s, k), diffusion(p, s));
      const double scale = std::max(1.0, S.norm());
      CHECK(std::abs(G.Gminus(0, 0) - S(0, 0)) < 1e-10 * scale);
      CHECK(std::abs(G.Gminus(0, 1) - S(0, 2)) < 1e-10 * scale);
      CHECK(std::abs(G.Gminus(1, 1) - S(2, 2)) < 1e-10 * scale);
      CHECK(std::abs(G.Gplus(0, 0) - S(0, 1)) < 1e-10 * scale);
      CHECK(std::abs(G.Gplus(0, 1) - S(0, 3)) < 1e-10 * scale);
      CHECK(std::abs(G.Gplus(1, 1) - S(2, 3)) < 1e-10 * scale);
      CHECK(std::abs(G.Gminus(0, 0).imag()) < 1e-10 * scale);
      CHECK(std::abs(G.Gminus(1, 1).imag()) < 1e-10 * scale);
    }
  }
}

TEST_CASE("divergence at threshold is refused") {
  const auto p = at_ratio(1.0 + 1e-6);
  const auto s = lower_steady_state(p);
  try {
    g_functions(p, s, critical().k_c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ThresholdDivergence);
  }
}

TEST_CASE("large-k asymptotics") {
  const auto p = at_ratio(0.99);
  const auto r = predict(p, lower_steady_state(p), 50.0);
  CHECK(r.self.minus[0] == doctest::Approx(0.5).epsilon(0.01));
  CHECK(r.self.plus[0] == doctest::Approx(1.5).epsilon(0.01));
  CHECK(r.self.minus[1] == doctest::Approx(1.0).epsilon(0.01));
  CHECK(r.self.plus[1] == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("correlations near the critical wavenumber") {
  const double k_c = critical().k_c;
  const auto p = at_ratio(0.99);
  const auto s = lower_steady_state(p);
  const auto c = predict(p, s, k_c).cn;
  CHECK(c.c11 >= c.c12_opp);
  CHECK(c.c12_opp >= c.c22);
  for (double v : {c.c11, c.c22, c.c12_same, c.c12_opp}) {
    CHECK(v > 0.9);
    CHECK(v <= 1.0);
  }

  const auto p9 = at_ratio(0.9);
  const auto c9 = predict(p9, lower_steady_state(p9), k_c).cn;
  CHECK(c9.c11 >= c9.c12_opp);
  CHECK(c9.c12_opp >= c9.c22);

  const auto p4 = at_ratio(0.9999);
  const auto c4 = predict(p4, lower_steady_state(p4), k_c).cn;
  for (double v : {c4.c11, c4.c22, c4.c12_same, c4.c12_opp}) CHECK(v > 0.99);
}

TEST_CASE("same-k cross correlation is weak inside the band") {
  const auto p = at_ratio(0.99);
  const auto s = lower_steady_state(p);
  for (double k : {0.3, 0.6, 1.0}) {
    const auto c = predict(p, s, k).cn;
    CHECK(c.c12_same < 0.05);
    CHECK(c.c12_opp > c.c12_same);
  }
}

TEST_CASE("zero-mode correlations") {
  const auto p9 = at_ratio(0.9);
  const auto s9 = lower_steady_state(p9);
  CHECK(predict(p9, s9, 0.0).cn.c12_same < 0.0);

  const auto p = at_ratio(0.99);
  const auto s = lower_steady_state(p);
  const auto v = variance_k0(g_functions(p, s, 0.0), s);
  CHECK(v.self_minus[0] == 0.0);
  CHECK(v.self_minus[1] == 0.0);
  CHECK(v.cross.plus < std::min(v.self_plus[0], v.self_plus[1]));

  SteadyState empty;
  CHECK_THROWS_AS(variance_k0(g_functions(p, s, 0.0), empty), Error);
}

TEST_CASE("zero-mode self variance is invariant under phase rotation") {
  const auto p = at_ratio(0.95);
  const auto s = lower_steady_state(p);
  const auto G = g_functions(p, s, 0.0);
  const auto base = variance_k0(G, s);
  for (double phi : {0.3, 1.7, -2.4}) {
    SteadyState r = s;
    r.A1 *= std::polar(1.0, phi);
    r.A2 *= std::polar(1.0, 2.0 * phi);
    GFunctions Gr = G;
    Gr.Gplus(0, 0) *= std::polar(1.0, 2.0 * phi);
    Gr.Gplus(1, 1) *= std::polar(1.0, 4.0 * phi);
    Gr.Gplus(0, 1) *= std::polar(1.0, 3.0 * phi);
    Gr.Gminus(0, 1) *= std::polar(1.0, -phi);
    Gr.Gminus(1, 0) *= std::polar(1.0, phi);
    const auto rot = variance_k0(Gr, r);
    CHECK(rot.self_plus[0] == doctest::Approx(base.self_plus[0]).epsilon(1e-12));
    CHECK(rot.self_plus[1] == doctest::Approx(base.self_plus[1]).epsilon(1e-12));
    CHECK(rot.cross.plus == doctest::Approx(base.cross.plus).epsilon(1e-12));
    CHECK(normalized_correlation_k0(Gr, r) == doctest::Approx(normalized_correlation_k0(G, s)).epsilon(1e-12));
  }
}

TEST_CASE("cross variances") {
  const auto p = at_ratio(0.99);
  const auto s = lower_steady_state(p);
  const auto small = predict(p, s, 0.2);
  CHECK(small.cross_same.plus == doctest::Approx(small.cross_same.minus).epsilon(0.05));
  for (double k : {0.3, 0.6, 1.0}) CHECK(predict(p, s, k).cross_opp.minus < 1.0);
  for (const auto& row : correlation_spectrum(p, s, uniform_k_grid(2.5 * critical().k_c, 256))) {
    if (row.k == 0.0) continue;
    CHECK(row.cross_same.minus >= 1.0);
    CHECK(row.self.minus[0] < 1.0);
  }
  CHECK_THROWS_AS(variance_cross(small.G, 0), Error);
}

TEST_CASE("spectrum peaks at the critical wavenumber") {
  const double k_c = critical().k_c;
  const auto grid = uniform_k_grid(2.5 * k_c, 1024);
  const double step = grid[1] - grid[0];
  for (double ratio : {0.9, 0.99, 0.999}) {
    const auto p = at_ratio(ratio);
    const auto rows = correlation_spectrum(p, lower_steady_state(p), grid, 2);
    REQUIRE(rows.size() == grid.size());
    auto argmax = [&](auto get) {
      std::size_t best = 1;
      for (std::size_t i = 1; i < rows.size(); ++i)
        if (get(rows[i]) > get(rows[best])) best = i;
      return static_cast<long>(best);
    };
    const long i_c = std::lround(k_c / step);
    CHECK(std::labs(argmax([](const auto& r) { return r.cn.c11; }) - i_c) <= 1);
    CHECK(std::labs(argmax([](const auto& r) { return r.cn.c22; }) - i_c) <= 1);
    CHECK(std::labs(argmax([](const auto& r) { return r.cn.c12_opp; }) - i_c) <= 1);
    CHECK(std::labs(argmax([](const auto& r) { return r.cn.c12_same; }) - i_c) <= 1);
    if (ratio == 0.99) {
      CHECK(std::labs(argmax([](const auto& r) { return r.self.plus[0]; }) - i_c) <= 1);
      double peak = 0.0;
      for (const auto& r : rows) peak = std::max(peak, r.self.plus[0]);
      CHECK(peak >= 25.0);
      CHECK(peak <= 45.0);
    }
  }
}

TEST_CASE("correlation at the critical wavenumber grows with the pump") {
  const double k_c = critical().k_c;
  double prev = -1.0;
  for (int i = 0; i <= 50; ++i) {
    const double ratio = 0.5 + (0.999 - 0.5) * i / 50;
    const auto p = at_ratio(ratio);
    const double c = predict(p, lower_steady_state(p), k_c).cn.c11;
    CHECK(c > prev);
    prev = c;
  }
}

TEST_CASE("fields decouple without a fundamental") {
  const auto p = reference(0.0);
  SteadyState s;
  s.A2 = Complex{0.6, -0.3};
  for (double k : {0.0, 0.8, 1.9}) {
    const auto G = g_functions(p, s, k);
    CHECK(std::abs(G.Gminus(0, 1)) < 1e-12);
    CHECK(std::abs(G.Gplus(0, 1)) < 1e-12);
  }
}
