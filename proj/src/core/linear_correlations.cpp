#include "linear_correlations.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace shgq {

// Ordering constants: the -1/2 in eta_j and in the variance denominators is
// one commutator [b, b^dagger] = 2 kappa in units of 2 kappa G; -1/4 in zeta_j
// is the same commutator shared between a mean field and its fluctuation;
// the -1 in the cross-variance denominator is the sum of both commutators.

NoiseMatrices noise_matrices(const Mat4& T, const DimensionlessParams& p, const SteadyState& s) {
  const Complex A2 = s.A2;
  const double g = p.gamma;
  NoiseMatrices nm;
  for (int l = 0; l < 4; ++l) {
    for (int m = 0; m < 4; ++m) {
      nm.A(l, m) = T(l, 0) * std::conj(T(m, 0)) - 0.5 * A2 * T(l, 0) * std::conj(T(m, 1)) +
                   T(l, 1) * std::conj(T(m, 1)) - 0.5 * std::conj(A2) * T(l, 1) * std::conj(T(m, 0)) +
                   g * T(l, 2) * std::conj(T(m, 2)) + g * T(l, 3) * std::conj(T(m, 3));
      nm.B(l, m) = -0.5 * A2 * T(l, 0) * T(m, 0) + T(l, 0) * T(m, 1) + T(l, 1) * T(m, 0) -
                   0.5 * std::conj(A2) * T(l, 1) * T(m, 1) + g * T(l, 2) * T(m, 3) +
                   g * T(l, 3) * T(m, 2);
    }
  }
  return nm;
}

GFunctions g_functions(const ModeLinearization& lin, const NoiseMatrices& nm) {
  const auto& lam = lin.eigenvalues;
  for (int l = 0; l < 4; ++l) {
    for (int m = 0; m < 4; ++m) {
      const double a = (lam(l) + std::conj(lam(m))).real();
      const double b = (lam(l) + lam(m)).real();
      if (!(a < -1e-12) || !(b < -1e-12)) {
        std::ostringstream os;
        os << "g_functions: eigenvalue pair sum reaches zero at k = " << lin.k
           << " (state is at or above threshold)";
        throw Error(ErrorCode::ThresholdDivergence, os.str());
      }
    }
  }
  GFunctions G;
  G.k = lin.k;
  const auto& V = lin.V;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Complex gm = 0.0, gp = 0.0;
      for (int l = 0; l < 4; ++l) {
        for (int m = 0; m < 4; ++m) {
          gm += nm.A(l, m) * V(2 * i, l) * std::conj(V(2 * j, m)) / -(lam(l) + std::conj(lam(m)));
          gp += nm.B(l, m) * V(2 * i, l) * V(2 * j, m) / -(lam(l) + lam(m));
        }
      }
      G.Gminus(i, j) = gm;
      G.Gplus(i, j) = gp;
    }
  }
  return G;
}

GFunctions g_functions(const DimensionlessParams& p, const SteadyState& s, double k) {
  const auto lin = linearize(p, s, k);
  return g_functions(lin, noise_matrices(lin.T, p, s));
}

namespace {

double occupation(const GFunctions& G, int j) { return G.Gminus(j, j).real(); }

double eta(const GFunctions& G, int j) {
  const double g = occupation(G, j);
  const double e = g * (g - 0.5);
  if (!(e > 0.0)) {
    throw Error(ErrorCode::Numeric, "normalized_correlation: mode occupation at or below vacuum");
  }
  return e;
}

}  // namespace

NormalizedCorrelations normalized_correlation(const GFunctions& G) {
  const double e1 = eta(G, 0), e2 = eta(G, 1);
  NormalizedCorrelations c;
  c.c11 = std::norm(G.Gplus(0, 0)) / e1;
  c.c22 = std::norm(G.Gplus(1, 1)) / e2;
  c.c12_same = std::norm(G.Gminus(0, 1)) / std::sqrt(e1 * e2);
  c.c12_opp = std::norm(G.Gplus(0, 1)) / std::sqrt(e1 * e2);
  return c;
}

namespace {

std::array<Complex, 2> amplitudes(const SteadyState& s) { return {s.A1, s.A2}; }

}  // namespace

double normalized_correlation_k0(const GFunctions& G, const SteadyState& s) {
  const auto A = amplitudes(s);
  std::array<double, 2> zeta{};
  for (int j = 0; j < 2; ++j) {
    zeta[j] = std::norm(A[j]) * (occupation(G, j) - 0.25) +
              (std::conj(A[j]) * std::conj(A[j]) * G.Gplus(j, j)).real();
    if (!(zeta[j] > 0.0)) {
      throw Error(ErrorCode::Numeric, "normalized_correlation_k0: vanishing intensity fluctuations");
    }
  }
  const Complex num = std::conj(A[0]) * A[1] * G.Gminus(0, 1) +
                      std::conj(A[0]) * std::conj(A[1]) * G.Gplus(0, 1);
  return num.real() / std::sqrt(zeta[0] * zeta[1]);
}

VarianceSelf variance_self(const GFunctions& G) {
  VarianceSelf v;
  for (int j = 0; j < 2; ++j) {
    const double gm = occupation(G, j);
    const double denom = gm - 0.5;
    if (!(denom > 0.0)) {
      throw Error(ErrorCode::Numeric, "variance_self: non-positive shot-noise level");
    }
    const double a = std::norm(G.Gminus(j, j)), b = std::norm(G.Gplus(j, j));
    v.minus[j] = (2.0 * (a - b) - gm) / denom;
    v.plus[j] = (2.0 * (a + b) - gm) / denom;
  }
  return v;
}

VarianceCross variance_cross(const GFunctions& G, int nu) {
  if (nu != 1 && nu != -1) throw Error(ErrorCode::InvalidParameter, "variance_cross: nu must be +1 or -1");
  const double sum = occupation(G, 0) + occupation(G, 1);
  const double denom = sum - 1.0;
  if (!(denom > 0.0)) {
    throw Error(ErrorCode::Numeric, "variance_cross: non-positive shot-noise level");
  }
  const double squares = std::norm(G.Gminus(0, 0)) + std::norm(G.Gminus(1, 1));
  // Same-k pairs are correlated through G-, opposite pairs through G+.
  const double pair = nu == 1 ? std::norm(G.Gminus(0, 1)) : std::norm(G.Gplus(0, 1));
  return {(2.0 * (squares - 2.0 * pair) - sum) / denom, (2.0 * (squares + 2.0 * pair) - sum) / denom};
}

VarianceK0 variance_k0(const GFunctions& G, const SteadyState& s) {
  const auto A = amplitudes(s);
  if (std::abs(A[0]) == 0.0 || std::abs(A[1]) == 0.0) {
    throw Error(ErrorCode::InvalidParameter, "variance_k0: zero steady state");
  }
  VarianceK0 v;
  Complex diag = 0.0;
  double weight = 0.0, occ = 0.0;
  for (int j = 0; j < 2; ++j) {
    diag += std::conj(A[j]) * std::conj(A[j]) * G.Gplus(j, j);
    weight += std::norm(A[j]);
    occ += std::norm(A[j]) * occupation(G, j);
    v.self_minus[j] = 0.0;
    const Complex rotated = std::polar(1.0, -2.0 * std::arg(A[j])) * G.Gplus(j, j);
    v.self_plus[j] = 4.0 * rotated.real() + 4.0 * occupation(G, j) - 1.0;
  }
  const Complex cross = std::conj(A[0]) * (std::conj(A[1]) * G.Gplus(0, 1) + A[1] * G.Gminus(0, 1));
  v.cross.minus = 4.0 * ((diag - 2.0 * cross).real() + occ) / weight - 1.0;
  v.cross.plus = 4.0 * ((diag + 2.0 * cross).real() + occ) / weight - 1.0;
  return v;
}

CorrelationPrediction predict(const DimensionlessParams& p, const SteadyState& s, double k) {
  CorrelationPrediction out;
  out.k = k;
  out.G = g_functions(p, s, k);
  if (k == 0.0) {
    const double c = normalized_correlation_k0(out.G, s);
    out.cn = {1.0, 1.0, c, c};
    const VarianceK0 v = variance_k0(out.G, s);
    out.self.minus = v.self_minus;
    out.self.plus = v.self_plus;
    out.cross_same = v.cross;
    out.cross_opp = v.cross;
    return out;
  }
  out.cn = normalized_correlation(out.G);
  out.self = variance_self(out.G);
  out.cross_same = variance_cross(out.G, 1);
  out.cross_opp = variance_cross(out.G, -1);
  return out;
}

std::vector<double> uniform_k_grid(double k_max, int n) {
  if (n < 2 || !(k_max > 0.0)) throw Error(ErrorCode::InvalidParameter, "uniform_k_grid: bad grid");
  std::vector<double> k(n);
  for (int i = 0; i < n; ++i) k[i] = k_max * i / (n - 1);
  return k;
}

std::vector<CorrelationPrediction> correlation_spectrum(const DimensionlessParams& p,
                                                        const SteadyState& s,
                                                        const std::vector<double>& k, int threads) {
  std::vector<CorrelationPrediction> rows(k.size());
  std::vector<std::string> failures(k.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < k.size(); i = next++) {
      try {
        rows[i] = predict(p, s, k[i]);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const int n = std::clamp<int>(threads, 1, std::max<int>(1, static_cast<int>(k.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ostringstream os;
  int count = 0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (failures[i].empty()) continue;
    if (count++ < 3) os << "\n  k = " << k[i] << ": " << failures[i];
  }
  if (count > 0) {
    throw Error(ErrorCode::ThresholdDivergence,
                "correlation_spectrum: " + std::to_string(count) + " wavenumbers failed" + os.str());
  }
  return rows;
}

}  // namespace shgq
