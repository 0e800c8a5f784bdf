#include "linear_analysis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

namespace shgq {

namespace {

constexpr double kConditionLimit = 1e12;
constexpr double kStationaryImag = 1e-6;

bool is_real(Complex lambda) {
  return std::abs(lambda.imag()) <= 1e-8 * std::max(1.0, std::abs(lambda));
}

bool passes(EigenFilter filter, Complex lambda) {
  switch (filter) {
    case EigenFilter::All: return true;
    case EigenFilter::RealOnly: return is_real(lambda);
    case EigenFilter::ComplexOnly: return !is_real(lambda);
  }
  return true;
}

// Leading eigenvalue at one k, restricted by the filter. Re = -inf when no
// eigenvalue qualifies.
Complex leading(const Mat4& M, EigenFilter filter) {
  Eigen::ComplexEigenSolver<Mat4> solver(M, false);
  Complex best{-std::numeric_limits<double>::infinity(), 0.0};
  for (int l = 0; l < 4; ++l) {
    const Complex lam = solver.eigenvalues()(l);
    if (!passes(filter, lam)) continue;
    if (lam.real() > best.real() ||
        (lam.real() == best.real() && lam.imag() > best.imag())) {
      best = lam;
    }
  }
  return best;
}

}  // namespace

const char* to_string(InstabilityKind kind) {
  switch (kind) {
    case InstabilityKind::StationaryTransverse: return "stationary-transverse";
    case InstabilityKind::OscillatoryTransverse: return "oscillatory-transverse";
    case InstabilityKind::SelfPulsing: return "self-pulsing";
  }
  return "unknown";
}

Mat4 build_M(const DimensionlessParams& p, const SteadyState& s, double k) {
  const double k2 = k * k;
  const Complex sigma1{-1.0, p.delta1 - k2};
  const Complex sigma2{-p.gamma, p.delta2 - 0.5 * k2};
  const Complex A1 = s.A1, A2 = s.A2;
  Mat4 M;
  // clang-format off
  M << sigma1,         A2,              std::conj(A1), 0.0,
       std::conj(A2),  std::conj(sigma1), 0.0,         A1,
       -A1,            0.0,             sigma2,        0.0,
       0.0,            -std::conj(A1),  0.0,           std::conj(sigma2);
  // clang-format on
  return M;
}

ModeLinearization eigen(const Mat4& M, double k) {
  if (!M.allFinite()) throw Error(ErrorCode::Numeric, "eigen: non-finite matrix");
  Eigen::ComplexEigenSolver<Mat4> solver(M, true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::Numeric, "eigen: eigen-solver did not converge");
  }
  std::array<int, 4> order{0, 1, 2, 3};
  const auto& values = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const Complex la = values(a), lb = values(b);
    const double tol = 1e-12 * std::max(1.0, std::max(std::abs(la), std::abs(lb)));
    if (std::abs(la.real() - lb.real()) > tol) return la.real() > lb.real();
    return la.imag() > lb.imag();
  });

  ModeLinearization lin;
  lin.k = k;
  lin.M = M;
  for (int l = 0; l < 4; ++l) {
    lin.eigenvalues(l) = values(order[l]);
    lin.V.col(l) = solver.eigenvectors().col(order[l]).normalized();
  }
  Eigen::JacobiSVD<Mat4> svd(lin.V);
  const auto& sv = svd.singularValues();
  lin.condition = sv(3) > 0.0 ? sv(0) / sv(3) : std::numeric_limits<double>::infinity();
  if (!(lin.condition <= kConditionLimit)) {
    std::ostringstream os;
    os << "eigen: eigenvector matrix is near-degenerate at k = " << k
       << " (condition number " << lin.condition << ")";
    throw Error(ErrorCode::NearDegeneracy, os.str());
  }
  lin.T = lin.V.partialPivLu().inverse();
  return lin;
}

ModeLinearization linearize(const DimensionlessParams& p, const SteadyState& s, double k) {
  return eigen(build_M(p, s, k), k);
}

double growth_rate(const DimensionlessParams& p, const SteadyState& s, double k) {
  return linearize(p, s, k).eigenvalues(0).real();
}

GrowthMaximum max_growth(const DimensionlessParams& p, const ThresholdOptions& opt) {
  const auto states = steady_state(p);
  if (opt.branch < 0 || static_cast<std::size_t>(opt.branch) >= states.size()) {
    GrowthMaximum none;
    none.rate = std::numeric_limits<double>::quiet_NaN();
    return none;
  }
  const SteadyState& s = states[opt.branch];
  auto eval = [&](double k) { return leading(build_M(p, s, k), opt.filter); };

  if (opt.zero_k_only) {
    const Complex lam = eval(0.0);
    return {lam.real(), 0.0, lam};
  }

  const int n = std::max(opt.k_points, 2);
  const double h = (opt.k_max - opt.k_min) / (n - 1);
  int best = 0;
  Complex best_lam = eval(opt.k_min);
  for (int i = 1; i < n; ++i) {
    const Complex lam = eval(opt.k_min + i * h);
    if (lam.real() > best_lam.real()) {
      best_lam = lam;
      best = i;
    }
  }
  if (!std::isfinite(best_lam.real())) {
    return {best_lam.real(), opt.k_min + best * h, best_lam};
  }

  // Golden-section refinement on the neighbouring grid cells.
  double lo = opt.k_min + std::max(best - 1, 0) * h;
  double hi = opt.k_min + std::min(best + 1, n - 1) * h;
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
  Complex f1 = eval(x1), f2 = eval(x2);
  while (hi - lo > opt.k_tol) {
    if (f1.real() >= f2.real()) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = eval(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = eval(x2);
    }
  }
  GrowthMaximum out{best_lam.real(), opt.k_min + best * h, best_lam};
  const double mid = 0.5 * (lo + hi);
  const Complex lam_mid = eval(mid);
  if (lam_mid.real() >= out.rate) out = {lam_mid.real(), mid, lam_mid};
  return out;
}

ThresholdResult find_threshold(const DimensionlessParams& base, const ThresholdOptions& opt) {
  if (!(opt.E_max > opt.E_min) || opt.E_min < 0.0 || opt.E_scan_points < 2) {
    throw Error(ErrorCode::InvalidParameter, "find_threshold: invalid E window");
  }
  if (!opt.zero_k_only && !(opt.k_max > opt.k_min)) {
    throw Error(ErrorCode::InvalidParameter, "find_threshold: invalid k window");
  }
  DimensionlessParams p = base;
  p.n_th = std::numeric_limits<double>::infinity();
  auto rate_at = [&](double E) {
    p.E = E;
    return max_growth(p, opt).rate;
  };

  const int n = opt.E_scan_points;
  std::vector<double> Es(n + 1), rates(n + 1);
  for (int i = 0; i <= n; ++i) {
    Es[i] = opt.E_min + (opt.E_max - opt.E_min) * i / n;
    rates[i] = rate_at(Es[i]);
  }
  std::vector<std::pair<double, double>> brackets;
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(rates[i]) || !std::isfinite(rates[i + 1])) continue;
    if ((rates[i] < 0.0) != (rates[i + 1] < 0.0)) brackets.emplace_back(Es[i], Es[i + 1]);
  }
  if (brackets.empty()) {
    std::ostringstream os;
    os << "find_threshold: no sign change of the growth rate for E in [" << opt.E_min << ", "
       << opt.E_max << "]";
    throw Error(ErrorCode::NoBracket, os.str());
  }
  if (brackets.size() > 1 && !opt.first_crossing) {
    std::ostringstream os;
    os << "find_threshold: growth rate changes sign more than once; candidate intervals";
    for (const auto& [a, b] : brackets) os << " [" << a << ", " << b << "]";
    throw Error(ErrorCode::AmbiguousBracket, os.str());
  }

  auto [lo, hi] = brackets.front();
  const bool rising = rate_at(lo) < 0.0;
  while (hi - lo > opt.E_tol) {
    const double mid = 0.5 * (lo + hi);
    const bool negative = rate_at(mid) < 0.0;
    if (negative == rising) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  ThresholdResult result;
  result.E_t = 0.5 * (lo + hi);
  p.E = result.E_t;
  const GrowthMaximum crit = max_growth(p, opt);
  result.k_c = crit.k;
  result.lambda_imag = crit.lambda.imag();
  const double spacing = (opt.k_max - opt.k_min) / std::max(opt.k_points - 1, 1);
  if (opt.zero_k_only || result.k_c < spacing) {
    result.kind = InstabilityKind::SelfPulsing;
  } else if (std::abs(result.lambda_imag) < kStationaryImag) {
    result.kind = InstabilityKind::StationaryTransverse;
  } else {
    result.kind = InstabilityKind::OscillatoryTransverse;
  }
  return result;
}

namespace {

ScanRow scan_point(double delta2, double delta1, double gamma, const ThresholdOptions& opt) {
  ScanRow row;
  row.delta2 = delta2;
  DimensionlessParams p;
  p.delta1 = delta1;
  p.delta2 = delta2;
  p.gamma = gamma;

  const double spacing = (opt.k_max - opt.k_min) / std::max(opt.k_points - 1, 1);
  auto A2_at = [&](double E) {
    DimensionlessParams q = p;
    q.E = E;
    const auto states = steady_state(q);
    return std::abs(states.at(std::min<std::size_t>(opt.branch, states.size() - 1)).A2);
  };
  auto attempt = [&](const char* label, ThresholdOptions o, std::optional<ThresholdResult>& slot,
                     double& A2) {
    o.first_crossing = true;
    try {
      slot = find_threshold(p, o);
      A2 = A2_at(slot->E_t);
    } catch (const Error& e) {
      if (!row.note.empty()) row.note += "; ";
      row.note += std::string(label) + ": " + e.what();
    }
  };

  ThresholdOptions transverse = opt;
  transverse.k_min = std::max(opt.k_min, spacing);
  transverse.zero_k_only = false;

  ThresholdOptions stationary = transverse;
  stationary.filter = EigenFilter::RealOnly;
  attempt("stationary", stationary, row.stationary, row.A2_stationary);
  if (row.stationary) row.stationary->kind = InstabilityKind::StationaryTransverse;

  ThresholdOptions oscillatory = transverse;
  oscillatory.filter = EigenFilter::ComplexOnly;
  attempt("oscillatory", oscillatory, row.oscillatory, row.A2_oscillatory);
  if (row.oscillatory) {
    if (row.oscillatory->k_c < transverse.k_min + 2.0 * spacing) {
      // The complex pair is critical at the edge of the window: this is the
      // homogeneous Hopf branch, not a separate transverse instability.
      row.oscillatory.reset();
      row.A2_oscillatory = std::nan("");
      if (!row.note.empty()) row.note += "; ";
      row.note += "oscillatory: merges with self-pulsing";
    } else {
      row.oscillatory->kind = InstabilityKind::OscillatoryTransverse;
    }
  }

  ThresholdOptions homogeneous = opt;
  homogeneous.zero_k_only = true;
  homogeneous.filter = EigenFilter::ComplexOnly;
  attempt("self-pulsing", homogeneous, row.self_pulsing, row.A2_self_pulsing);

  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::optional<ThresholdResult>& r, InstabilityKind kind) {
    if (r && r->E_t < best) {
      best = r->E_t;
      row.primary = kind;
    }
  };
  consider(row.stationary, InstabilityKind::StationaryTransverse);
  consider(row.oscillatory, InstabilityKind::OscillatoryTransverse);
  consider(row.self_pulsing, InstabilityKind::SelfPulsing);
  return row;
}

}  // namespace

std::vector<ScanRow> bifurcation_scan(const std::vector<double>& delta2_values, double delta1,
                                      double gamma, const ThresholdOptions& opt, int threads) {
  std::vector<ScanRow> rows(delta2_values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        rows[i] = scan_point(delta2_values[i], delta1, gamma, opt);
      } catch (const std::exception& e) {
        rows[i].delta2 = delta2_values[i];
        rows[i].note = e.what();
      }
    }
  };
  const int n = std::clamp<int>(threads, 1, std::max<int>(1, static_cast<int>(rows.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

}  // namespace shgq
