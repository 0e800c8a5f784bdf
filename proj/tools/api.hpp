#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "shgq/shgq.h"

namespace shgq_cli {

struct ApiFailure : std::runtime_error {
  shgq_status status;
  ApiFailure(shgq_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

inline void check(shgq_status s, const char* what) {
  if (s != SHGQ_OK) {
    throw ApiFailure(s, std::string(what) + ": " + shgq_status_name(s) + ": " + shgq_last_error());
  }
}

struct EstimatorDeleter {
  void operator()(shgq_estimator* e) const { shgq_estimator_free(e); }
};
struct ObservablesDeleter {
  void operator()(shgq_observables* o) const { shgq_observables_free(o); }
};
struct ScanDeleter {
  void operator()(shgq_scan* s) const { shgq_scan_free(s); }
};

class Estimator {
 public:
  explicit Estimator(shgq_estimator* e) : e_(e) {}
  const shgq_estimator* get() const { return e_.get(); }

  shgq_estimate corr(int f1, int m1, int f2, int m2) const {
    shgq_estimate out;
    check(shgq_corr_normalized(get(), f1, m1, f2, m2, &out), "corr_normalized");
    return out;
  }
  shgq_estimate variance(int f1, int m1, int f2, int m2, int sign) const {
    shgq_estimate out;
    check(shgq_variance_normalized(get(), f1, m1, f2, m2, sign, &out), "variance_normalized");
    return out;
  }
  shgq_estimate mean(int field, int m) const {
    shgq_estimate out;
    check(shgq_mean_intensity(get(), field, m, &out), "mean_intensity");
    return out;
  }
  shgq_k0_estimate k0() const {
    shgq_k0_estimate out;
    check(shgq_estimate_k0(get(), &out), "estimate_k0");
    return out;
  }
  double tau(int field, int m) const {
    double t;
    check(shgq_tau_int(get(), field, m, &t), "tau_int");
    return t;
  }
  int N() const {
    int n;
    check(shgq_estimator_grid(get(), &n, nullptr, nullptr, nullptr), "estimator_grid");
    return n;
  }
  long samples() const {
    long s;
    check(shgq_estimator_grid(get(), nullptr, nullptr, &s, nullptr), "estimator_grid");
    return s;
  }

 private:
  std::unique_ptr<shgq_estimator, EstimatorDeleter> e_;
};

}  // namespace shgq_cli
