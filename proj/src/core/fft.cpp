#include "fft.hpp"

#include <cstring>
#include <mutex>

#include "error.hpp"

namespace shgq {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft::Fft(int n) : n_(n) {
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "Fft: length must be positive");
  std::lock_guard<std::mutex> lock(planner_mutex());
  buffer_ = fftw_alloc_complex(n);
  forward_ = fftw_plan_dft_1d(n, buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_ = fftw_plan_dft_1d(n, buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!forward_ || !backward_) throw Error(ErrorCode::Numeric, "Fft: planner failed");
}

Fft::~Fft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(forward_);
  fftw_destroy_plan(backward_);
  fftw_free(buffer_);
}

void Fft::run(fftw_plan plan, std::vector<std::complex<double>>& data) const {
  if (static_cast<int>(data.size()) != n_) throw Error(ErrorCode::ShapeMismatch, "Fft: length mismatch");
  std::memcpy(buffer_, data.data(), sizeof(fftw_complex) * n_);
  fftw_execute(plan);
  std::memcpy(static_cast<void*>(data.data()), buffer_, sizeof(fftw_complex) * n_);
}

void Fft::backward(std::vector<std::complex<double>>& data) const { run(backward_, data); }

void Fft::forward(std::vector<std::complex<double>>& data) const { run(forward_, data); }

}  // namespace shgq
