#pragma once

#include <complex>
#include <fftw3.h>
#include <vector>

namespace shgq {

/// Complex DFT of fixed length through an aligned work buffer. Plans are built
/// with FFTW_ESTIMATE so that results do not depend on planner timing. Not
/// safe for concurrent use of one instance.
class Fft {
 public:
  explicit Fft(int n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  int size() const { return n_; }

  /// X_n = sum_m x_m exp(+2 pi i n m / N), unnormalised.
  void backward(std::vector<std::complex<double>>& data) const;
  /// x_m = sum_n X_n exp(-2 pi i n m / N), unnormalised.
  void forward(std::vector<std::complex<double>>& data) const;

 private:
  void run(fftw_plan plan, std::vector<std::complex<double>>& data) const;

  int n_;
  fftw_complex* buffer_;
  fftw_plan forward_;
  fftw_plan backward_;
};

}  // namespace shgq
