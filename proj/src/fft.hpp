#pragma once

// Thin RAII wrapper over FFTW plans bound to a fixed buffer. Plans are created
// with FFTW_ESTIMATE so results do not depend on run-time measurement.

#include <fftw3.h>

#include <complex>

namespace qcc::detail {

class FftPlan {
 public:
  FftPlan() = default;
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  FftPlan(FftPlan&& o) noexcept : plan_(o.plan_) { o.plan_ = nullptr; }
  FftPlan& operator=(FftPlan&& o) noexcept {
    if (this != &o) {
      reset();
      plan_ = o.plan_;
      o.plan_ = nullptr;
    }
    return *this;
  }
  ~FftPlan() { reset(); }

  /// In-place 2D transform of an n0 x n1 row-major array.
  static FftPlan two_d(int n0, int n1, std::complex<double>* data, int sign) {
    FftPlan p;
    auto* d = reinterpret_cast<fftw_complex*>(data);
    p.plan_ = fftw_plan_dft_2d(n0, n1, d, d, sign, FFTW_ESTIMATE);
    return p;
  }

  /// In-place transforms of `howmany` vectors of length n, elements `stride`
  /// apart, consecutive vectors `dist` apart.
  static FftPlan many(int n, int howmany, int stride, int dist, std::complex<double>* data, int sign) {
    FftPlan p;
    auto* d = reinterpret_cast<fftw_complex*>(data);
    p.plan_ = fftw_plan_many_dft(1, &n, howmany, d, nullptr, stride, dist, d, nullptr, stride, dist, sign,
                                 FFTW_ESTIMATE);
    return p;
  }

  void execute() const { fftw_execute(plan_); }

 private:
  void reset() {
    if (plan_) fftw_destroy_plan(plan_);
    plan_ = nullptr;
  }

  fftw_plan plan_ = nullptr;
};

}  // namespace qcc::detail
