#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace effdyn {

/// Number of threads FFTW may use for plans created afterwards (0 = hardware).
void set_fft_threads(int threads);
int fft_threads() noexcept;

/// Version string reported by the linked FFTW.
const char* fft_library_version() noexcept;

/// In-place, unnormalized complex DFT over a cube of side `side` and rank
/// `rank`, bound to one buffer. Plans use FFTW_ESTIMATE so the sequence of
/// operations is fixed for a given shape.
class FftPlan {
 public:
  FftPlan(std::span<std::complex<double>> buffer, std::size_t side, int rank = 1);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  FftPlan(FftPlan&& other) noexcept;
  FftPlan& operator=(FftPlan&& other) noexcept;

  void forward();
  void backward();

  std::size_t size() const noexcept { return size_; }

 private:
  void release() noexcept;

  void* forward_ = nullptr;
  void* backward_ = nullptr;
  std::size_t size_ = 0;
};

/// Type-I discrete sine transform applied to the real and imaginary parts of
/// a complex buffer of length n. Self-inverse up to the factor 2(n+1).
class SinePlan {
 public:
  /// DST-I of the complex buffer, Y_k = 2 sum_j X_j sin(pi (j+1)(k+1) / (n+1)),
  /// computed through a complex FFT of the odd extension. Applying it twice
  /// multiplies by 2(n+1).
  explicit SinePlan(std::span<std::complex<double>> buffer);
  ~SinePlan();
  SinePlan(const SinePlan&) = delete;
  SinePlan& operator=(const SinePlan&) = delete;

  void execute();
  std::size_t size() const noexcept { return size_; }

 private:
  void* plan_ = nullptr;
  std::size_t size_ = 0;
  std::complex<double>* data_ = nullptr;
  std::vector<std::complex<double>> extended_;
};

}  // namespace effdyn

namespace effdyn {

/// In-place forward DFTs of `count` interleaved lines of length n
/// (element i of line b at i * count + b).
class LineBatchPlan {
 public:
  LineBatchPlan(std::span<std::complex<double>> buffer, std::size_t n, std::size_t count);
  ~LineBatchPlan();
  LineBatchPlan(const LineBatchPlan&) = delete;
  LineBatchPlan& operator=(const LineBatchPlan&) = delete;

  void forward();

 private:
  void* plan_ = nullptr;
};

}  // namespace effdyn
