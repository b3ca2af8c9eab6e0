#include "effdyn/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <thread>
#include <utility>
#include <vector>

#include "effdyn/error.hpp"

namespace effdyn {
namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int g_threads = 1;

void configure_planner_locked() {
  static bool initialized = false;
  if (!initialized) {
    fftw_init_threads();
    initialized = true;
  }
  fftw_plan_with_nthreads(g_threads);
}

}  // namespace

void set_fft_threads(int threads) {
  std::lock_guard lock(planner_mutex());
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  g_threads = threads;
}

int fft_threads() noexcept { return g_threads; }

const char* fft_library_version() noexcept { return fftw_version; }

FftPlan::FftPlan(std::span<std::complex<double>> buffer, std::size_t side, int rank) {
  require(rank >= 1 && side >= 1, ErrorCategory::structural, "FftPlan: bad shape");
  std::size_t n = 1;
  for (int r = 0; r < rank; ++r) n *= side;
  require(buffer.size() == n, ErrorCategory::structural, "FftPlan: buffer size does not match shape");
  size_ = n;
  std::vector<int> dims(static_cast<std::size_t>(rank), static_cast<int>(side));
  auto* data = reinterpret_cast<fftw_complex*>(buffer.data());
  std::lock_guard lock(planner_mutex());
  configure_planner_locked();
  forward_ = fftw_plan_dft(rank, dims.data(), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_ = fftw_plan_dft(rank, dims.data(), data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!forward_ || !backward_) {
    release();
    fail(ErrorCategory::resource, "FftPlan: FFTW could not create a plan");
  }
}

FftPlan::~FftPlan() { release(); }

FftPlan::FftPlan(FftPlan&& other) noexcept
    : forward_(std::exchange(other.forward_, nullptr)),
      backward_(std::exchange(other.backward_, nullptr)),
      size_(other.size_) {}

FftPlan& FftPlan::operator=(FftPlan&& other) noexcept {
  if (this != &other) {
    release();
    forward_ = std::exchange(other.forward_, nullptr);
    backward_ = std::exchange(other.backward_, nullptr);
    size_ = other.size_;
  }
  return *this;
}

void FftPlan::release() noexcept {
  std::lock_guard lock(planner_mutex());
  if (forward_) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  if (backward_) fftw_destroy_plan(static_cast<fftw_plan>(backward_));
  forward_ = backward_ = nullptr;
}

void FftPlan::forward() { fftw_execute(static_cast<fftw_plan>(forward_)); }
void FftPlan::backward() { fftw_execute(static_cast<fftw_plan>(backward_)); }

SinePlan::SinePlan(std::span<std::complex<double>> buffer)
    : size_(buffer.size()), data_(buffer.data()), extended_(2 * (buffer.size() + 1)) {
  require(size_ >= 1, ErrorCategory::structural, "SinePlan: empty buffer");
  const int n = static_cast<int>(extended_.size());
  auto* data = reinterpret_cast<fftw_complex*>(extended_.data());
  std::lock_guard lock(planner_mutex());
  configure_planner_locked();
  plan_ = fftw_plan_dft_1d(n, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
  require(plan_ != nullptr, ErrorCategory::resource, "SinePlan: FFTW could not create a plan");
}

SinePlan::~SinePlan() {
  std::lock_guard lock(planner_mutex());
  if (plan_) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void SinePlan::execute() {
  // Odd extension [0, x, 0, -reverse(x)]; its DFT is -2i times the sine sum.
  const std::size_t n = size_, len = extended_.size();
  extended_[0] = 0.0;
  extended_[n + 1] = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    extended_[j + 1] = data_[j];
    extended_[len - 1 - j] = -data_[j];
  }
  fftw_execute(static_cast<fftw_plan>(plan_));
  const std::complex<double> i(0.0, 1.0);
  for (std::size_t k = 0; k < n; ++k) data_[k] = i * extended_[k + 1];
}

}  // namespace effdyn

namespace effdyn {

LineBatchPlan::LineBatchPlan(std::span<std::complex<double>> buffer, std::size_t n,
                             std::size_t count) {
  require(buffer.size() == n * count, ErrorCategory::structural,
          "LineBatchPlan: buffer size does not match shape");
  const int len = static_cast<int>(n);
  auto* data = reinterpret_cast<fftw_complex*>(buffer.data());
  std::lock_guard lock(planner_mutex());
  configure_planner_locked();
  plan_ = fftw_plan_many_dft(1, &len, static_cast<int>(count), data, nullptr,
                             static_cast<int>(count), 1, data, nullptr, static_cast<int>(count), 1,
                             FFTW_FORWARD, FFTW_ESTIMATE);
  require(plan_ != nullptr, ErrorCategory::resource, "LineBatchPlan: FFTW could not create a plan");
}

LineBatchPlan::~LineBatchPlan() {
  std::lock_guard lock(planner_mutex());
  if (plan_) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void LineBatchPlan::forward() { fftw_execute(static_cast<fftw_plan>(plan_)); }

}  // namespace effdyn
