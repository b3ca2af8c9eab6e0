#include <atomic>

#include "effdyn/kernels.hpp"

namespace effdyn::kernels {

const KernelTable* avx2_table_impl() noexcept;

namespace {
std::atomic<bool> g_force_scalar{false};

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}
}  // namespace

const KernelTable* avx2_table() noexcept {
  static const KernelTable* table = cpu_has_avx2() ? avx2_table_impl() : nullptr;
  return table;
}

const KernelTable& active() noexcept {
  if (g_force_scalar.load(std::memory_order_relaxed)) return scalar_table();
  const KernelTable* t = avx2_table();
  return t ? *t : scalar_table();
}

void force_scalar(bool on) noexcept { g_force_scalar.store(on, std::memory_order_relaxed); }

}  // namespace effdyn::kernels
