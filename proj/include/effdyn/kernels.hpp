#pragma once

// Data-parallel inner loops over complex double arrays. Each entry has a
// scalar reference implementation and, where the CPU allows, an AVX2 variant
// picked once at startup. Results of the two agree to rounding; reductions
// may differ in summation order.

#include <complex>
#include <cstddef>
#include <string_view>

namespace effdyn::kernels {

using cplx = std::complex<double>;

struct KernelTable {
  std::string_view isa;
  // a[i] *= b[i]
  void (*mul_inplace)(cplx* a, const cplx* b, std::size_t n);
  // a[i] *= s * b[i]
  void (*mul_scaled_inplace)(cplx* a, const cplx* b, cplx s, std::size_t n);
  // out[i] = a[i] * b[i]; out may alias a
  void (*mul)(cplx* out, const cplx* a, const cplx* b, std::size_t n);
  // out[i] = (d[i] + shift) * in[i]
  void (*real_diag_apply)(cplx* out, const cplx* in, const double* d, double shift,
                          std::size_t n);
  // a[i] *= s
  void (*scale)(cplx* a, double s, std::size_t n);
  // sum |a[i]|^2
  double (*sum_abs2)(const cplx* a, std::size_t n);
  // sum w[i] |a[i]|^2
  double (*weighted_abs2)(const cplx* a, const double* w, std::size_t n);
  // sum conj(a[i]) b[i]
  cplx (*dot)(const cplx* a, const cplx* b, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the build or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table() noexcept;

/// Table used by the solvers.
const KernelTable& active() noexcept;
/// Force the scalar path (true) or restore automatic selection (false).
void force_scalar(bool on) noexcept;

}  // namespace effdyn::kernels
