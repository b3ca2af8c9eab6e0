#include "effdyn/kernels.hpp"

namespace effdyn::kernels {
namespace {

// Complex products are spelled out so the compiler does not route them
// through the Annex G NaN-recovery helper.
inline cplx cmul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(),
          a.real() * b.imag() + a.imag() * b.real()};
}

void mul_inplace(cplx* a, const cplx* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) a[i] = cmul(a[i], b[i]);
}

void mul_scaled_inplace(cplx* a, const cplx* b, cplx s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) a[i] = cmul(a[i], cmul(s, b[i]));
}

void mul(cplx* out, const cplx* a, const cplx* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = cmul(a[i], b[i]);
}

void real_diag_apply(cplx* out, const cplx* in, const double* d, double shift,
                     std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double w = d[i] + shift;
    out[i] = {w * in[i].real(), w * in[i].imag()};
  }
}

void scale(cplx* a, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) a[i] = {s * a[i].real(), s * a[i].imag()};
}

double sum_abs2(const cplx* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  return acc;
}

double weighted_abs2(const cplx* a, const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += w[i] * (a[i].real() * a[i].real() + a[i].imag() * a[i].imag());
  return acc;
}

cplx dot(const cplx* a, const cplx* b, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{"scalar",        mul_inplace, mul_scaled_inplace, mul,
                                 real_diag_apply, scale,       sum_abs2,
                                 weighted_abs2,   dot};
  return table;
}

}  // namespace effdyn::kernels
