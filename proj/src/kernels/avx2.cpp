#include "effdyn/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace effdyn::kernels {
namespace {

// Two complex numbers per register: [re0, im0, re1, im1].
inline __m256d load(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

inline __m256d cmul(__m256d a, __m256d b) {
  const __m256d br = _mm256_movedup_pd(b);
  const __m256d bi = _mm256_permute_pd(b, 0xF);
  const __m256d as = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, br, _mm256_mul_pd(as, bi));
}

// [w0, w0, w1, w1] from two consecutive doubles.
inline __m256d load_pair_dup(const double* w) {
  const __m256d x = _mm256_castpd128_pd256(_mm_loadu_pd(w));
  return _mm256_permute4x64_pd(x, 0x50);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline cplx scalar_mul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(),
          a.real() * b.imag() + a.imag() * b.real()};
}

void mul_inplace(cplx* a, const cplx* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store(a + i, cmul(load(a + i), load(b + i)));
  for (; i < n; ++i) a[i] = scalar_mul(a[i], b[i]);
}

void mul_scaled_inplace(cplx* a, const cplx* b, cplx s, std::size_t n) {
  const __m256d sv = _mm256_setr_pd(s.real(), s.imag(), s.real(), s.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store(a + i, cmul(load(a + i), cmul(sv, load(b + i))));
  for (; i < n; ++i) a[i] = scalar_mul(a[i], scalar_mul(s, b[i]));
}

void mul(cplx* out, const cplx* a, const cplx* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store(out + i, cmul(load(a + i), load(b + i)));
  for (; i < n; ++i) out[i] = scalar_mul(a[i], b[i]);
}

void real_diag_apply(cplx* out, const cplx* in, const double* d, double shift,
                     std::size_t n) {
  const __m256d sh = _mm256_set1_pd(shift);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    store(out + i, _mm256_mul_pd(_mm256_add_pd(load_pair_dup(d + i), sh), load(in + i)));
  for (; i < n; ++i) {
    const double w = d[i] + shift;
    out[i] = {w * in[i].real(), w * in[i].imag()};
  }
}

void scale(cplx* a, double s, std::size_t n) {
  const __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store(a + i, _mm256_mul_pd(load(a + i), sv));
  for (; i < n; ++i) a[i] = {s * a[i].real(), s * a[i].imag()};
}

double sum_abs2(const cplx* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x0 = load(a + i), x1 = load(a + i + 2);
    acc0 = _mm256_fmadd_pd(x0, x0, acc0);
    acc1 = _mm256_fmadd_pd(x1, x1, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  return acc;
}

double weighted_abs2(const cplx* a, const double* w, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d x = load(a + i);
    acc = _mm256_fmadd_pd(load_pair_dup(w + i), _mm256_mul_pd(x, x), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * (a[i].real() * a[i].real() + a[i].imag() * a[i].imag());
  return s;
}

cplx dot(const cplx* a, const cplx* b, std::size_t n) {
  __m256d re = _mm256_setzero_pd(), cross = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d x = load(a + i), y = load(b + i);
    re = _mm256_fmadd_pd(x, y, re);
    cross = _mm256_fmadd_pd(x, _mm256_permute_pd(y, 0x5), cross);
  }
  // cross lanes hold [ar*bi, ai*br, ...]; imaginary part is even minus odd.
  alignas(32) double c[4];
  _mm256_store_pd(c, cross);
  double sr = hsum(re);
  double si = (c[0] - c[1]) + (c[2] - c[3]);
  for (; i < n; ++i) {
    sr += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    si += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {sr, si};
}

}  // namespace

const KernelTable* avx2_table_impl() noexcept {
  static const KernelTable table{"avx2",          mul_inplace, mul_scaled_inplace, mul,
                                 real_diag_apply, scale,       sum_abs2,
                                 weighted_abs2,   dot};
  return &table;
}

}  // namespace effdyn::kernels

#else

namespace effdyn::kernels {
const KernelTable* avx2_table_impl() noexcept { return nullptr; }
}  // namespace effdyn::kernels

#endif
