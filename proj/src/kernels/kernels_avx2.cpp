// AVX2/FMA variants. Compiled with -mavx2 -mfma; only reached after the
// runtime CPU check in dispatch.cpp. One __m256d holds two complex doubles
// laid out as (re0, im0, re1, im1).

#include "tsl/kernels.hpp"

#include <immintrin.h>

namespace tsl::kernels {

namespace {

inline double *dp(cd *p) { return reinterpret_cast<double *>(p); }
inline double const *dp(cd const *p) { return reinterpret_cast<double const *>(p); }

// (ar + i ai) * x for a broadcast scalar.
inline __m256d scale(__m256d x, __m256d ar, __m256d ai)
{
  __m256d const xs = _mm256_permute_pd(x, 0x5);
  return _mm256_addsub_pd(_mm256_mul_pd(x, ar), _mm256_mul_pd(xs, ai));
}

// Elementwise a * b.
inline __m256d cmul(__m256d a, __m256d b)
{
  __m256d const are = _mm256_movedup_pd(a);
  __m256d const aim = _mm256_permute_pd(a, 0xF);
  __m256d const bs = _mm256_permute_pd(b, 0x5);
  return _mm256_addsub_pd(_mm256_mul_pd(are, b), _mm256_mul_pd(aim, bs));
}

// Elementwise conj(a) * b.
inline __m256d cmulc(__m256d a, __m256d b)
{
  __m256d const are = _mm256_movedup_pd(a);
  __m256d const aim = _mm256_permute_pd(a, 0xF);
  __m256d const bs = _mm256_permute_pd(b, 0x5);
  __m256d const neg = _mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(aim, bs));
  return _mm256_addsub_pd(_mm256_mul_pd(are, b), neg);
}

void axpby_v(cd a, std::span<cd> y, cd b, std::span<cd const> x)
{
  std::size_t const n = y.size();
  __m256d const ar = _mm256_set1_pd(a.real()), ai = _mm256_set1_pd(a.imag());
  __m256d const br = _mm256_set1_pd(b.real()), bi = _mm256_set1_pd(b.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d const yv = _mm256_loadu_pd(dp(y.data() + i));
    __m256d const xv = _mm256_loadu_pd(dp(x.data() + i));
    _mm256_storeu_pd(dp(y.data() + i), _mm256_add_pd(scale(yv, ar, ai), scale(xv, br, bi)));
  }
  detail::axpby(a, y.data() + i, b, x.data() + i, n - i);
}

double norm2_v(std::span<cd const> x)
{
  std::size_t const n = x.size();
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d const v0 = _mm256_loadu_pd(dp(x.data() + i));
    __m256d const v1 = _mm256_loadu_pd(dp(x.data() + i + 2));
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    acc1 = _mm256_fmadd_pd(v1, v1, acc1);
  }
  for (; i + 2 <= n; i += 2) {
    __m256d const v0 = _mm256_loadu_pd(dp(x.data() + i));
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]) + detail::norm2(x.data() + i, n - i);
}

cd dotu_v(std::span<cd const> x, std::span<cd const> y)
{
  std::size_t const n = x.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = _mm256_add_pd(acc, cmul(_mm256_loadu_pd(dp(x.data() + i)), _mm256_loadu_pd(dp(y.data() + i))));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  return cd(lanes[0] + lanes[2], lanes[1] + lanes[3]) + detail::dotu(x.data() + i, y.data() + i, n - i);
}

void mul_v(std::span<cd const> a, std::span<cd const> b, std::span<cd> out)
{
  std::size_t const n = out.size();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    _mm256_storeu_pd(dp(out.data() + i), cmul(_mm256_loadu_pd(dp(a.data() + i)), _mm256_loadu_pd(dp(b.data() + i))));
  }
  detail::mul(a.data() + i, b.data() + i, out.data() + i, n - i);
}

void conj_mul_acc_v(std::span<cd const> a, std::span<cd const> b, std::span<cd> out)
{
  std::size_t const n = out.size();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d const o = _mm256_loadu_pd(dp(out.data() + i));
    __m256d const p = cmulc(_mm256_loadu_pd(dp(a.data() + i)), _mm256_loadu_pd(dp(b.data() + i)));
    _mm256_storeu_pd(dp(out.data() + i), _mm256_add_pd(o, p));
  }
  detail::conj_mul_acc(a.data() + i, b.data() + i, out.data() + i, n - i);
}

void accumulate_abs2_v(std::span<cd const> x, std::span<double> out)
{
  std::size_t const n = out.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d const v0 = _mm256_loadu_pd(dp(x.data() + i));
    __m256d const v1 = _mm256_loadu_pd(dp(x.data() + i + 2));
    // hadd gives (|x0|^2, |x2|^2, |x1|^2, |x3|^2)
    __m256d const h = _mm256_hadd_pd(_mm256_mul_pd(v0, v0), _mm256_mul_pd(v1, v1));
    __m256d const ordered = _mm256_permute4x64_pd(h, 0xD8);
    _mm256_storeu_pd(out.data() + i, _mm256_add_pd(_mm256_loadu_pd(out.data() + i), ordered));
  }
  detail::accumulate_abs2(x.data() + i, out.data() + i, n - i);
}

void soft_threshold_v(std::span<cd const> z, double tau, std::span<cd> out)
{
  std::size_t const n = out.size();
  __m256d const t = _mm256_set1_pd(tau);
  __m256d const zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d const v = _mm256_loadu_pd(dp(z.data() + i));
    __m256d const sq = _mm256_mul_pd(v, v);
    __m256d const mag = _mm256_sqrt_pd(_mm256_hadd_pd(sq, sq));
    __m256d const shrink = _mm256_sub_pd(mag, t);
    __m256d const keep = _mm256_and_pd(_mm256_cmp_pd(shrink, zero, _CMP_GT_OQ), _mm256_cmp_pd(mag, zero, _CMP_GT_OQ));
    __m256d const factor = _mm256_and_pd(keep, _mm256_div_pd(shrink, mag));
    _mm256_storeu_pd(dp(out.data() + i), _mm256_mul_pd(v, factor));
  }
  detail::soft_threshold(z.data() + i, tau, out.data() + i, n - i);
}

} // namespace

KernelTable const &avx2_table_impl()
{
  static KernelTable const table{Isa::Avx2,  "avx2",         axpby_v,           norm2_v,         dotu_v,
                                 mul_v,      conj_mul_acc_v, accumulate_abs2_v, soft_threshold_v};
  return table;
}

} // namespace tsl::kernels
