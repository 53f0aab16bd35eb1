#pragma once

// Data-parallel complex kernels used in the inner loops of the tracker, the
// coil operators, the samplers and the shrinkage baseline.
//
// Every kernel has a scalar reference implementation. When the library is
// built with TSL_ENABLE_AVX2 and the CPU reports AVX2+FMA, an intrinsics
// variant is selected at runtime. Variants agree with the reference to a few
// ulps (summation order differs in reductions), see tests/unit/test_kernels.cpp.

#include <complex>
#include <span>
#include <string_view>

namespace tsl::kernels {

using cd = std::complex<double>;

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;
  // y <- a*y + b*x
  void (*axpby)(cd a, std::span<cd> y, cd b, std::span<cd const> x);
  // sum_i |x_i|^2
  double (*norm2)(std::span<cd const> x);
  // sum_i x_i y_i (no conjugation)
  cd (*dotu)(std::span<cd const> x, std::span<cd const> y);
  // out_i = a_i * b_i
  void (*mul)(std::span<cd const> a, std::span<cd const> b, std::span<cd> out);
  // out_i += conj(a_i) * b_i
  void (*conj_mul_acc)(std::span<cd const> a, std::span<cd const> b, std::span<cd> out);
  // out_i += |x_i|^2
  void (*accumulate_abs2)(std::span<cd const> x, std::span<double> out);
  // out_i = z_i * max(|z_i| - tau, 0) / |z_i|
  void (*soft_threshold)(std::span<cd const> z, double tau, std::span<cd> out);
};

KernelTable const &scalar_table();

// nullptr when the AVX2 variants were not compiled in or the CPU lacks them.
KernelTable const *avx2_table();

// The table used by the free functions below. Chosen once on first use;
// TSL_KERNELS=scalar in the environment pins the reference path.
KernelTable const &active();

// Overrides the runtime choice (tests and benchmarks). Not thread-safe.
void select(Isa isa);

inline void axpby(cd a, std::span<cd> y, cd b, std::span<cd const> x) { active().axpby(a, y, b, x); }
inline double norm2(std::span<cd const> x) { return active().norm2(x); }
inline cd dotu(std::span<cd const> x, std::span<cd const> y) { return active().dotu(x, y); }
inline void mul(std::span<cd const> a, std::span<cd const> b, std::span<cd> out) { active().mul(a, b, out); }
inline void conj_mul_acc(std::span<cd const> a, std::span<cd const> b, std::span<cd> out)
{
  active().conj_mul_acc(a, b, out);
}
inline void accumulate_abs2(std::span<cd const> x, std::span<double> out) { active().accumulate_abs2(x, out); }
inline void soft_threshold(std::span<cd const> z, double tau, std::span<cd> out)
{
  active().soft_threshold(z, tau, out);
}

namespace detail {
// Scalar loops shared by the reference table and the vector tails.
void axpby(cd a, cd *y, cd b, cd const *x, std::size_t n);
double norm2(cd const *x, std::size_t n);
cd dotu(cd const *x, cd const *y, std::size_t n);
void mul(cd const *a, cd const *b, cd *out, std::size_t n);
void conj_mul_acc(cd const *a, cd const *b, cd *out, std::size_t n);
void accumulate_abs2(cd const *x, double *out, std::size_t n);
void soft_threshold(cd const *z, double tau, cd *out, std::size_t n);
} // namespace detail

} // namespace tsl::kernels
