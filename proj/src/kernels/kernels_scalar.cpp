#include "tsl/kernels.hpp"

#include <cassert>
#include <cmath>

namespace tsl::kernels {

namespace detail {

void axpby(cd a, cd *y, cd b, cd const *x, std::size_t n)
{
  for (std::size_t i = 0; i < n; ++i) {
    double const yr = y[i].real(), yi = y[i].imag();
    double const xr = x[i].real(), xi = x[i].imag();
    y[i] = cd(a.real() * yr - a.imag() * yi + b.real() * xr - b.imag() * xi,
              a.real() * yi + a.imag() * yr + b.real() * xi + b.imag() * xr);
  }
}

double norm2(cd const *x, std::size_t n)
{
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  }
  return s;
}

cd dotu(cd const *x, cd const *y, std::size_t n)
{
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += x[i].real() * y[i].real() - x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() + x[i].imag() * y[i].real();
  }
  return {re, im};
}

void mul(cd const *a, cd const *b, cd *out, std::size_t n)
{
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = cd(a[i].real() * b[i].real() - a[i].imag() * b[i].imag(),
                a[i].real() * b[i].imag() + a[i].imag() * b[i].real());
  }
}

void conj_mul_acc(cd const *a, cd const *b, cd *out, std::size_t n)
{
  for (std::size_t i = 0; i < n; ++i) {
    out[i] += cd(a[i].real() * b[i].real() + a[i].imag() * b[i].imag(),
                 a[i].real() * b[i].imag() - a[i].imag() * b[i].real());
  }
}

void accumulate_abs2(cd const *x, double *out, std::size_t n)
{
  for (std::size_t i = 0; i < n; ++i) {
    out[i] += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  }
}

void soft_threshold(cd const *z, double tau, cd *out, std::size_t n)
{
  for (std::size_t i = 0; i < n; ++i) {
    double const mag = std::sqrt(z[i].real() * z[i].real() + z[i].imag() * z[i].imag());
    double const shrink = mag - tau;
    out[i] = (shrink > 0.0 && mag > 0.0) ? z[i] * (shrink / mag) : cd(0.0, 0.0);
  }
}

} // namespace detail

namespace {

void axpby_s(cd a, std::span<cd> y, cd b, std::span<cd const> x)
{
  assert(x.size() == y.size());
  detail::axpby(a, y.data(), b, x.data(), y.size());
}
double norm2_s(std::span<cd const> x) { return detail::norm2(x.data(), x.size()); }
cd dotu_s(std::span<cd const> x, std::span<cd const> y)
{
  assert(x.size() == y.size());
  return detail::dotu(x.data(), y.data(), x.size());
}
void mul_s(std::span<cd const> a, std::span<cd const> b, std::span<cd> out)
{
  detail::mul(a.data(), b.data(), out.data(), out.size());
}
void conj_mul_acc_s(std::span<cd const> a, std::span<cd const> b, std::span<cd> out)
{
  detail::conj_mul_acc(a.data(), b.data(), out.data(), out.size());
}
void accumulate_abs2_s(std::span<cd const> x, std::span<double> out)
{
  detail::accumulate_abs2(x.data(), out.data(), out.size());
}
void soft_threshold_s(std::span<cd const> z, double tau, std::span<cd> out)
{
  detail::soft_threshold(z.data(), tau, out.data(), out.size());
}

} // namespace

KernelTable const &scalar_table()
{
  static KernelTable const table{Isa::Scalar, "scalar", axpby_s,        norm2_s, dotu_s, mul_s, conj_mul_acc_s,
                                 accumulate_abs2_s, soft_threshold_s};
  return table;
}

} // namespace tsl::kernels
