#include "tsl/fourier.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "tsl/error.hpp"

namespace tsl {

namespace {

Eigen::FFT<double> &engine()
{
  // Plans cache twiddles internally, so one engine per thread.
  thread_local Eigen::FFT<double> fft = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::Unscaled);
    return f;
  }();
  return fft;
}

void transform(std::vector<cd> &buf, std::vector<cd> &out, bool inverse)
{
  if (buf.size() == 1) {
    // Length one is the identity.
    out = buf;
    return;
  }
  auto &fft = engine();
  if (inverse) {
    fft.inv(out, buf);
  } else {
    fft.fwd(out, buf);
  }
}

} // namespace

CVec unitary_dft(CVec const &x, bool inverse)
{
  if (x.size() == 0) {
    throw ShapeError("DFT of an empty vector");
  }
  std::vector<cd> buf(x.data(), x.data() + x.size()), out;
  transform(buf, out, inverse);
  double const s = 1.0 / std::sqrt(static_cast<double>(x.size()));
  CVec y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    y(i) = out[static_cast<std::size_t>(i)] * s;
  }
  return y;
}

CMat unitary_dft_cols(CMat const &m, bool inverse)
{
  if (m.size() == 0) {
    throw ShapeError("DFT of an empty matrix");
  }
  CMat y(m.rows(), m.cols());
  std::vector<cd> buf(static_cast<std::size_t>(m.rows())), out;
  double const s = 1.0 / std::sqrt(static_cast<double>(m.rows()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      buf[static_cast<std::size_t>(r)] = m(r, c);
    }
    transform(buf, out, inverse);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      y(r, c) = out[static_cast<std::size_t>(r)] * s;
    }
  }
  return y;
}

CMat unitary_dft2(CMat const &image, bool inverse)
{
  CMat const cols = unitary_dft_cols(image, inverse);
  return unitary_dft_cols(cols.transpose(), inverse).transpose();
}

CMat dft_matrix(std::size_t n)
{
  CMat f(n, n);
  double const s = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      // Reduce k*j mod n first so the phase stays accurate for large n.
      double const ph = -2.0 * std::numbers::pi * static_cast<double>((k * j) % n) / static_cast<double>(n);
      f(k, j) = std::polar(s, ph);
    }
  }
  return f;
}

long signed_frequency(std::size_t k, std::size_t n)
{
  auto const kk = static_cast<long>(k);
  auto const nn = static_cast<long>(n);
  return kk <= nn / 2 ? kk : kk - nn;
}

} // namespace tsl
