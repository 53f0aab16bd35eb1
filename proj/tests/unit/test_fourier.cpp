#include <doctest.h>

#include "oracles.hpp"
#include "tsl/fourier.hpp"

using namespace tsl;

TEST_CASE("unitary DFT round trip and Parseval")
{
  Rng rng(7);
  for (Eigen::Index n : {1, 2, 5, 16, 30}) {
    CVec const x = oracle::random_vector(n, rng);
    CVec const y = unitary_dft(x);
    CHECK(std::abs(y.squaredNorm() - x.squaredNorm()) <= 1e-12 * x.squaredNorm());
    CHECK(oracle::rel_err(unitary_dft(y, true), x) < 1e-12);
    CHECK(oracle::rel_err(dft_matrix(static_cast<std::size_t>(n)) * x, y) < 1e-12);
  }
  CMat const img = oracle::random_matrix(12, 10, rng);
  CMat const k = unitary_dft2(img);
  CHECK(std::abs(k.squaredNorm() - img.squaredNorm()) <= 1e-12 * img.squaredNorm());
  CHECK(oracle::rel_err(unitary_dft2(k, true), img) < 1e-12);
  CHECK(oracle::rel_err(dft_matrix(12) * img * dft_matrix(10), k) < 1e-12);
}

TEST_CASE("DFT matrix is symmetric and unitary with conjugate inverse")
{
  CMat const f = dft_matrix(9);
  CHECK((f - f.transpose()).norm() < 1e-13);
  CHECK((f * f.adjoint() - CMat::Identity(9, 9)).norm() < 1e-12);
  CVec e = CVec::Zero(9);
  e(0) = 1.0;
  CHECK(oracle::rel_err(unitary_dft(e), CVec::Constant(9, 1.0 / 3.0)) < 1e-14);
}

TEST_CASE("signed frequencies")
{
  CHECK(signed_frequency(0, 8) == 0);
  CHECK(signed_frequency(4, 8) == 4);
  CHECK(signed_frequency(5, 8) == -3);
  CHECK(signed_frequency(4, 9) == 4);
  CHECK(signed_frequency(5, 9) == -4);
}
