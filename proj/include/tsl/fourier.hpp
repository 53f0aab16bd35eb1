#pragma once

#include "tsl/tensor.hpp"

namespace tsl {

// Orthonormal DFTs: 1/sqrt(N) per transformed dimension, index 0 is DC.
// The DFT matrix F is symmetric and unitary, so F^{-1} = conj(F).

CVec unitary_dft(CVec const &x, bool inverse = false);

// Transforms every column of m.
CMat unitary_dft_cols(CMat const &m, bool inverse = false);

CMat unitary_dft2(CMat const &image, bool inverse = false);

// Dense N x N unitary DFT matrix; used by oracles and small dense operators.
CMat dft_matrix(std::size_t n);

// Signed frequency of DFT index k: k for k <= N/2, k - N otherwise.
long signed_frequency(std::size_t k, std::size_t n);

} // namespace tsl
