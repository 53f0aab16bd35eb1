#pragma once

#include <vector>

#include "tsl/tensor.hpp"

namespace tsl {

/// Two nested ellipses; the inner one pulses periodically. Axes and radii are
/// fractions of the half extents, phase ramps are in cycles across the frame.
struct PhantomSpec {
  std::size_t n1 = 64, n2 = 64, frames = 100;
  double outer_a = 0.8, outer_b = 0.65;
  double inner_r0 = 0.3;
  double amplitude = 0.3;
  double period = 20.0;
  double inner_gain = 1.0;
  double phase_rows = 0.5, phase_cols = 0.25;

  void validate() const;
};

// N1 x N2 x T complex image stream.
DenseTensor gen_phantom(PhantomSpec const &spec);

struct LowRankStream {
  DenseTensor data;       // N_1 x ... x N_{M-1} x T
  TensorSubspace truth;   // generating factors
  CMat temporal;          // T x R, row t is gamma_t
};

// Factor entries CN(0, 1) and gamma_t ~ CN(0, I). A positive coherence scales
// row n of every factor by (1 + n)^(-coherence) so energy concentrates on low rows.
LowRankStream gen_lowrank_stream(std::vector<std::size_t> const &dims, std::size_t rank, std::size_t frames,
                                 double noise_sigma, Rng &rng, double coherence = 0.0);

// Per-frame unitary 2-D DFT of an N1 x N2 x T stream (inverse when requested).
DenseTensor kspace_stream(DenseTensor const &frames, bool inverse = false);

} // namespace tsl
