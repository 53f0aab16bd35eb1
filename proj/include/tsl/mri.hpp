#pragma once

#include <vector>

#include "tsl/observation.hpp"
#include "tsl/tracker.hpp"

namespace tsl {

struct FrameEstimate {
  CMat kspace;
  RMat image;  // |F^{-1}(kspace)|
};

// Non-overlapping tiling of an N1 x N2 frame into K1 x K2 patches of n1 x n2.
struct PatchGrid {
  std::size_t n1 = 0, n2 = 0;
  std::size_t k1 = 0, k2 = 0;
  std::size_t rank = 1;

  static PatchGrid tile(std::size_t rows, std::size_t cols, std::size_t n1, std::size_t n2, std::size_t rank);
  std::size_t count() const { return k1 * k2; }
};

struct CoilSet {
  CoilMaps maps;

  std::size_t size() const { return maps ? maps->size() : 0; }
  std::vector<SensitivityMap> const &list() const;
  // max over pixels of |sum_c |H_c|^2 - 1|
  double normalization_error() const;
};

// kspace = A_1 diag(gamma) A_2^T; image is the magnitude of its inverse DFT.
FrameEstimate reconstruct_frame(TensorSubspace const &subspace, CoefficientVector const &gamma);

// k-space interpolation step: the sampled k-space entries are the data, so the
// Fourier mask is read as an entry mask over the k-space frame.
std::pair<TrackerState, StepReport> interp_track_step(TrackerState state, MeasurementBatch const &batch,
                                                      StepConfig const &config);

// Row-major list of patches; patch (p, q) covers rows [p n1, (p+1) n1) and cols [q n2, (q+1) n2).
std::vector<CMat> patch_partition(CMat const &frame, PatchGrid const &grid);
CMat patch_assemble(std::vector<CMat> const &patches, PatchGrid const &grid);

// Entry mask of one frame split into per-patch batches with local indices.
std::vector<MeasurementBatch> patch_batches(MeasurementBatch const &batch, PatchGrid const &grid);

// One independent tracker per patch, each with the patch rank.
struct PatchTrackers {
  PatchGrid grid;
  StepConfig config;
  std::vector<TrackerState> states;

  static PatchTrackers create(PatchGrid const &grid, StepConfig config, Rng &rng);
  // Advances every patch tracker and returns the assembled k-space estimate.
  CMat step(MeasurementBatch const &batch);
};

// Raised-cosine magnitude bumps around equispaced anchors with random linear
// phase ramps, normalized so that sum_c |H_c|^2 == 1 at every pixel.
// smoothness is the bump radius as a fraction of the frame diagonal.
CoilSet synth_sensitivities(std::size_t n1, std::size_t n2, std::size_t coils, double smoothness, Rng &rng);

// sum_c conj(H_c) .* F^{-1}(Xi_c) with Xi_c the per-coil residual images.
CMat coil_residual_image(std::vector<CMat> const &residuals, CoilSet const &coils);

std::pair<TrackerState, StepReport> parallel_track_step(TrackerState state, MeasurementBatch const &batch,
                                                        CoilSet const &coils, StepConfig const &config);

} // namespace tsl
