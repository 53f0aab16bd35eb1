#pragma once

#include <memory>
#include <vector>

#include "tsl/tensor.hpp"

namespace tsl {

using MultiIndex = std::vector<std::size_t>;

/// Per-pixel complex coil gain, same shape as the frame.
struct SensitivityMap {
  CMat gain;
};

using CoilMaps = std::shared_ptr<std::vector<SensitivityMap> const>;

enum class ProjectionKind { EntryMask, FourierMask, CoilFourierMask, GenericDense };

/// Which linear functionals of a frame one measurement batch records.
///
/// Inner products are bilinear, <L, W> = sum L .* W with no conjugation, so a
/// Fourier sample [F(L)]_{ij} is <L, f_i f_j^T> with f_k the k-th column of
/// the symmetric unitary DFT matrix. Coil measurements are stacked coil by
/// coil, coil 0 first, each block following the order of `indices()`.
class ProjectionDescriptor {
public:
  ProjectionDescriptor() = default;

  static ProjectionDescriptor entry_mask(std::vector<std::size_t> extents, std::vector<MultiIndex> omega);
  static ProjectionDescriptor fourier_mask(std::size_t n1, std::size_t n2, std::vector<MultiIndex> omega);
  static ProjectionDescriptor coil_fourier_mask(CoilMaps coils, std::vector<MultiIndex> omega);
  static ProjectionDescriptor generic_dense(std::vector<DenseTensor> sketches);

  ProjectionKind kind() const { return kind_; }
  std::vector<std::size_t> const &extents() const { return extents_; }
  std::vector<MultiIndex> const &indices() const { return indices_; }
  std::vector<SensitivityMap> const &coils() const;
  CoilMaps const &coil_maps() const { return coils_; }
  std::vector<DenseTensor> const &sketches() const { return sketches_; }

  std::size_t coil_count() const { return coils_ ? coils_->size() : 0; }
  std::size_t measurement_count() const;
  bool empty() const { return measurement_count() == 0; }

  // Dense sketch tensor of measurement l, for oracles and the generic path.
  DenseTensor sketch(std::size_t l) const;

private:
  ProjectionKind kind_ = ProjectionKind::EntryMask;
  std::vector<std::size_t> extents_;
  std::vector<MultiIndex> indices_;
  CoilMaps coils_;
  std::vector<DenseTensor> sketches_;
};

struct MeasurementBatch {
  CVec y;
  ProjectionDescriptor descriptor;
  std::size_t t = 0;
  double noise_sigma = 0.0;
};

// Every entry of a frame with the given extents, in row-major order.
std::vector<MultiIndex> all_indices(std::vector<std::size_t> const &extents);

// Full phase-encode rows expanded to (i, j) pairs for j in [0, n2).
std::vector<MultiIndex> rows_to_indices(std::vector<std::size_t> const &rows, std::size_t n2);

CVec project(DenseTensor const &slice, ProjectionDescriptor const &descriptor);

// L x R matrix of projections of the rank-one bases, without synthesizing dense tensors
// for the mask kinds.
CMat build_phi(TensorSubspace const &subspace, ProjectionDescriptor const &descriptor);

// sum_l e_l conj(W_l) as a dense frame. For the Fourier kinds this is
// sum_c conj(H_c) .* F^{-1}(Xi_c) with Xi_c the residuals scattered onto the mask.
DenseTensor adjoint_image(ProjectionDescriptor const &descriptor, CVec const &residual);

// sum_c conj(H_c) .* F^{-1}(Xi_c); one residual image per coil.
CMat coil_adjoint(std::vector<CMat> const &residual_images, std::vector<SensitivityMap> const &coils);

// Uniform double in [0, 1) from the top 53 bits; portable across standard libraries.
double uniform01(Rng &rng);

// Index drawn with probability proportional to weights (which need not sum to one).
std::size_t draw_weighted(std::span<double const> weights, Rng &rng);

// Rows in the order they were drawn: DC row first, then sequential draws without
// replacement with distance law d^alpha split evenly over rows sharing a distance.
std::vector<std::size_t> variable_density_draw_order(std::size_t n1, double alpha, double fraction, Rng &rng);

// Sorted row set, ceil(fraction * n1) rows, DC row always included.
std::vector<std::size_t> variable_density_rows(std::size_t n1, double alpha, double fraction, Rng &rng);

// Probability that the first non-DC draw lands at each distance 0..n1/2 (entry 0 is zero).
std::vector<double> variable_density_distance_law(std::size_t n1, double alpha);

std::size_t budget_count(double fraction, std::size_t n);

MeasurementBatch measure(DenseTensor const &truth_slice, ProjectionDescriptor descriptor, double noise_sigma,
                         Rng &rng, std::size_t t = 0);

} // namespace tsl
