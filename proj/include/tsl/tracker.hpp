#pragma once

#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "tsl/observation.hpp"
#include "tsl/tensor.hpp"

namespace tsl {

struct FixedStep {
  double mu = 0.01;
};

// mu_t = 1 / sum_tau alpha_tau with each alpha_tau clamped to [c_floor, c_cap].
struct HessianBoundStep {
  double c_floor = 1e-3;
  double c_cap = 1e6;
};

using StepMode = std::variant<FixedStep, HessianBoundStep>;

struct StepConfig {
  double lambda = 2.0;
  StepMode step = FixedStep{};
  std::size_t rank = 100;
  std::optional<TensorSubspace> warm_start;
  double init_scale = 1.0;
  // Diagnostic only: flags column norms above this value, nothing is projected.
  double norm_cap = std::numeric_limits<double>::infinity();
  // Krylov controls for hessian_bound (operator applications, Ritz residual).
  std::size_t power_iterations = 200;
  double power_tolerance = 1e-10;

  void validate() const;
};

struct TrackerState {
  TensorSubspace subspace;
  std::size_t t = 1;       // index of the next frame; grows across epochs
  double alpha_bar = 0.0;  // running sum of alpha_t (HessianBound mode)
  bool norm_cap_exceeded = false;

  // Warm start when configured, otherwise i.i.d. complex Gaussian factors.
  static TrackerState initial(StepConfig const &config, std::vector<std::size_t> const &extents, Rng &rng);
};

struct StepReport {
  std::size_t t = 0;
  CoefficientVector gamma;
  CVec residual;
  double instantaneous_cost = 0.0;
  double step_size = 0.0;
  double alpha = 0.0;
};

// argmin 1/2 ||y - phi g||^2 + lambda/2 ||g||^2 via thin SVD phi = U S V^H:
// g = V diag(s / (s^2 + lambda)) U^H y. lambda = 0 gives the minimum-norm least-squares solution.
CoefficientVector solve_gamma(CMat const &phi, CVec const &y, double lambda);

// One matrix per mode; column r holds sum_l e_l conj(W_l x_{i != m} a_r^(i)).
using FactorSet = std::vector<CMat>;

// Data part of the gradient, dispatching on the descriptor kind: scatter for
// entry masks, the conj(H) .* F^{-1}(Xi) image for Fourier kinds, dense
// mode products for generic sketches.
FactorSet residual_backprojection(TensorSubspace const &subspace, ProjectionDescriptor const &descriptor,
                                  CVec const &residual);

// Same quantity evaluated literally through dense sketches and mode products.
FactorSet residual_backprojection_dense(TensorSubspace const &subspace, ProjectionDescriptor const &descriptor,
                                        CVec const &residual);

// grad_{a_r^(m)} f_t = (lambda/t) a_r^(m) - conj(gamma_r) * backprojection(:, r).
// This is the conjugate (Wirtinger) gradient: d/dRe + i d/dIm of the real cost.
FactorSet factor_gradient(TensorSubspace const &subspace, CoefficientVector const &gamma,
                          ProjectionDescriptor const &descriptor, CVec const &residual, double lambda, std::size_t t);

// f_t = 1/2 ||y - phi gamma||^2 + lambda/2 ||gamma||^2 + lambda/(2t) sum_m ||A_m||_F^2.
double instantaneous_cost(TensorSubspace const &subspace, CoefficientVector const &gamma,
                          ProjectionDescriptor const &descriptor, CVec const &y, double lambda, std::size_t t);

// lambda/t + max_m sigma_max(J_m^H J_m), J_m the linear map A_m -> Phi(A_m) gamma.
// This bounds the mode-m Hessian of f_t over all columns jointly. Unclamped.
double hessian_bound(TensorSubspace const &subspace, CoefficientVector const &gamma,
                     ProjectionDescriptor const &descriptor, double lambda, std::size_t t,
                     std::size_t max_iterations = 200, double tolerance = 1e-10);

// One tracking step: ridge projection, then all (m, r) columns move along
// -grad computed from the frozen previous subspace.
std::pair<TrackerState, StepReport> track_step(TrackerState state, MeasurementBatch const &batch,
                                               StepConfig const &config);

// (1/T) sum_tau [1/2 ||y_tau - Phi_tau g_tau||^2 + lambda/2 ||g_tau||^2] + lambda/(2T) sum_m ||A_m||^2
// with g_tau re-solved at the given subspace and T = batches.size().
double empirical_cost(TensorSubspace const &subspace, std::span<MeasurementBatch const> batches, double lambda);

// Gradient of empirical_cost with respect to the factors.
FactorSet empirical_cost_gradient(TensorSubspace const &subspace, std::span<MeasurementBatch const> batches,
                                  double lambda);

double frobenius_norm(FactorSet const &set);

struct RunTraceRow {
  std::size_t t = 0;
  std::size_t epoch = 0;
  std::size_t frame = 0;  // position of the batch in the input stream
  double cost = 0.0;
  double step_size = 0.0;
  double gamma_norm = 0.0;
  double residual_norm = 0.0;
};

struct RunResult {
  TrackerState state;
  std::vector<RunTraceRow> trace;
  // gamma of the last visit to each input frame, indexed like the input.
  std::vector<CoefficientVector> last_gamma;
};

// Multi-epoch pass: every epoch starts from the previous epoch's subspace, t keeps counting.
RunResult run(std::span<MeasurementBatch const> stream, StepConfig const &config, std::size_t epochs,
              bool reshuffle, Rng &rng, std::optional<TrackerState> initial = std::nullopt);

} // namespace tsl
