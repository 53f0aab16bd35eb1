#pragma once

#include <optional>
#include <vector>

#include "tsl/observation.hpp"

namespace tsl {

struct MetricRow {
  std::size_t t = 0;
  double nmse = 0.0;
  double ssim = 0.0;
  std::size_t samples = 0;
};

// ||truth - estimate||_F^2 / ||truth||_F^2
double nmse(CMat const &truth, CMat const &estimate);
double nmse(RMat const &truth, RMat const &estimate);

// Mean local SSIM over valid 11x11 Gaussian windows (sigma 1.5, K1 0.01,
// K2 0.03), dynamic range taken from the reference. Images smaller than the
// window use one window the size of the image.
double ssim(RMat const &reference, RMat const &estimate);

// z * max(|z| - tau, 0) / |z| entrywise.
CMat soft_threshold(CMat const &z, double tau);

struct LassoConfig {
  double lambda = 0.001;
  std::size_t max_iterations = 100;
  double gap_tolerance = 0.01;
  double relative_tolerance = 1e-6;
  std::optional<CMat> warm_start;  // previous difference image, used when its objective is no worse than zero

  void validate() const;
};

struct LassoResult {
  CMat frame;       // previous frame + difference
  CMat difference;
  std::vector<double> objective;  // initial value, then one entry per iteration
  std::size_t iterations = 0;
  double gap = 0.0;
};

// Differential compressed sensing: ISTA with unit step on
// 1/2 ||y - P F(prev) - P F(d)||^2 + lambda ||d||_1 for the difference image d.
LassoResult differential_cs_step(CMat const &previous, MeasurementBatch const &batch, LassoConfig const &config);

} // namespace tsl
