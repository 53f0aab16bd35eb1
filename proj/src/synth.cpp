#include "tsl/synth.hpp"

#include <cmath>
#include <numbers>

#include "tsl/error.hpp"
#include "tsl/fourier.hpp"

namespace tsl {

void PhantomSpec::validate() const
{
  if (n1 < 4 || n2 < 4 || frames < 1) {
    throw ConfigError("phantom needs at least 4 x 4 pixels and one frame");
  }
  if (!(outer_a > 0.0 && outer_a <= 1.0 && outer_b > 0.0 && outer_b <= 1.0)) {
    throw DomainError("outer ellipse must lie within the frame");
  }
  if (!(amplitude >= 0.0 && inner_r0 > 0.0 && inner_r0 * (1.0 + amplitude) <= std::min(outer_a, outer_b))) {
    throw DomainError("pulsating ellipse must stay inside the outer ellipse");
  }
  if (!(period > 0.0)) {
    throw DomainError("period must be positive");
  }
}

DenseTensor gen_phantom(PhantomSpec const &spec)
{
  spec.validate();
  DenseTensor out({spec.n1, spec.n2, spec.frames});
  double const cy = 0.5 * static_cast<double>(spec.n1), cx = 0.5 * static_cast<double>(spec.n2);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    double const r = spec.inner_r0 *
                     (1.0 + spec.amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / spec.period));
    for (std::size_t i = 0; i < spec.n1; ++i) {
      double const y = (static_cast<double>(i) - cy) / cy;
      for (std::size_t j = 0; j < spec.n2; ++j) {
        double const x = (static_cast<double>(j) - cx) / cx;
        double v = 0.0;
        if ((y / spec.outer_a) * (y / spec.outer_a) + (x / spec.outer_b) * (x / spec.outer_b) <= 1.0) {
          v += 1.0;
        }
        if (y * y + x * x <= r * r) {
          v += spec.inner_gain;
        }
        double const ph = 2.0 * std::numbers::pi *
                          (spec.phase_rows * static_cast<double>(i) / static_cast<double>(spec.n1) +
                           spec.phase_cols * static_cast<double>(j) / static_cast<double>(spec.n2));
        out[(i * spec.n2 + j) * spec.frames + t] = std::polar(v, ph);
      }
    }
  }
  return out;
}

LowRankStream gen_lowrank_stream(std::vector<std::size_t> const &dims, std::size_t rank, std::size_t frames,
                                 double noise_sigma, Rng &rng, double coherence)
{
  if (dims.size() < 2 || rank < 1 || frames < 1) {
    throw ConfigError("low-rank stream needs two frame modes, rank and frames >= 1");
  }
  if (noise_sigma < 0.0) {
    throw DomainError("noise sigma must be nonnegative");
  }
  std::vector<FactorMatrix> factors;
  for (auto n : dims) {
    CMat a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rank));
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        a(i, j) = complex_normal(rng, 1.0);
      }
    }
    if (coherence > 0.0) {
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        a.row(i) *= std::pow(1.0 + static_cast<double>(i), -coherence);
      }
    }
    factors.push_back(std::move(a));
  }
  LowRankStream s;
  s.truth = TensorSubspace(std::move(factors));
  s.temporal.resize(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(rank));
  for (Eigen::Index j = 0; j < s.temporal.cols(); ++j) {
    for (Eigen::Index t = 0; t < s.temporal.rows(); ++t) {
      s.temporal(t, j) = complex_normal(rng, 1.0);
    }
  }
  std::vector<std::size_t> full = dims;
  full.push_back(frames);
  s.data = DenseTensor(full);
  for (std::size_t t = 0; t < frames; ++t) {
    DenseTensor slice = synthesize_slice(s.truth, s.temporal.row(static_cast<Eigen::Index>(t)).transpose());
    if (noise_sigma > 0.0) {
      for (auto &v : slice.data()) {
        v += complex_normal(rng, noise_sigma);
      }
    }
    s.data.set_last_mode_slice(t, slice);
  }
  return s;
}

DenseTensor kspace_stream(DenseTensor const &frames, bool inverse)
{
  if (frames.order() != 3) {
    throw ShapeError("k-space stream needs an N1 x N2 x T tensor");
  }
  DenseTensor out(frames.dims());
  for (std::size_t t = 0; t < frames.extent(2); ++t) {
    CMat const k = unitary_dft2(frames.last_mode_slice(t).to_matrix(), inverse);
    out.set_last_mode_slice(t, DenseTensor::from_matrix(k));
  }
  return out;
}

} // namespace tsl
