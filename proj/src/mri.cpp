#include "tsl/mri.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tsl/error.hpp"
#include "tsl/fourier.hpp"

namespace tsl {

PatchGrid PatchGrid::tile(std::size_t rows, std::size_t cols, std::size_t n1, std::size_t n2, std::size_t rank)
{
  if (n1 == 0 || n2 == 0 || rows % n1 != 0 || cols % n2 != 0) {
    throw ShapeError("patch extents must divide the frame extents");
  }
  if (rank < 1) {
    throw ConfigError("patch rank must be at least 1");
  }
  return {n1, n2, rows / n1, cols / n2, rank};
}

std::vector<SensitivityMap> const &CoilSet::list() const
{
  if (!maps) {
    throw ShapeError("empty coil set");
  }
  return *maps;
}

double CoilSet::normalization_error() const
{
  auto const &l = list();
  RMat sos = RMat::Zero(l.front().gain.rows(), l.front().gain.cols());
  for (auto const &c : l) {
    sos += c.gain.cwiseAbs2();
  }
  return (sos.array() - 1.0).abs().maxCoeff();
}

FrameEstimate reconstruct_frame(TensorSubspace const &subspace, CoefficientVector const &gamma)
{
  if (subspace.modes() != 2) {
    throw ShapeError("frame reconstruction needs a two-mode subspace");
  }
  if (static_cast<std::size_t>(gamma.size()) != subspace.rank()) {
    throw RankMismatch("gamma length does not match subspace rank");
  }
  FrameEstimate f;
  f.kspace = subspace.factor(0) * gamma.asDiagonal() * subspace.factor(1).transpose();
  f.image = unitary_dft2(f.kspace, true).cwiseAbs();
  return f;
}

std::pair<TrackerState, StepReport> interp_track_step(TrackerState state, MeasurementBatch const &batch,
                                                      StepConfig const &config)
{
  auto const kind = batch.descriptor.kind();
  if (kind != ProjectionKind::FourierMask && kind != ProjectionKind::EntryMask) {
    throw ShapeError("interpolation step needs a Fourier or entry mask");
  }
  MeasurementBatch entries = batch;
  entries.descriptor = ProjectionDescriptor::entry_mask(batch.descriptor.extents(), batch.descriptor.indices());
  return track_step(std::move(state), entries, config);
}

std::vector<CMat> patch_partition(CMat const &frame, PatchGrid const &grid)
{
  if (static_cast<std::size_t>(frame.rows()) != grid.n1 * grid.k1 ||
      static_cast<std::size_t>(frame.cols()) != grid.n2 * grid.k2) {
    throw ShapeError("frame does not match patch grid");
  }
  auto const n1 = static_cast<Eigen::Index>(grid.n1), n2 = static_cast<Eigen::Index>(grid.n2);
  std::vector<CMat> out;
  out.reserve(grid.count());
  for (std::size_t p = 0; p < grid.k1; ++p) {
    for (std::size_t q = 0; q < grid.k2; ++q) {
      out.emplace_back(frame.block(static_cast<Eigen::Index>(p) * n1, static_cast<Eigen::Index>(q) * n2, n1, n2));
    }
  }
  return out;
}

CMat patch_assemble(std::vector<CMat> const &patches, PatchGrid const &grid)
{
  if (patches.size() != grid.count()) {
    throw ShapeError("patch count does not match grid");
  }
  auto const n1 = static_cast<Eigen::Index>(grid.n1), n2 = static_cast<Eigen::Index>(grid.n2);
  CMat frame(n1 * static_cast<Eigen::Index>(grid.k1), n2 * static_cast<Eigen::Index>(grid.k2));
  for (std::size_t k = 0; k < patches.size(); ++k) {
    if (patches[k].rows() != n1 || patches[k].cols() != n2) {
      throw ShapeError("patch shape does not match grid");
    }
    auto const p = static_cast<Eigen::Index>(k / grid.k2), q = static_cast<Eigen::Index>(k % grid.k2);
    frame.block(p * n1, q * n2, n1, n2) = patches[k];
  }
  return frame;
}

std::vector<MeasurementBatch> patch_batches(MeasurementBatch const &batch, PatchGrid const &grid)
{
  auto const &ext = batch.descriptor.extents();
  if (ext.size() != 2 || ext[0] != grid.n1 * grid.k1 || ext[1] != grid.n2 * grid.k2) {
    throw ShapeError("batch does not match patch grid");
  }
  std::vector<std::vector<MultiIndex>> idx(grid.count());
  std::vector<std::vector<cd>> vals(grid.count());
  auto const &omega = batch.descriptor.indices();
  for (std::size_t l = 0; l < omega.size(); ++l) {
    std::size_t const k = (omega[l][0] / grid.n1) * grid.k2 + omega[l][1] / grid.n2;
    idx[k].push_back({omega[l][0] % grid.n1, omega[l][1] % grid.n2});
    vals[k].push_back(batch.y(static_cast<Eigen::Index>(l)));
  }
  std::vector<MeasurementBatch> out(grid.count());
  for (std::size_t k = 0; k < grid.count(); ++k) {
    out[k].descriptor = ProjectionDescriptor::entry_mask({grid.n1, grid.n2}, std::move(idx[k]));
    out[k].y = Eigen::Map<CVec const>(vals[k].data(), static_cast<Eigen::Index>(vals[k].size()));
    out[k].t = batch.t;
    out[k].noise_sigma = batch.noise_sigma;
  }
  return out;
}

PatchTrackers PatchTrackers::create(PatchGrid const &grid, StepConfig config, Rng &rng)
{
  config.rank = grid.rank;
  config.warm_start.reset();
  config.validate();
  PatchTrackers p{grid, config, {}};
  for (std::size_t k = 0; k < grid.count(); ++k) {
    p.states.push_back(TrackerState::initial(config, {grid.n1, grid.n2}, rng));
  }
  return p;
}

CMat PatchTrackers::step(MeasurementBatch const &batch)
{
  auto const parts = patch_batches(batch, grid);
  std::vector<CMat> est(parts.size());
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto [next, report] = track_step(std::move(states[k]), parts[k], config);
    states[k] = std::move(next);
    auto const &s = states[k].subspace;
    est[k] = s.factor(0) * report.gamma.asDiagonal() * s.factor(1).transpose();
  }
  return patch_assemble(est, grid);
}

CoilSet synth_sensitivities(std::size_t n1, std::size_t n2, std::size_t coils, double smoothness, Rng &rng)
{
  if (coils < 1) {
    throw DomainError("need at least one coil");
  }
  if (!(smoothness > 0.0)) {
    throw DomainError("coil smoothness must be positive");
  }
  auto maps = std::make_shared<std::vector<SensitivityMap>>();
  double const cy = 0.5 * static_cast<double>(n1), cx = 0.5 * static_cast<double>(n2);
  double const diag = std::hypot(static_cast<double>(n1), static_cast<double>(n2));
  double const width = smoothness * diag;
  for (std::size_t c = 0; c < coils; ++c) {
    double const th = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(coils);
    double const ay = cy + 0.5 * cy * std::sin(th), ax = cx + 0.5 * cx * std::cos(th);
    double const ky = uniform01(rng) - 0.5, kx = uniform01(rng) - 0.5;
    double const offset = 2.0 * std::numbers::pi * uniform01(rng);
    CMat g(static_cast<Eigen::Index>(n1), static_cast<Eigen::Index>(n2));
    for (std::size_t i = 0; i < n1; ++i) {
      for (std::size_t j = 0; j < n2; ++j) {
        double const d = std::hypot(static_cast<double>(i) - ay, static_cast<double>(j) - ax) / width;
        double const mag = 0.05 + 0.5 * (1.0 + std::cos(std::numbers::pi * std::min(d, 1.0)));
        double const ph = offset + 2.0 * std::numbers::pi *
                                     (ky * static_cast<double>(i) / static_cast<double>(n1) +
                                      kx * static_cast<double>(j) / static_cast<double>(n2));
        g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::polar(mag, ph);
      }
    }
    maps->push_back({std::move(g)});
  }
  RMat sos = RMat::Zero(static_cast<Eigen::Index>(n1), static_cast<Eigen::Index>(n2));
  for (auto const &m : *maps) {
    sos += m.gain.cwiseAbs2();
  }
  RMat const inv = sos.cwiseSqrt().cwiseInverse();
  for (auto &m : *maps) {
    m.gain = m.gain.cwiseProduct(inv.cast<cd>());
  }
  return {std::move(maps)};
}

CMat coil_residual_image(std::vector<CMat> const &residuals, CoilSet const &coils)
{
  return coil_adjoint(residuals, coils.list());
}

std::pair<TrackerState, StepReport> parallel_track_step(TrackerState state, MeasurementBatch const &batch,
                                                        CoilSet const &coils, StepConfig const &config)
{
  if (batch.descriptor.kind() != ProjectionKind::CoilFourierMask) {
    throw ShapeError("parallel step needs a coil Fourier descriptor");
  }
  if (batch.descriptor.coil_count() != coils.size()) {
    throw ShapeError("coil count does not match descriptor");
  }
  if (state.subspace.modes() != 2) {
    throw ShapeError("parallel step needs a two-mode subspace");
  }
  return track_step(std::move(state), batch, config);
}

} // namespace tsl
