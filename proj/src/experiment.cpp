#include "tsl/experiment.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "tsl/error.hpp"
#include "tsl/fourier.hpp"
#include "tsl/mri.hpp"

#ifndef TSL_COMMIT
#define TSL_COMMIT "unknown"
#endif

namespace tsl {

namespace {

using Clock = std::chrono::steady_clock;

RMat magnitude(DenseTensor const &slice) { return unfold(slice, 0).cwiseAbs(); }

CMat as_matrix(DenseTensor const &slice) { return unfold(slice, 0); }

MetricRow metric_row(std::size_t t, DenseTensor const &truth, DenseTensor const &estimate, std::size_t samples)
{
  return {t, nmse(as_matrix(truth), as_matrix(estimate)), ssim(magnitude(truth), magnitude(estimate)), samples};
}

// Sampling law used for frame t when it is not drawn from subspace scores.
std::vector<MultiIndex> fixed_law_indices(ExperimentConfig const &c, std::vector<std::size_t> const &extents,
                                          bool full, Rng &rng)
{
  if (full || c.sampling.mode == SamplingMode::Full) {
    return all_indices(extents);
  }
  if (c.domain == DataDomain::Kspace) {
    std::size_t const n1 = extents[0];
    if (c.sampling.mode == SamplingMode::Uniform) {
      auto const dist = uniform_distribution(DomainKind::Rows, extents);
      auto const plan = draw_samples(dist, budget_count(c.sampling.fraction, n1), false, {0}, rng);
      return plan_indices(plan, dist);
    }
    return rows_to_indices(variable_density_rows(n1, c.sampling.alpha, c.sampling.fraction, rng), extents[1]);
  }
  auto const dist = uniform_distribution(DomainKind::Entries, extents);
  auto const plan = draw_samples(dist, budget_count(c.sampling.fraction, dist.size()), false, {}, rng);
  return plan_indices(plan, dist);
}

struct Setup {
  DenseTensor data;  // what the provider serves: k-space, image (coils) or raw entries
  std::vector<std::size_t> extents;
  std::size_t frames = 0;
  bool kspace_data = false;  // estimates live in k-space and need an inverse DFT
};

Setup make_setup(ExperimentConfig const &c, DenseTensor const &truth)
{
  if (truth.order() < 3) {
    throw ShapeError("input needs frame modes plus a time mode");
  }
  Setup s;
  s.extents.assign(truth.dims().begin(), truth.dims().end() - 1);
  s.frames = truth.dims().back();
  if (c.domain == DataDomain::Kspace) {
    if (truth.order() != 3) {
      throw ConfigError("k-space runs need N1 x N2 x T input");
    }
    s.kspace_data = !c.coils;
    s.data = s.kspace_data ? kspace_stream(truth) : truth;
  } else {
    s.data = truth;
  }
  return s;
}

DenseTensor to_output_domain(Setup const &s, DenseTensor const &estimate)
{
  if (!s.kspace_data) {
    return estimate;
  }
  return DenseTensor::from_matrix(unitary_dft2(estimate.to_matrix(), true));
}

void check_finite(DenseTensor const &t)
{
  for (cd v : t.data()) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw NumericalError("non-finite values in the reconstruction");
    }
  }
}

void push_masks(std::vector<MaskRow> &out, std::size_t t, std::vector<MultiIndex> const &idx)
{
  for (auto const &i : idx) {
    out.push_back({t, i});
  }
}

struct Acquirer {
  ExperimentConfig const &config;
  Setup const &setup;
  FrameProvider &provider;
  CoilMaps coils;

  MeasurementBatch operator()(std::size_t t, std::vector<MultiIndex> indices, Rng &rng) const
  {
    provider.advance_to(t);
    if (!coils) {
      return acquire(provider, t, std::move(indices), config.noise_sigma, rng);
    }
    DenseTensor frame(setup.extents);
    for (auto const &idx : all_indices(setup.extents)) {
      frame.at(idx) = provider.sample(t, idx);
    }
    return measure(frame, ProjectionDescriptor::coil_fourier_mask(coils, std::move(indices)), config.noise_sigma, rng,
                   t);
  }
};

RunTraceRow trace_row(StepReport const &r, std::size_t epoch, std::size_t frame)
{
  return {r.t, epoch, frame, r.instantaneous_cost, r.step_size, r.gamma.norm(), r.residual.norm()};
}

ExperimentResult run_baseline(ExperimentConfig const &c, Setup const &s, FrameProvider &provider, Rng &rng,
                              DenseTensor const &truth)
{
  if (c.domain != DataDomain::Kspace || c.coils || c.patch) {
    throw ConfigError("the differential baseline runs on single-coil k-space data");
  }
  ExperimentResult res;
  res.reconstruction = DenseTensor(truth.dims());
  Acquirer const acq{c, s, provider, nullptr};
  auto const n1 = static_cast<Eigen::Index>(s.extents[0]), n2 = static_cast<Eigen::Index>(s.extents[1]);
  CMat previous = CMat::Zero(n1, n2);
  std::optional<CMat> difference;
  for (std::size_t t = 0; t < s.frames; ++t) {
    auto const start = Clock::now();
    auto idx = fixed_law_indices(c, s.extents, t < c.warm_start_frames, rng);
    push_masks(res.masks, t, idx);
    MeasurementBatch b = acq(t, idx, rng);
    b.descriptor = ProjectionDescriptor::fourier_mask(s.extents[0], s.extents[1], b.descriptor.indices());
    LassoConfig lc = c.lasso;
    lc.warm_start = difference;
    auto const out = differential_cs_step(previous, b, lc);
    previous = out.frame;
    difference = out.difference;
    DenseTensor const est = DenseTensor::from_matrix(out.frame);
    res.reconstruction.set_last_mode_slice(t, est);
    res.frame_seconds.push_back(std::chrono::duration<double>(Clock::now() - start).count());
    res.metrics.push_back(metric_row(t, truth.last_mode_slice(t), est, idx.size()));
  }
  return res;
}

ExperimentResult run_patches(ExperimentConfig const &c, Setup const &s, FrameProvider &provider, Rng &rng,
                             DenseTensor const &truth)
{
  if (!s.kspace_data) {
    throw ConfigError("patch tracking runs on single-coil k-space data");
  }
  ExperimentResult res;
  res.reconstruction = DenseTensor(truth.dims());
  auto const grid = PatchGrid::tile(s.extents[0], s.extents[1], c.patch->n1, c.patch->n2, c.patch->rho);
  PatchTrackers trackers = PatchTrackers::create(grid, c.step_config(), rng);
  Acquirer const acq{c, s, provider, nullptr};
  std::size_t const warm = std::min(c.warm_start_frames, s.frames);
  for (std::size_t e = 0; e + 1 < c.warm_start_epochs; ++e) {
    for (std::size_t t = 0; t < warm; ++t) {
      trackers.step(acq(t, all_indices(s.extents), rng));
    }
  }
  for (std::size_t t = 0; t < s.frames; ++t) {
    auto const start = Clock::now();
    auto idx = fixed_law_indices(c, s.extents, t < warm, rng);
    push_masks(res.masks, t, idx);
    CMat const k = trackers.step(acq(t, idx, rng));
    DenseTensor const est = to_output_domain(s, DenseTensor::from_matrix(k));
    res.reconstruction.set_last_mode_slice(t, est);
    res.frame_seconds.push_back(std::chrono::duration<double>(Clock::now() - start).count());
    res.metrics.push_back(metric_row(t, truth.last_mode_slice(t), est, idx.size()));
  }
  return res;
}

} // namespace

char const *mode_name(RunMode mode)
{
  switch (mode) {
  case RunMode::Track: return "track";
  case RunMode::Batch: return "batch";
  case RunMode::Adaptive: return "adaptive";
  case RunMode::Baseline: return "baseline";
  }
  return "";
}

char const *build_commit() { return TSL_COMMIT; }

std::vector<MetricRow> frame_metrics(DenseTensor const &truth, DenseTensor const &estimate)
{
  if (truth.dims() != estimate.dims() || truth.order() < 3) {
    throw ShapeError("metrics need two streams of equal shape");
  }
  std::vector<MetricRow> rows;
  for (std::size_t t = 0; t < truth.dims().back(); ++t) {
    rows.push_back(metric_row(t, truth.last_mode_slice(t), estimate.last_mode_slice(t), 0));
  }
  return rows;
}

ExperimentResult run_experiment(ExperimentConfig const &config, RunMode mode, DenseTensor const &truth,
                                FrameProvider *acquisition)
{
  config.validate();
  Rng rng(config.seed);
  Setup const s = make_setup(config, truth);
  std::optional<TensorFrameProvider> own;
  if (!acquisition) {
    own.emplace(s.data);
    acquisition = &*own;
  }
  if (acquisition->extents() != s.extents || acquisition->frame_count() != s.frames) {
    throw ShapeError("acquisition provider does not match the input stream");
  }
  FrameProvider &provider = *acquisition;

  ExperimentResult res;
  if (mode == RunMode::Baseline) {
    res = run_baseline(config, s, provider, rng, truth);
    check_finite(res.reconstruction);
    return res;
  }
  if (config.patch) {
    if (mode != RunMode::Track) {
      throw ConfigError("patch tracking supports the streaming mode only");
    }
    res = run_patches(config, s, provider, rng, truth);
    check_finite(res.reconstruction);
    return res;
  }
  if (mode == RunMode::Adaptive && config.coils) {
    throw ConfigError("adaptive sampling is not combined with coils");
  }

  CoilMaps coils;
  if (config.coils) {
    coils = synth_sensitivities(s.extents[0], s.extents[1], config.coils->count, config.coils->smoothness, rng).maps;
  }
  Acquirer const acq{config, s, provider, coils};
  StepConfig const step = config.step_config();
  TrackerState state = TrackerState::initial(step, s.extents, rng);
  res.reconstruction = DenseTensor(truth.dims());
  std::size_t const warm = std::min(config.warm_start_frames, s.frames);

  auto record = [&](std::size_t t, TensorSubspace const &sub, CoefficientVector const &gamma, std::size_t samples) {
    DenseTensor const est = to_output_domain(s, synthesize_slice(sub, gamma));
    res.reconstruction.set_last_mode_slice(t, est);
    res.metrics.push_back(metric_row(t, truth.last_mode_slice(t), est, samples));
  };

  if (mode == RunMode::Batch) {
    std::vector<MeasurementBatch> stream;
    for (std::size_t t = 0; t < s.frames; ++t) {
      auto idx = fixed_law_indices(config, s.extents, t < warm, rng);
      push_masks(res.masks, t, idx);
      stream.push_back(acq(t, std::move(idx), rng));
    }
    auto const start = Clock::now();
    RunResult run_out = tsl::run(stream, step, config.epochs, config.reshuffle, rng, state);
    res.trace = std::move(run_out.trace);
    state = std::move(run_out.state);
    for (std::size_t t = 0; t < s.frames; ++t) {
      CMat const phi = build_phi(state.subspace, stream[t].descriptor);
      record(t, state.subspace, solve_gamma(phi, stream[t].y, config.lambda), stream[t].descriptor.indices().size());
    }
    double const per = std::chrono::duration<double>(Clock::now() - start).count() / static_cast<double>(s.frames);
    res.frame_seconds.assign(s.frames, per);
    res.final_state = std::move(state);
    check_finite(res.reconstruction);
    return res;
  }

  // Warm start on fully acquired leading frames.
  if (warm > 0) {
    std::vector<MeasurementBatch> warm_stream;
    for (std::size_t t = 0; t < warm; ++t) {
      auto idx = all_indices(s.extents);
      push_masks(res.masks, t, idx);
      warm_stream.push_back(acq(t, std::move(idx), rng));
    }
    RunResult run_out = tsl::run(warm_stream, step, std::max<std::size_t>(config.warm_start_epochs, 1), false, rng,
                                 std::move(state));
    res.trace = std::move(run_out.trace);
    state = std::move(run_out.state);
    for (std::size_t t = 0; t < warm; ++t) {
      CMat const phi = build_phi(state.subspace, warm_stream[t].descriptor);
      record(t, state.subspace, solve_gamma(phi, warm_stream[t].y, config.lambda),
             warm_stream[t].descriptor.indices().size());
      res.frame_seconds.push_back(0.0);
    }
  }

  bool const adaptive = mode == RunMode::Adaptive && config.sampling.mode == SamplingMode::Adaptive;
  for (std::size_t t = warm; t < s.frames; ++t) {
    auto const start = Clock::now();
    StepReport report;
    std::size_t samples = 0;
    if (adaptive && t >= warm + config.sampling.switch_frame) {
      AdaptiveConfig ac;
      ac.domain = config.domain == DataDomain::Kspace ? DomainKind::Rows : DomainKind::Entries;
      std::size_t const domain_size = ac.domain == DomainKind::Rows
                                        ? s.extents[0]
                                        : std::accumulate(s.extents.begin(), s.extents.end(), std::size_t{1},
                                                          std::multiplies<>());
      ac.k = config.sampling.k ? config.sampling.k : budget_count(config.sampling.fraction, domain_size);
      ac.replacement = config.sampling.replacement;
      ac.beta = config.sampling.beta;
      if (ac.domain == DomainKind::Rows) {
        ac.forced = {0};
      }
      ac.noise_sigma = config.noise_sigma;
      provider.advance_to(t);
      AdaptiveOutcome out = adaptive_step(std::move(state), provider, t, ac, step, rng);
      state = std::move(out.state);
      report = std::move(out.report);
      SamplingDistribution const dist{{}, ac.domain, s.extents};
      auto const idx = plan_indices(out.plan, dist);
      push_masks(res.masks, t, idx);
      samples = idx.size();
      res.budget.push_back({t, ac.k, out.plan.omega.size(), out.expected_count});
    } else {
      auto idx = fixed_law_indices(config, s.extents, false, rng);
      push_masks(res.masks, t, idx);
      samples = idx.size();
      MeasurementBatch const b = acq(t, std::move(idx), rng);
      auto [next, rep] = track_step(std::move(state), b, step);
      state = std::move(next);
      report = std::move(rep);
      if (mode == RunMode::Adaptive) {
        std::size_t const units = config.domain == DataDomain::Kspace ? samples / s.extents[1] : samples;
        res.budget.push_back({t, units, units, static_cast<double>(units)});
      }
    }
    res.trace.push_back(trace_row(report, 0, t));
    record(t, state.subspace, report.gamma, samples);
    res.frame_seconds.push_back(std::chrono::duration<double>(Clock::now() - start).count());
  }
  res.final_state = std::move(state);
  check_finite(res.reconstruction);
  return res;
}

void write_artifacts(ExperimentConfig const &config, RunMode mode, ExperimentResult const &result,
                     std::filesystem::path const &outputs, std::filesystem::path const &input)
{
  std::error_code ec;
  std::filesystem::create_directories(outputs, ec);
  if (ec) {
    throw IoError("cannot create " + outputs.string() + ": " + ec.message());
  }
  write_cten(outputs / "recon.cten", result.reconstruction);
  write_text(outputs / "metrics.csv", metrics_csv(result.metrics));
  write_text(outputs / "masks.csv", masks_csv(result.masks));
  write_text(outputs / "trace.csv", trace_csv(result.trace));
  if (!result.budget.empty()) {
    write_text(outputs / "budget.csv", budget_csv(result.budget));
  }
  nlohmann::json m;
  m["mode"] = mode_name(mode);
  m["input"] = input.string();
  m["commit"] = build_commit();
  m["config"] = to_json(config);
  m["frame_seconds"] = result.frame_seconds;
  m["total_seconds"] = std::accumulate(result.frame_seconds.begin(), result.frame_seconds.end(), 0.0);
  write_text(outputs / "manifest.json", m.dump(2) + "\n");
}

} // namespace tsl
