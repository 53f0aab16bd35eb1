#include "tsl/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tsl/error.hpp"

namespace tsl {

namespace {

// ||row n of A_m / column norms||^2 for every n; each vector sums to R.
std::vector<RVec> normalized_row_energy(TensorSubspace const &subspace)
{
  if (subspace.modes() < 1 || subspace.rank() < 1) {
    throw ShapeError("scores need a nonempty subspace");
  }
  std::vector<RVec> out;
  for (auto const &a : subspace.factors()) {
    RVec const norms = a.colwise().norm().transpose();
    if ((norms.array() == 0.0).any()) {
      throw DegenerateComponent("zero factor column, scores undefined");
    }
    CMat const unit = a * norms.cwiseInverse().cast<cd>().asDiagonal();
    out.emplace_back(unit.rowwise().squaredNorm());
  }
  return out;
}

void blend(std::vector<double> &s, double beta)
{
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw DomainError("uniform blend weight must lie in [0, 1]");
  }
  double const u = 1.0 / static_cast<double>(s.size());
  double total = 0.0;
  for (auto &v : s) {
    v = (1.0 - beta) * v + beta * u;
    total += v;
  }
  for (auto &v : s) {
    v /= total;
  }
}

} // namespace

SamplingDistribution entry_scores(TensorSubspace const &subspace, double beta)
{
  auto const energy = normalized_row_energy(subspace);
  auto const extents = subspace.extents();
  std::size_t total = 1;
  for (auto n : extents) {
    total *= n;
  }
  std::vector<double> s(total, 0.0);
  std::vector<std::size_t> idx(extents.size(), 0);
  double sum = 0.0;
  for (std::size_t k = 0; k < total; ++k) {
    double v = 0.0;
    for (std::size_t m = 0; m < extents.size(); ++m) {
      v += energy[m](static_cast<Eigen::Index>(idx[m]));
    }
    s[k] = v;
    sum += v;
    for (std::size_t m = extents.size(); m-- > 0;) {
      if (++idx[m] < extents[m]) {
        break;
      }
      idx[m] = 0;
    }
  }
  for (auto &v : s) {
    v /= sum;
  }
  blend(s, beta);
  return {std::move(s), DomainKind::Entries, extents};
}

SamplingDistribution row_scores(TensorSubspace const &subspace, double beta)
{
  if (subspace.modes() != 2) {
    throw ShapeError("row scores need a two-mode subspace");
  }
  auto const energy = normalized_row_energy(subspace);
  auto const extents = subspace.extents();
  auto const n1 = static_cast<double>(extents[0]), n2 = static_cast<double>(extents[1]);
  auto const r = static_cast<double>(subspace.rank());
  std::vector<double> s(extents[0]);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = (n2 * energy[0](static_cast<Eigen::Index>(i)) + r) / (r * (n1 + n2));
  }
  blend(s, beta);
  return {std::move(s), DomainKind::Rows, extents};
}

SamplingDistribution uniform_distribution(DomainKind kind, std::vector<std::size_t> extents)
{
  std::size_t n = extents.empty() ? 0 : extents[0];
  if (kind == DomainKind::Entries) {
    n = std::accumulate(extents.begin(), extents.end(), std::size_t{1}, std::multiplies<>());
  }
  if (n == 0) {
    throw ShapeError("empty sampling domain");
  }
  return {std::vector<double>(n, 1.0 / static_cast<double>(n)), kind, std::move(extents)};
}

SamplePlan draw_samples(SamplingDistribution const &dist, std::size_t k, bool replacement,
                        std::vector<std::size_t> const &forced, Rng &rng)
{
  std::size_t const n = dist.size();
  if (k < 1) {
    throw DomainError("need at least one trial");
  }
  if (!replacement && k > n) {
    throw DomainError("more draws than locations without replacement");
  }
  std::vector<char> taken(n, 0);
  SamplePlan plan{k, replacement, {}};
  for (auto f : forced) {
    if (f >= n) {
      throw DomainError("forced location out of range");
    }
    if (!taken[f]) {
      taken[f] = 1;
      plan.omega.push_back(f);
    }
  }
  if (plan.omega.size() > k) {
    throw DomainError("forced locations exceed the trial count");
  }
  std::size_t const draws = k - plan.omega.size();
  if (replacement) {
    std::vector<double> cdf(n);
    std::partial_sum(dist.scores.begin(), dist.scores.end(), cdf.begin());
    double const total = cdf.back();
    for (std::size_t d = 0; d < draws; ++d) {
      double const u = uniform01(rng) * total;
      auto const it = std::upper_bound(cdf.begin(), cdf.end(), u);
      std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), n - 1);
      // Skip zero-mass locations sitting on a flat stretch of the cdf.
      while (dist.scores[i] <= 0.0 && i > 0) {
        --i;
      }
      if (!taken[i]) {
        taken[i] = 1;
        plan.omega.push_back(i);
      }
    }
  } else {
    std::vector<double> w = dist.scores;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) {
        w[i] = 0.0;
      }
    }
    for (std::size_t d = 0; d < draws; ++d) {
      std::size_t i = 0;
      if (std::any_of(w.begin(), w.end(), [](double v) { return v > 0.0; })) {
        i = draw_weighted(w, rng);
      } else {
        // Remaining mass is zero: fall back to the first free location.
        i = static_cast<std::size_t>(std::find(taken.begin(), taken.end(), 0) - taken.begin());
      }
      taken[i] = 1;
      w[i] = 0.0;
      plan.omega.push_back(i);
    }
  }
  std::sort(plan.omega.begin(), plan.omega.end());
  return plan;
}

double expected_sample_count(SamplingDistribution const &dist, std::size_t k)
{
  if (k < 1) {
    throw DomainError("need at least one trial");
  }
  double e = 0.0;
  for (double s : dist.scores) {
    e += 1.0 - std::pow(1.0 - s, static_cast<double>(k));
  }
  return e;
}

double expected_sample_count(SamplingDistribution const &dist, std::size_t k, std::vector<std::size_t> const &forced)
{
  if (forced.empty()) {
    return expected_sample_count(dist, k);
  }
  std::vector<char> is_forced(dist.size(), 0);
  for (auto f : forced) {
    is_forced.at(f) = 1;
  }
  double const forced_count = static_cast<double>(std::count(is_forced.begin(), is_forced.end(), 1));
  if (forced_count > static_cast<double>(k)) {
    throw DomainError("forced locations exceed the trial count");
  }
  double const draws = static_cast<double>(k) - forced_count;
  double e = forced_count;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (!is_forced[i]) {
      e += 1.0 - std::pow(1.0 - dist.scores[i], draws);
    }
  }
  return e;
}

double SampleBudget::add(SamplingDistribution const &dist, std::size_t k)
{
  double const e = expected_sample_count(dist, k);
  total_ += e;
  ++frames_;
  return e;
}

std::vector<MultiIndex> plan_indices(SamplePlan const &plan, SamplingDistribution const &dist)
{
  if (dist.kind == DomainKind::Rows) {
    if (dist.extents.size() != 2) {
      throw ShapeError("row sampling needs 2-way frames");
    }
    return rows_to_indices(plan.omega, dist.extents[1]);
  }
  std::vector<MultiIndex> out;
  out.reserve(plan.omega.size());
  for (auto flat : plan.omega) {
    MultiIndex idx(dist.extents.size());
    for (std::size_t m = dist.extents.size(); m-- > 0;) {
      idx[m] = flat % dist.extents[m];
      flat /= dist.extents[m];
    }
    out.push_back(std::move(idx));
  }
  return out;
}

TensorFrameProvider::TensorFrameProvider(DenseTensor const &stream) : stream_(&stream)
{
  if (stream.order() < 3) {
    throw ShapeError("frame stream needs at least three modes");
  }
  extents_.assign(stream.dims().begin(), stream.dims().end() - 1);
  frames_ = stream.dims().back();
}

cd TensorFrameProvider::sample(std::size_t frame, MultiIndex const &index)
{
  if (frame >= frames_) {
    throw ShapeError("frame index past the end of the stream");
  }
  MultiIndex full = index;
  full.push_back(frame);
  return stream_->at(full);
}

cd TripwireProvider::sample(std::size_t frame, MultiIndex const &index)
{
  if (frame > horizon_) {
    throw Error("frame " + std::to_string(frame) + " read before it was acquired");
  }
  ++count_;
  accesses_.insert({frame, index});
  return inner_.sample(frame, index);
}

MeasurementBatch acquire(FrameProvider &provider, std::size_t frame, std::vector<MultiIndex> indices,
                         double noise_sigma, Rng &rng)
{
  if (noise_sigma < 0.0) {
    throw DomainError("noise sigma must be nonnegative");
  }
  MeasurementBatch b;
  b.y.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t l = 0; l < indices.size(); ++l) {
    b.y(static_cast<Eigen::Index>(l)) = provider.sample(frame, indices[l]);
  }
  if (noise_sigma > 0.0) {
    for (Eigen::Index l = 0; l < b.y.size(); ++l) {
      b.y(l) += complex_normal(rng, noise_sigma);
    }
  }
  b.descriptor = ProjectionDescriptor::entry_mask(provider.extents(), std::move(indices));
  b.t = frame;
  b.noise_sigma = noise_sigma;
  return b;
}

AdaptiveOutcome adaptive_step(TrackerState state, FrameProvider &provider, std::size_t frame,
                              AdaptiveConfig const &adaptive, StepConfig const &config, Rng &rng)
{
  if (state.subspace.extents() != provider.extents()) {
    throw ShapeError("subspace does not match the frame provider");
  }
  SamplingDistribution const dist = adaptive.domain == DomainKind::Rows ? row_scores(state.subspace, adaptive.beta)
                                                                         : entry_scores(state.subspace, adaptive.beta);
  AdaptiveOutcome out;
  out.plan = draw_samples(dist, adaptive.k, adaptive.replacement, adaptive.forced, rng);
  out.expected_count = adaptive.replacement ? expected_sample_count(dist, adaptive.k, adaptive.forced)
                                            : static_cast<double>(out.plan.omega.size());
  MeasurementBatch const batch = acquire(provider, frame, plan_indices(out.plan, dist), adaptive.noise_sigma, rng);
  auto [next, report] = track_step(std::move(state), batch, config);
  out.state = std::move(next);
  out.report = std::move(report);
  return out;
}

} // namespace tsl
