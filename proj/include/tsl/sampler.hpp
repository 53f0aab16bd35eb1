#pragma once

#include <set>
#include <utility>
#include <vector>

#include "tsl/observation.hpp"
#include "tsl/tracker.hpp"

namespace tsl {

enum class DomainKind { Entries, Rows };

/// Probability law over sample locations: all entries of a frame (row-major
/// flat index) or the rows of mode 0.
struct SamplingDistribution {
  std::vector<double> scores;
  DomainKind kind = DomainKind::Entries;
  std::vector<std::size_t> extents;

  std::size_t size() const { return scores.size(); }
};

struct SamplePlan {
  std::size_t k = 0;
  bool replacement = true;
  std::vector<std::size_t> omega;  // sorted, distinct
};

// Score of entry n = sum_m ||row n_m of normalized A_m||^2, normalized to sum
// one, then blended with the uniform law: (1 - beta) s + beta / size.
SamplingDistribution entry_scores(TensorSubspace const &subspace, double beta = 0.1);

// Entry scores of a two-mode subspace summed over the second index:
// s(n1) = (N2 ||row n1||^2 + R) / (R (N1 + N2)), then blended.
SamplingDistribution row_scores(TensorSubspace const &subspace, double beta = 0.1);

SamplingDistribution uniform_distribution(DomainKind kind, std::vector<std::size_t> extents);

// With replacement: distinct locations among k i.i.d. draws. Without: k
// distinct locations by draw, remove, renormalize. Forced locations are
// included first and count toward k.
SamplePlan draw_samples(SamplingDistribution const &dist, std::size_t k, bool replacement,
                        std::vector<std::size_t> const &forced, Rng &rng);

// sum_i 1 - (1 - s_i)^k
double expected_sample_count(SamplingDistribution const &dist, std::size_t k);
// Forced locations count once each and use up one trial apiece.
double expected_sample_count(SamplingDistribution const &dist, std::size_t k, std::vector<std::size_t> const &forced);

// Running mean of expected_sample_count over frames.
class SampleBudget {
public:
  double add(SamplingDistribution const &dist, std::size_t k);
  double average() const { return frames_ ? total_ / static_cast<double>(frames_) : 0.0; }
  std::size_t frames() const { return frames_; }

private:
  double total_ = 0.0;
  std::size_t frames_ = 0;
};

// Multi-indices measured by a plan, expanding rows to full lines.
std::vector<MultiIndex> plan_indices(SamplePlan const &plan, SamplingDistribution const &dist);

/// Source of ground-truth frames that is only read at acquired locations.
class FrameProvider {
public:
  virtual ~FrameProvider() = default;
  virtual std::vector<std::size_t> const &extents() const = 0;
  virtual std::size_t frame_count() const = 0;
  virtual cd sample(std::size_t frame, MultiIndex const &index) = 0;
  // Called once a frame's acquisition starts; frames are acquired in order.
  virtual void advance_to(std::size_t /*frame*/) {}
};

// Frames are the slices of a stream tensor along its last mode.
class TensorFrameProvider : public FrameProvider {
public:
  explicit TensorFrameProvider(DenseTensor const &stream);
  std::vector<std::size_t> const &extents() const override { return extents_; }
  std::size_t frame_count() const override { return frames_; }
  cd sample(std::size_t frame, MultiIndex const &index) override;

private:
  DenseTensor const *stream_;
  std::vector<std::size_t> extents_;
  std::size_t frames_ = 0;
};

// Wraps a provider, logs every access and refuses frames past the horizon.
class TripwireProvider : public FrameProvider {
public:
  explicit TripwireProvider(FrameProvider &inner) : inner_(inner) {}
  std::vector<std::size_t> const &extents() const override { return inner_.extents(); }
  std::size_t frame_count() const override { return inner_.frame_count(); }
  cd sample(std::size_t frame, MultiIndex const &index) override;

  void advance_to(std::size_t frame) override { horizon_ = frame; }
  std::set<std::pair<std::size_t, MultiIndex>> const &accesses() const { return accesses_; }
  std::size_t access_count() const { return count_; }

private:
  FrameProvider &inner_;
  std::size_t horizon_ = 0;
  std::size_t count_ = 0;
  std::set<std::pair<std::size_t, MultiIndex>> accesses_;
};

// Entry-mask batch of frame `frame` read from the provider at the given locations.
MeasurementBatch acquire(FrameProvider &provider, std::size_t frame, std::vector<MultiIndex> indices,
                         double noise_sigma, Rng &rng);

struct AdaptiveConfig {
  DomainKind domain = DomainKind::Entries;
  std::size_t k = 1;
  bool replacement = true;
  double beta = 0.1;
  std::vector<std::size_t> forced;  // e.g. the DC row for line sampling
  double noise_sigma = 0.0;
};

struct AdaptiveOutcome {
  TrackerState state;
  SamplePlan plan;
  StepReport report;
  double expected_count = 0.0;
};

// Scores from the current subspace, draw, acquire only the drawn locations, then track_step.
AdaptiveOutcome adaptive_step(TrackerState state, FrameProvider &provider, std::size_t frame,
                              AdaptiveConfig const &adaptive, StepConfig const &config, Rng &rng);

} // namespace tsl
