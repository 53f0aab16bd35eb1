#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "tsl/metrics.hpp"
#include "tsl/synth.hpp"
#include "tsl/tracker.hpp"

namespace tsl {

enum class SamplingMode { VariableDensity, Adaptive, Uniform, Full };
enum class DataDomain { Kspace, Entries };

struct SamplingConfig {
  SamplingMode mode = SamplingMode::VariableDensity;
  double alpha = -1.0;
  double fraction = 0.1;
  std::size_t k = 0;  // trials per frame for adaptive draws; 0 derives it from fraction
  bool replacement = true;
  double beta = 0.1;
  std::size_t switch_frame = 0;  // frames after warm start that still use the non-adaptive law
};

struct PatchConfig {
  std::size_t n1 = 8, n2 = 8, rho = 4;
};

struct CoilConfig {
  std::size_t count = 4;
  double smoothness = 0.35;
};

struct LowRankConfig {
  std::vector<std::size_t> dims{30, 30};
  std::size_t rank = 5;
  std::size_t frames = 500;
  double noise_sigma = 0.0;
  double coherence = 0.0;
};

struct ExperimentConfig {
  std::size_t rank = 100;
  double lambda = 2.0;
  StepMode step = FixedStep{0.01};
  double init_scale = 1.0;
  std::size_t epochs = 1;
  bool reshuffle = false;
  DataDomain domain = DataDomain::Kspace;
  SamplingConfig sampling;
  std::optional<PatchConfig> patch;
  std::optional<CoilConfig> coils;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::size_t warm_start_frames = 5;
  std::size_t warm_start_epochs = 1;
  LassoConfig lasso;
  PhantomSpec phantom;
  LowRankConfig lowrank;

  StepConfig step_config() const;
  void validate() const;
};

// Unknown keys are rejected. The seed is mandatory unless an override is given.
ExperimentConfig parse_config(nlohmann::json const &j, std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_config(std::string const &path, std::optional<std::uint64_t> seed_override = std::nullopt);
nlohmann::json to_json(ExperimentConfig const &config);

} // namespace tsl
