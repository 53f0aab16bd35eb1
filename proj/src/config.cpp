#include "tsl/config.hpp"

#include <fstream>
#include <set>

#include "tsl/error.hpp"

namespace tsl {

using nlohmann::json;

namespace {

void check_keys(json const &j, std::set<std::string> const &allowed, std::string const &where)
{
  if (!j.is_object()) {
    throw ConfigError(where + " must be an object");
  }
  for (auto const &[key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(json const &j, char const *key, T &out)
{
  if (!j.contains(key)) {
    return;
  }
  try {
    out = j.at(key).get<T>();
  } catch (json::exception const &e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::string read_enum(json const &j, char const *key, std::string fallback)
{
  read(j, key, fallback);
  return fallback;
}

SamplingMode sampling_mode(std::string const &s)
{
  if (s == "variable_density") return SamplingMode::VariableDensity;
  if (s == "adaptive") return SamplingMode::Adaptive;
  if (s == "uniform") return SamplingMode::Uniform;
  if (s == "full") return SamplingMode::Full;
  throw ConfigError("unknown sampling mode '" + s + "'");
}

std::string sampling_name(SamplingMode m)
{
  switch (m) {
  case SamplingMode::VariableDensity: return "variable_density";
  case SamplingMode::Adaptive: return "adaptive";
  case SamplingMode::Uniform: return "uniform";
  case SamplingMode::Full: return "full";
  }
  return "";
}

} // namespace

StepConfig ExperimentConfig::step_config() const
{
  StepConfig s;
  s.lambda = lambda;
  s.step = step;
  s.rank = rank;
  s.init_scale = init_scale;
  return s;
}

void ExperimentConfig::validate() const
{
  step_config().validate();
  if (!(lambda > 0.0)) {
    throw ConfigError("lambda must be positive");
  }
  if (epochs < 1) {
    throw ConfigError("epochs must be at least 1");
  }
  if (!(sampling.fraction > 0.0 && sampling.fraction <= 1.0)) {
    throw ConfigError("sampling fraction must lie in (0, 1]");
  }
  if (!(sampling.beta >= 0.0 && sampling.beta <= 1.0)) {
    throw ConfigError("beta must lie in [0, 1]");
  }
  if (noise_sigma < 0.0) {
    throw ConfigError("noise_sigma must be nonnegative");
  }
  if (patch && (patch->n1 == 0 || patch->n2 == 0 || patch->rho == 0)) {
    throw ConfigError("patch extents and rank must be positive");
  }
  if (coils && (coils->count == 0 || !(coils->smoothness > 0.0))) {
    throw ConfigError("coil count and smoothness must be positive");
  }
  if (coils && patch) {
    throw ConfigError("patches and coils cannot be combined");
  }
  if (domain == DataDomain::Entries && sampling.mode == SamplingMode::VariableDensity) {
    throw ConfigError("variable density sampling needs the k-space domain");
  }
  if (domain == DataDomain::Entries && (coils || patch)) {
    throw ConfigError("coils and patches need the k-space domain");
  }
  lasso.validate();
}

ExperimentConfig parse_config(json const &j, std::optional<std::uint64_t> seed_override)
{
  check_keys(j,
             {"rank", "lambda", "step", "init_scale", "epochs", "reshuffle", "domain", "sampling", "patch", "coils",
              "noise_sigma", "seed", "warm_start_frames", "warm_start_epochs", "lasso", "phantom", "lowrank"},
             "config");
  ExperimentConfig c;
  read(j, "rank", c.rank);
  read(j, "lambda", c.lambda);
  read(j, "init_scale", c.init_scale);
  read(j, "epochs", c.epochs);
  read(j, "reshuffle", c.reshuffle);
  read(j, "noise_sigma", c.noise_sigma);
  read(j, "warm_start_frames", c.warm_start_frames);
  read(j, "warm_start_epochs", c.warm_start_epochs);
  if (seed_override) {
    c.seed = *seed_override;
  } else if (j.contains("seed")) {
    read(j, "seed", c.seed);
  } else {
    throw ConfigError("seed is mandatory (config key 'seed' or --seed)");
  }

  std::string const domain = read_enum(j, "domain", "kspace");
  if (domain == "kspace") {
    c.domain = DataDomain::Kspace;
  } else if (domain == "entries") {
    c.domain = DataDomain::Entries;
  } else {
    throw ConfigError("unknown domain '" + domain + "'");
  }

  if (j.contains("step")) {
    auto const &s = j.at("step");
    check_keys(s, {"mode", "mu", "c_floor", "c_cap"}, "step");
    std::string const mode = read_enum(s, "mode", "fixed");
    if (mode == "fixed") {
      FixedStep f{0.01};
      read(s, "mu", f.mu);
      c.step = f;
    } else if (mode == "hessian") {
      HessianBoundStep h;
      read(s, "c_floor", h.c_floor);
      read(s, "c_cap", h.c_cap);
      c.step = h;
    } else {
      throw ConfigError("unknown step mode '" + mode + "'");
    }
  }
  if (j.contains("sampling")) {
    auto const &s = j.at("sampling");
    check_keys(s, {"mode", "alpha", "fraction", "K", "replacement", "beta", "switch_frame"}, "sampling");
    c.sampling.mode = sampling_mode(read_enum(s, "mode", "variable_density"));
    read(s, "alpha", c.sampling.alpha);
    read(s, "fraction", c.sampling.fraction);
    read(s, "K", c.sampling.k);
    read(s, "replacement", c.sampling.replacement);
    read(s, "beta", c.sampling.beta);
    read(s, "switch_frame", c.sampling.switch_frame);
  }
  if (j.contains("patch")) {
    auto const &s = j.at("patch");
    check_keys(s, {"n1", "n2", "rho"}, "patch");
    PatchConfig p;
    read(s, "n1", p.n1);
    read(s, "n2", p.n2);
    read(s, "rho", p.rho);
    c.patch = p;
  }
  if (j.contains("coils")) {
    auto const &s = j.at("coils");
    check_keys(s, {"count", "smoothness"}, "coils");
    CoilConfig k;
    read(s, "count", k.count);
    read(s, "smoothness", k.smoothness);
    c.coils = k;
  }
  if (j.contains("lasso")) {
    auto const &s = j.at("lasso");
    check_keys(s, {"lambda", "max_iterations", "gap_tolerance"}, "lasso");
    read(s, "lambda", c.lasso.lambda);
    read(s, "max_iterations", c.lasso.max_iterations);
    read(s, "gap_tolerance", c.lasso.gap_tolerance);
  }
  if (j.contains("phantom")) {
    auto const &s = j.at("phantom");
    check_keys(s,
               {"n1", "n2", "frames", "outer_a", "outer_b", "inner_r0", "amplitude", "period", "inner_gain",
                "phase_rows", "phase_cols"},
               "phantom");
    auto &p = c.phantom;
    read(s, "n1", p.n1);
    read(s, "n2", p.n2);
    read(s, "frames", p.frames);
    read(s, "outer_a", p.outer_a);
    read(s, "outer_b", p.outer_b);
    read(s, "inner_r0", p.inner_r0);
    read(s, "amplitude", p.amplitude);
    read(s, "period", p.period);
    read(s, "inner_gain", p.inner_gain);
    read(s, "phase_rows", p.phase_rows);
    read(s, "phase_cols", p.phase_cols);
  }
  if (j.contains("lowrank")) {
    auto const &s = j.at("lowrank");
    check_keys(s, {"dims", "rank", "frames", "noise_sigma", "coherence"}, "lowrank");
    auto &l = c.lowrank;
    read(s, "dims", l.dims);
    read(s, "rank", l.rank);
    read(s, "frames", l.frames);
    read(s, "noise_sigma", l.noise_sigma);
    read(s, "coherence", l.coherence);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(std::string const &path, std::optional<std::uint64_t> seed_override)
{
  std::ifstream f(path);
  if (!f) {
    throw IoError("cannot open config " + path);
  }
  json j;
  try {
    f >> j;
  } catch (json::exception const &e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j, seed_override);
}

json to_json(ExperimentConfig const &c)
{
  json j;
  j["rank"] = c.rank;
  j["lambda"] = c.lambda;
  if (auto const *f = std::get_if<FixedStep>(&c.step)) {
    j["step"] = {{"mode", "fixed"}, {"mu", f->mu}};
  } else {
    auto const &h = std::get<HessianBoundStep>(c.step);
    j["step"] = {{"mode", "hessian"}, {"c_floor", h.c_floor}, {"c_cap", h.c_cap}};
  }
  j["init_scale"] = c.init_scale;
  j["epochs"] = c.epochs;
  j["reshuffle"] = c.reshuffle;
  j["domain"] = c.domain == DataDomain::Kspace ? "kspace" : "entries";
  j["sampling"] = {{"mode", sampling_name(c.sampling.mode)},
                   {"alpha", c.sampling.alpha},
                   {"fraction", c.sampling.fraction},
                   {"K", c.sampling.k},
                   {"replacement", c.sampling.replacement},
                   {"beta", c.sampling.beta},
                   {"switch_frame", c.sampling.switch_frame}};
  if (c.patch) {
    j["patch"] = {{"n1", c.patch->n1}, {"n2", c.patch->n2}, {"rho", c.patch->rho}};
  }
  if (c.coils) {
    j["coils"] = {{"count", c.coils->count}, {"smoothness", c.coils->smoothness}};
  }
  j["noise_sigma"] = c.noise_sigma;
  j["seed"] = c.seed;
  j["warm_start_frames"] = c.warm_start_frames;
  j["warm_start_epochs"] = c.warm_start_epochs;
  j["lasso"] = {{"lambda", c.lasso.lambda},
                {"max_iterations", c.lasso.max_iterations},
                {"gap_tolerance", c.lasso.gap_tolerance}};
  auto const &p = c.phantom;
  j["phantom"] = {{"n1", p.n1},           {"n2", p.n2},         {"frames", p.frames},
                  {"outer_a", p.outer_a}, {"outer_b", p.outer_b}, {"inner_r0", p.inner_r0},
                  {"amplitude", p.amplitude}, {"period", p.period}, {"inner_gain", p.inner_gain},
                  {"phase_rows", p.phase_rows}, {"phase_cols", p.phase_cols}};
  auto const &l = c.lowrank;
  j["lowrank"] = {{"dims", l.dims},
                  {"rank", l.rank},
                  {"frames", l.frames},
                  {"noise_sigma", l.noise_sigma},
                  {"coherence", l.coherence}};
  return j;
}

} // namespace tsl
