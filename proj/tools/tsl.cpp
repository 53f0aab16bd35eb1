// Command line front end: synthetic data, masks, tracking runs and metrics.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tsl/config.hpp"
#include "tsl/error.hpp"
#include "tsl/experiment.hpp"
#include "tsl/io.hpp"
#include "tsl/synth.hpp"

namespace {

enum Exit { Ok = 0, ConfigFailure = 1, IoFailure = 2, NumericFailure = 3 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App *cmd, Common &c)
{
  cmd->add_option("--config", c.config, "JSON experiment config");
  cmd->add_option("--seed", c.seed, "RNG seed, overrides the config");
}

tsl::ExperimentConfig config_of(Common const &c)
{
  if (c.config.empty()) {
    return tsl::parse_config(nlohmann::json::object(), c.seed);
  }
  return tsl::load_config(c.config, c.seed);
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Online tensor subspace tracking for dynamic MRI"};
  app.require_subcommand(1);

  Common synth_c, mask_c, run_c[4], metrics_c;
  std::string synth_kind = "phantom", synth_out;
  auto *synth = app.add_subcommand("synth", "Generate a phantom or low-rank stream as CTEN");
  add_common(synth, synth_c);
  synth->add_option("--kind", synth_kind, "phantom or lowrank")->check(CLI::IsMember({"phantom", "lowrank"}));
  synth->add_option("--out", synth_out, "Output CTEN path")->required();

  std::string mask_out;
  std::size_t mask_rows = 64, mask_cols = 64, mask_frames = 1;
  auto *mask = app.add_subcommand("mask", "Variable-density row masks as CSV");
  add_common(mask, mask_c);
  mask->add_option("--rows", mask_rows, "Phase-encode rows");
  mask->add_option("--cols", mask_cols, "Readout samples per row");
  mask->add_option("--frames", mask_frames, "Number of frames");
  mask->add_option("--out", mask_out, "Output CSV path")->required();

  tsl::RunMode const modes[4] = {tsl::RunMode::Track, tsl::RunMode::Batch, tsl::RunMode::Adaptive,
                                 tsl::RunMode::Baseline};
  char const *help[4] = {"Streaming reconstruction", "Multi-epoch batch reconstruction",
                         "Adaptive-sampling streaming reconstruction", "Differential compressed-sensing baseline"};
  std::string run_in[4], run_out[4];
  CLI::App *run_cmd[4];
  for (int i = 0; i < 4; ++i) {
    run_cmd[i] = app.add_subcommand(tsl::mode_name(modes[i]), help[i]);
    add_common(run_cmd[i], run_c[i]);
    run_cmd[i]->add_option("--input", run_in[i], "Input CTEN stream (N1 x ... x T)")->required();
    run_cmd[i]->add_option("--out", run_out[i], "Output directory")->required();
  }

  std::string truth_path, estimate_path, metrics_out;
  auto *metrics = app.add_subcommand("metrics", "Recompute NMSE and SSIM between two streams");
  add_common(metrics, metrics_c);
  metrics->add_option("--truth", truth_path, "Reference CTEN")->required();
  metrics->add_option("--estimate", estimate_path, "Estimate CTEN")->required();
  metrics->add_option("--out", metrics_out, "Output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      auto const c = config_of(synth_c);
      if (synth_kind == "phantom") {
        tsl::write_cten(synth_out, tsl::gen_phantom(c.phantom));
      } else {
        tsl::Rng rng(c.seed);
        auto const s = tsl::gen_lowrank_stream(c.lowrank.dims, c.lowrank.rank, c.lowrank.frames,
                                               c.lowrank.noise_sigma, rng, c.lowrank.coherence);
        tsl::write_cten(synth_out, s.data);
      }
    } else if (*mask) {
      auto const c = config_of(mask_c);
      tsl::Rng rng(c.seed);
      std::vector<tsl::MaskRow> rows;
      for (std::size_t t = 0; t < mask_frames; ++t) {
        auto const lines = tsl::variable_density_rows(mask_rows, c.sampling.alpha, c.sampling.fraction, rng);
        for (auto const &idx : tsl::rows_to_indices(lines, mask_cols)) {
          rows.push_back({t, idx});
        }
      }
      tsl::write_text(mask_out, tsl::masks_csv(rows));
    } else if (*metrics) {
      auto const truth = tsl::read_cten(truth_path);
      auto const est = tsl::read_cten(estimate_path);
      tsl::write_text(metrics_out, tsl::metrics_csv(tsl::frame_metrics(truth, est)));
    } else {
      for (int i = 0; i < 4; ++i) {
        if (!*run_cmd[i]) {
          continue;
        }
        auto c = config_of(run_c[i]);
        if (modes[i] == tsl::RunMode::Adaptive) {
          c.sampling.mode = tsl::SamplingMode::Adaptive;
        }
        auto const input = tsl::read_cten(run_in[i]);
        auto const result = tsl::run_experiment(c, modes[i], input);
        tsl::write_artifacts(c, modes[i], result, run_out[i], run_in[i]);
        double nm = 0.0;
        for (auto const &r : result.metrics) {
          nm += r.nmse;
        }
        std::cout << tsl::mode_name(modes[i]) << ": " << result.metrics.size() << " frames, mean NMSE "
                  << tsl::format_double(nm / static_cast<double>(std::max<std::size_t>(result.metrics.size(), 1)))
                  << "\n";
      }
    }
  } catch (tsl::ConfigError const &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ConfigFailure;
  } catch (tsl::IoError const &e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return IoFailure;
  } catch (tsl::FormatError const &e) {
    std::cerr << "format error: " << e.what() << "\n";
    return IoFailure;
  } catch (tsl::NumericalError const &e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return NumericFailure;
  } catch (tsl::Error const &e) {
    std::cerr << "error: " << e.what() << "\n";
    return ConfigFailure;
  }
  return Ok;
}
