#pragma once

#include "dashtrack/event_sim.hpp"
#include "dashtrack/net_common.hpp"
#include "dashtrack/synth.hpp"
#include "dashtrack/tracker.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace dashtrack::config {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 16;
  double lr = 1e-3;
  double lambda = 1e-4;
  double init_gain = 1.0;
};

/// Everything a CLI run needs, assembled from (in increasing precedence)
/// built-in defaults, a key=value config file, the DASH_SEED environment
/// variable, and command-line flags.
struct RunConfig {
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = leave the runtime default alone

  synth::SynthConfig synth;
  event_sim::SimConfig sim;
  int interp_factor = 0;
  int interp_r = 1;  // synthesis kernel radius

  std::string preset = "desk";  // desk | full
  std::string snn_arch;         // empty = resolve from preset
  std::string ann_arch;

  net::LifParams lif;
  int snn_T = 8;
  int snn_decode_window = 4;
  TrainConfig train;

  tracker::PipelineConfig pipe;
};

/// Parse a config file body. Lines are `key = value`; '#' starts a comment;
/// unknown keys are rejected.
RunConfig parse_run_config(const std::string& text);

RunConfig load_run_config(const std::filesystem::path& path);

/// Apply one `key = value` override (same registry as the file parser).
void set_key(RunConfig& cfg, const std::string& key, const std::string& value);

/// DASH_SEED, if set, overrides the seed (flags still win over it).
void apply_env(RunConfig& cfg);

/// Resolved architecture strings (preset defaults unless overridden).
std::string snn_arch(const RunConfig& cfg);
std::string ann_arch(const RunConfig& cfg);

/// Full key=value dump in registry order — the effective-config header
/// every command prints.
std::string effective_config(const RunConfig& cfg);

}  // namespace dashtrack::config
