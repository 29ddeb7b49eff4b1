#pragma once

#include "dashtrack/rng.hpp"
#include "dashtrack/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace dashtrack::synth {

/// Synthetic moving-square benchmark generator. One bright square translates
/// at constant velocity over a configurable background; optional static
/// distractor squares and static texture add frame-domain clutter that emits
/// no events (useful for attention ablations).
struct SynthConfig {
  int width = 32, height = 32;
  int frames = 60;
  std::int64_t t0_ns = 0;
  std::int64_t dt_f_ns = 10'000'000;  // 100 Hz
  double object_w = 8.0, object_h = 8.0;  // pixels
  double x0 = 8.0, y0 = 16.0;             // start center, continuous pixel coords
  double vx = 0.3, vy = 0.0;              // pixels per frame
  double foreground = 1.0, background = 0.0;
  int distractors = 0;     // static squares with the object's size and brightness
  double texture = 0.0;    // static per-pixel noise amplitude added to the background
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthDataset {
  std::vector<Frame> frames;
  std::vector<std::int64_t> timestamps;
  Trajectory gt;  // one label per frame, source Gt
};

/// Deterministic for a fixed config (seed included). Frames are rendered
/// with box-filter anti-aliasing: each pixel holds its coverage-weighted
/// brightness, so sub-pixel motion produces smooth intensity changes.
SynthDataset synth_sequence(const SynthConfig& cfg);

/// Writes frames + timestamps (frame-directory layout) and gt.txt.
void write_dataset(const std::filesystem::path& dir, const SynthDataset& ds);

}  // namespace dashtrack::synth
