#pragma once

#include "dashtrack/parallel.hpp"
#include "dashtrack/rng.hpp"
#include "dashtrack/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace dashtrack::event_sim {

/// DVS/APS simulator parameters. dt_f must be an integer multiple of m*dt_e.
struct SimConfig {
  double theta = 0.1;                    // brightness-change threshold
  std::int64_t dt_e_ns = 100'000;        // minimal event temporal resolution
  std::int64_t dt_f_ns = 10'000'000;     // APS frame interval
  int m = 1;                             // sub-intervals between APS frames
  std::uint64_t seed = 0;

  void validate() const;
  std::int64_t sub_dt_ns() const { return dt_f_ns / m; }
  std::int64_t jitter_slots() const { return dt_f_ns / (m * dt_e_ns); }
};

/// Simulated DAVIS output: synchronous APS frames plus asynchronous events.
struct DavisBundle {
  std::vector<Frame> aps;    // every m-th input frame
  std::vector<Event> dvs;    // sorted by (t, y, x, p)
  SimConfig cfg;
};

/// Per-pixel intensity difference next - prev. Throws on shape mismatch.
std::vector<double> brightness_delta(const Frame& prev, const Frame& next);

/// Step-function polarity: eps(d-theta) + eps(d+theta) - 1, eps(0) = 0.
int polarity(double delta, double theta);

/// floor(|acc| / theta), with a relative epsilon so accumulated rounding
/// noise cannot suppress an exact threshold crossing.
int event_count(double accumulated_delta, double theta);

/// count independent timestamps t_f + floor(U(0, slots)) * dt_e.
std::vector<std::int64_t> jitter_timestamps(int count, std::int64_t t_f,
                                            const SimConfig& cfg, Rng& rng);

/// Convert an interpolated frame sequence (spacing dt_f/m) into a bundle.
/// Deterministic for a fixed seed and independent of the execution policy.
DavisBundle simulate(const std::vector<Frame>& frames, const SimConfig& cfg,
                     Exec exec = Exec::Parallel);

/// Integrate events onto the base frame: I(t) = clamp(base + theta * sum of
/// polarities with t_e < t). query_times must be ascending.
std::vector<Frame> reconstruct_frames(const Frame& base, const std::vector<Event>& events,
                                      double theta, const std::vector<std::int64_t>& query_times);

// Bundle directory layout: events.bin, aps/ (frames + timestamps), meta.txt.
void write_bundle(const std::filesystem::path& dir, const DavisBundle& bundle);
DavisBundle read_bundle(const std::filesystem::path& dir);

}  // namespace dashtrack::event_sim
