#pragma once

#include "dashtrack/ann.hpp"
#include "dashtrack/attention.hpp"
#include "dashtrack/event_sim.hpp"
#include "dashtrack/fusion.hpp"
#include "dashtrack/parallel.hpp"
#include "dashtrack/snn.hpp"
#include "dashtrack/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace dashtrack::tracker {

struct PipelineConfig {
  std::int64_t snn_period_ns = 1'250'000;  // tick spacing (frame interval / 8)
  std::int64_t snn_window_ns = 0;          // event span per tick; 0 = one period
  fusion::TcfConfig tcf;
  attention::AttentionConfig att;
  bool ann_attention = true;  // feed the [X; X*M] channel pair into the frame net

  std::int64_t window_ns() const { return snn_window_ns > 0 ? snn_window_ns : snn_period_ns; }
  void validate() const;
};

struct TrackResult {
  Trajectory fused;  // TCF outputs at SNN ticks
  Trajectory ann;    // one estimate per APS frame
  Trajectory snn;    // raw SNN outputs at SNN ticks
  std::size_t dropped_events = 0;  // events earlier than the first frame
};

/// Run the full pipeline over a bundle. Frames are processed before ticks at
/// equal timestamps; SNN ticks run at t_first + k*period (k >= 1) up to the
/// last frame or event. Ticks whose event window is empty emit nothing.
TrackResult run(const event_sim::DavisBundle& bundle, const snn::SnnNetwork& snn_net,
                const ann::AnnNetwork& ann_net, const PipelineConfig& cfg,
                Exec exec = Exec::Parallel);

/// Piecewise-constant baseline: for each query time, hold the latest anchor
/// with t_a <= t. Queries before the first anchor get the first estimate;
/// their count is returned alongside.
std::pair<Trajectory, std::size_t> zero_order_hold(const Trajectory& ann_traj,
                                                   const std::vector<std::int64_t>& query_times);

}  // namespace dashtrack::tracker
