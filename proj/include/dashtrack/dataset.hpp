#pragma once

#include "dashtrack/ann.hpp"
#include "dashtrack/event_sim.hpp"
#include "dashtrack/snn.hpp"
#include "dashtrack/tracker.hpp"

#include <cstdint>
#include <vector>

namespace dashtrack::dataset {

/// Training windows for the spiking net: one event window per tick of the
/// pipeline schedule (t_first + k*period, k >= 1), encoded over the pipeline
/// window length and labeled with ground truth interpolated at the window
/// end. Empty windows are skipped, mirroring the tracker.
std::vector<snn::SnnSample> snn_samples(const event_sim::DavisBundle& bundle,
                                        const Trajectory& gt,
                                        const tracker::PipelineConfig& pipe, int T);

/// Training samples for the frame net: one per APS frame, labeled with
/// ground truth interpolated at the frame time. With attention enabled the
/// input is the [X; X*M] channel pair, masked by a noisy prior obtained by
/// augmenting the label (the tracker supplies real priors at run time).
std::vector<ann::AnnSample> ann_samples(const std::vector<Frame>& frames, const Trajectory& gt,
                                        const tracker::PipelineConfig& pipe,
                                        std::uint64_t seed);

}  // namespace dashtrack::dataset
