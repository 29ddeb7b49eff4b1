#pragma once

#include "dashtrack/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace dashtrack::fusion {

struct TcfConfig {
  std::int64_t kappa_ns = 100'000'000;  // time scale normalizing (t_a - t_s)
  bool causal = true;                   // online mode: anchors with t_a <= t_s only

  void validate() const;
};

/// Nearest ANN anchor under D = ((t_a - t_s) / kappa)^2; ties break toward
/// the earlier anchor. Throws DataError when no anchor is admissible.
std::pair<TrackEstimate, double> nearest_ann(std::int64_t t_s,
                                             const std::vector<TrackEstimate>& ann_outputs,
                                             const TcfConfig& cfg);

/// Blend weight omega = (e^D - 1)/(e^D + 1), clamped into [0, 1).
double tcf_weight(double D);

/// omega * snn + (1 - omega) * ann, stamped at the SNN timestamp. At D = 0
/// the ANN bbox is returned bit-exactly.
TrackEstimate fuse(const TrackEstimate& snn_est, const TrackEstimate& ann_est, double D);

}  // namespace dashtrack::fusion
