#pragma once

#include "dashtrack/ann.hpp"
#include "dashtrack/snn.hpp"
#include "dashtrack/types.hpp"

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

namespace dashtrack::eval {

/// Intersection over union of center-format boxes; negative extents clamp to
/// zero, and an empty union yields 0.
double iou(const BBox& a, const BBox& b);

/// Ground truth at an arbitrary time: linear interpolation between labels,
/// clamped to the first/last label outside the covered range.
BBox interp_gt(const Trajectory& gt, std::int64_t t);

double miou(const Trajectory& traj, const Trajectory& gt);

struct SuccessCurve {
  std::vector<double> thresholds;  // 101 uniform points over [0,1]
  std::vector<double> rates;       // fraction of samples with IOU > threshold
};

std::pair<SuccessCurve, double> success_auc(const Trajectory& traj, const Trajectory& gt,
                                            double threshold = 0.5);

/// Fraction of samples with IOU strictly below fail_threshold (lower=better).
double robustness(const Trajectory& traj, const Trajectory& gt, double fail_threshold = 0.1);

/// Frame-sequence fidelity. PSNR = 20*log10(1/RMSE), +inf when RMSE is 0.
std::pair<double, double> rmse_psnr(const std::vector<Frame>& sim,
                                    const std::vector<Frame>& ref);

/// Add/multiply accounting for one inference (averaged over the input set
/// for the spiking net, whose work is activity-dependent).
struct OpCount {
  double adds = 0, muls = 0;          // grand totals
  double synaptic_adds = 0;           // spiking layers: one add per spike*synapse
  double synaptic_muls = 0;           // spiking layers: identically zero
  double decay_muls = 0;              // one mul per neuron per timestep
  double decode_adds = 0, decode_muls = 0;
};

/// Spiking net: synaptic input is event-driven additions only; membrane
/// decay costs one multiply per neuron per step; the decode head is dense.
/// Pooling and threshold/reset logic are uncounted.
OpCount op_count(const snn::SnnNetwork& net, const std::vector<SpikeTensor>& inputs);

/// Frame net: one multiply and one add per weight application, bias folded
/// into the additions; pooling and ReLU are uncounted. Input-independent.
OpCount op_count(const ann::AnnNetwork& net);

struct TrackMetrics {
  double miou = 0, mauc = 0, rb = 0;
  std::size_t samples = 0;
};

TrackMetrics track_metrics(const Trajectory& traj, const Trajectory& gt,
                           double auc_threshold = 0.5, double rb_threshold = 0.1);

void write_success_csv(const std::filesystem::path& path, const SuccessCurve& curve);

}  // namespace dashtrack::eval
