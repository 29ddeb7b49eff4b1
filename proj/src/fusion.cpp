#include "dashtrack/fusion.hpp"

#include <cmath>
#include <limits>

namespace dashtrack::fusion {

void TcfConfig::validate() const {
  if (kappa_ns <= 0) throw ConfigError("tcf.kappa_ns must be > 0");
}

std::pair<TrackEstimate, double> nearest_ann(std::int64_t t_s,
                                             const std::vector<TrackEstimate>& ann_outputs,
                                             const TcfConfig& cfg) {
  cfg.validate();
  const TrackEstimate* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& est : ann_outputs) {
    if (cfg.causal && est.t_ns > t_s) continue;
    const double dt = static_cast<double>(est.t_ns - t_s) / static_cast<double>(cfg.kappa_ns);
    const double d = dt * dt;
    // strict < keeps the earlier anchor on ties (inputs are time-ordered)
    if (d < best_d || (d == best_d && best && est.t_ns < best->t_ns)) {
      best_d = d;
      best = &est;
    }
  }
  if (!best) throw DataError("nearest_ann: no anchor available yet");
  return {*best, best_d};
}

double tcf_weight(double D) {
  if (!(D >= 0)) throw NumericError("tcf_weight: D must be >= 0");
  // exp overflows near D ~ 709; the weight is indistinguishable from 1 long
  // before that, so saturate to the largest double below 1.
  if (D > 700.0) return std::nextafter(1.0, 0.0);
  const double e = std::exp(D);
  const double w = (e - 1.0) / (e + 1.0);
  return std::min(w, std::nextafter(1.0, 0.0));
}

TrackEstimate fuse(const TrackEstimate& snn_est, const TrackEstimate& ann_est, double D) {
  const double w = tcf_weight(D);
  TrackEstimate out;
  out.t_ns = snn_est.t_ns;
  out.source = Source::Fused;
  if (w == 0.0) {
    out.bbox = ann_est.bbox;  // bit-exact pass-through at D = 0
    return out;
  }
  out.bbox.x = w * snn_est.bbox.x + (1.0 - w) * ann_est.bbox.x;
  out.bbox.y = w * snn_est.bbox.y + (1.0 - w) * ann_est.bbox.y;
  out.bbox.w = w * snn_est.bbox.w + (1.0 - w) * ann_est.bbox.w;
  out.bbox.h = w * snn_est.bbox.h + (1.0 - w) * ann_est.bbox.h;
  return out;
}

}  // namespace dashtrack::fusion
