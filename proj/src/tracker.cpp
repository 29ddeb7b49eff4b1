#include "dashtrack/tracker.hpp"

#include <algorithm>

namespace dashtrack::tracker {

void PipelineConfig::validate() const {
  if (snn_period_ns <= 0) throw ConfigError("pipeline.snn_period_ns must be > 0");
  if (snn_window_ns < 0) throw ConfigError("pipeline.snn_window_ns must be >= 0");
  tcf.validate();
  att.validate();
}

TrackResult run(const event_sim::DavisBundle& bundle, const snn::SnnNetwork& snn_net,
                const ann::AnnNetwork& ann_net, const PipelineConfig& cfg, Exec exec) {
  cfg.validate();
  if (bundle.aps.empty()) throw DataError("tracker: bundle has no frames");
  const int W = bundle.aps[0].width, H = bundle.aps[0].height;
  if (cfg.snn_period_ns < bundle.cfg.dt_e_ns)
    throw ConfigError("pipeline.snn_period_ns must be >= the event resolution dt_e");
  const int want_c = cfg.ann_attention ? 2 : 1;
  if (ann_net.in.c != want_c || ann_net.in.h != H || ann_net.in.w != W)
    throw ConfigError("frame net input shape does not match the bundle/attention setting");
  if (snn_net.in.c != 2 || snn_net.in.h != H || snn_net.in.w != W)
    throw ConfigError("spiking net input shape does not match the bundle");

  const std::int64_t t_first = bundle.aps.front().t_ns;
  std::int64_t t_end = bundle.aps.back().t_ns;
  if (!bundle.dvs.empty()) t_end = std::max(t_end, bundle.dvs.back().t_ns);

  TrackResult res;
  for (const auto& e : bundle.dvs)
    if (e.t_ns < t_first) ++res.dropped_events;

  // merged timeline: frames first on timestamp ties
  struct Item {
    std::int64_t t;
    int kind;  // 0 frame, 1 tick
    std::size_t index;
  };
  std::vector<Item> timeline;
  for (std::size_t i = 0; i < bundle.aps.size(); ++i)
    timeline.push_back({bundle.aps[i].t_ns, 0, i});
  const std::int64_t window = cfg.window_ns();
  for (std::int64_t k = 1;; ++k) {
    const std::int64_t t_s = t_first + k * cfg.snn_period_ns;
    if (t_s > t_end) break;
    timeline.push_back({t_s, 1, 0});
  }
  std::stable_sort(timeline.begin(), timeline.end(), [](const Item& a, const Item& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.kind < b.kind;
  });

  const net::TensorShape frame_shape{1, H, W};
  for (const auto& item : timeline) {
    if (item.kind == 0) {
      const Frame& frame = bundle.aps[item.index];
      std::vector<double> input;
      if (cfg.ann_attention) {
        auto prior = attention::nearest_prior(frame.t_ns, res.fused);
        // a wild fused estimate (off-sensor, negative extent) must not kill
        // the run: fall back to the uninformative whole-frame prior
        if (!prior.cold_start && !attention::usable_prior(prior.est, W, H))
          prior = attention::nearest_prior(frame.t_ns, {});
        const Frame mask = attention::build_mask(prior.est, W, H, cfg.att, exec);
        input = attention::apply_mask(frame.v, frame_shape, mask, exec);
      } else {
        input = frame.v;
      }
      const BBox pred = ann::ann_forward(ann_net, input, exec);
      res.ann.push_back({pred, frame.t_ns, Source::Ann});
    } else {
      const std::int64_t t_s = item.t;
      const std::int64_t t0 = t_s - window;
      const auto lo = std::lower_bound(
          bundle.dvs.begin(), bundle.dvs.end(), t0,
          [](const Event& e, std::int64_t t) { return e.t_ns < t; });
      const auto hi = std::lower_bound(
          lo, bundle.dvs.end(), t_s,
          [](const Event& e, std::int64_t t) { return e.t_ns < t; });
      if (lo == hi) continue;  // empty window: no SNN output
      const std::vector<Event> slice(lo, hi);
      const SpikeTensor input =
          snn::encode_events(slice, H, W, snn_net.time_window, t0, window);
      const BBox pred = snn::snn_forward(snn_net, input, exec);
      const TrackEstimate snn_est{pred, t_s, Source::Snn};
      res.snn.push_back(snn_est);
      if (res.ann.empty()) continue;  // cold start: raw SNN output only
      const auto [anchor, D] = fusion::nearest_ann(t_s, res.ann, cfg.tcf);
      res.fused.push_back(fusion::fuse(snn_est, anchor, D));
    }
  }
  return res;
}

std::pair<Trajectory, std::size_t> zero_order_hold(
    const Trajectory& ann_traj, const std::vector<std::int64_t>& query_times) {
  if (ann_traj.empty()) throw DataError("zero_order_hold: empty anchor trajectory");
  for (std::size_t i = 1; i < ann_traj.size(); ++i)
    if (ann_traj[i].t_ns < ann_traj[i - 1].t_ns)
      throw DataError("zero_order_hold: anchors not sorted");
  Trajectory out;
  out.reserve(query_times.size());
  std::size_t early = 0;
  for (const auto t : query_times) {
    // latest anchor with t_a <= t
    std::size_t idx = 0;
    bool found = false;
    for (std::size_t i = 0; i < ann_traj.size() && ann_traj[i].t_ns <= t; ++i) {
      idx = i;
      found = true;
    }
    if (!found) ++early;
    TrackEstimate est = ann_traj[idx];
    est.t_ns = t;
    out.push_back(est);
  }
  return {out, early};
}

}  // namespace dashtrack::tracker
