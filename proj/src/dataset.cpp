#include "dashtrack/dataset.hpp"

#include "dashtrack/attention.hpp"
#include "dashtrack/eval.hpp"

#include <algorithm>

namespace dashtrack::dataset {

std::vector<snn::SnnSample> snn_samples(const event_sim::DavisBundle& bundle,
                                        const Trajectory& gt,
                                        const tracker::PipelineConfig& pipe, int T) {
  pipe.validate();
  if (bundle.aps.empty()) throw DataError("snn_samples: bundle has no frames");
  if (gt.empty()) throw DataError("snn_samples: empty ground truth");
  const int height = bundle.aps.front().height;
  const int width = bundle.aps.front().width;
  const std::int64_t t_first = bundle.aps.front().t_ns;
  std::int64_t t_end = bundle.aps.back().t_ns;
  if (!bundle.dvs.empty()) t_end = std::max(t_end, bundle.dvs.back().t_ns);
  const std::int64_t window = pipe.window_ns();

  std::vector<snn::SnnSample> out;
  for (std::int64_t t = t_first + pipe.snn_period_ns; t <= t_end; t += pipe.snn_period_ns) {
    const std::int64_t t0 = t - window;
    auto lo = std::lower_bound(bundle.dvs.begin(), bundle.dvs.end(), t0,
                               [](const Event& e, std::int64_t v) { return e.t_ns < v; });
    auto hi = std::lower_bound(lo, bundle.dvs.end(), t,
                               [](const Event& e, std::int64_t v) { return e.t_ns < v; });
    if (lo == hi) continue;
    std::vector<Event> span(lo, hi);
    out.push_back({snn::encode_events(span, height, width, T, t0, window),
                   eval::interp_gt(gt, t)});
  }
  return out;
}

std::vector<ann::AnnSample> ann_samples(const std::vector<Frame>& frames, const Trajectory& gt,
                                        const tracker::PipelineConfig& pipe,
                                        std::uint64_t seed) {
  pipe.validate();
  if (frames.empty()) throw DataError("ann_samples: no frames");
  if (gt.empty()) throw DataError("ann_samples: empty ground truth");
  const int height = frames.front().height;
  const int width = frames.front().width;
  const net::TensorShape shape{1, height, width};

  Rng rng(Rng::substream(seed, 0xa069, 0));
  std::vector<ann::AnnSample> out;
  out.reserve(frames.size());
  for (const Frame& f : frames) {
    const BBox label = eval::interp_gt(gt, f.t_ns);
    ann::AnnSample s;
    s.gt = label;
    if (pipe.ann_attention) {
      const BBox prior = attention::augment_label(label, rng, pipe.att);
      // a wild augmented prior (negative extent, off-sensor center) degrades
      // to the uninformative whole-frame mask, mirroring the tracker
      TrackEstimate est{prior, f.t_ns, Source::Gt};
      if (!attention::usable_prior(est, width, height))
        est = attention::nearest_prior(f.t_ns, {}).est;
      const Frame mask = attention::build_mask(est, width, height, pipe.att);
      s.input = attention::apply_mask(f.v, shape, mask);
    } else {
      s.input = f.v;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace dashtrack::dataset
