#include "dashtrack/dataset.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dashtrack/attention.hpp"
#include "dashtrack/eval.hpp"
#include "dashtrack/rng.hpp"

using namespace dashtrack;

namespace {

// Tiny 8x8 bundle: frames at the given times, events supplied by the caller.
event_sim::DavisBundle make_bundle(const std::vector<std::int64_t>& frame_ts,
                                   std::vector<Event> events) {
  event_sim::DavisBundle b;
  b.cfg.theta = 0.1;
  b.cfg.dt_e_ns = 100;
  b.cfg.dt_f_ns = frame_ts.size() > 1 ? frame_ts[1] - frame_ts[0] : 10'000;
  for (std::size_t i = 0; i < frame_ts.size(); ++i) {
    Frame f(8, 8, frame_ts[i]);
    for (std::size_t j = 0; j < f.v.size(); ++j) f.v[j] = 0.1 + 0.005 * ((j + 3 * i) % 7);
    b.aps.push_back(std::move(f));
  }
  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b2) { return event_order(a, b2); });
  b.dvs = std::move(events);
  return b;
}

Event ev(std::int64_t t, int x, int y, int p) {
  return {static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y),
          static_cast<std::int8_t>(p), t};
}

Trajectory two_point_gt(std::int64_t t0, std::int64_t t1) {
  return {{{0.2, 0.3, 0.25, 0.25}, t0, Source::Gt}, {{0.6, 0.5, 0.25, 0.25}, t1, Source::Gt}};
}

}  // namespace

TEST_CASE("snn_samples mirrors the tick schedule and labels window ends") {
  tracker::PipelineConfig pipe;
  pipe.snn_period_ns = 2'000;
  // frames at 0 and 10000; ticks at 2k, 4k, ..., 10k
  std::vector<Event> events;
  for (int k = 0; k < 5; ++k) {
    // two events inside each window except the third (6000..8000 stays empty)
    if (k == 3) continue;
    const std::int64_t t0 = 2'000 * k;
    events.push_back(ev(t0 + 500, k, (2 * k) % 8, 1));
    events.push_back(ev(t0 + 1'500, (k + 3) % 8, k, -1));
  }
  const auto bundle = make_bundle({0, 10'000}, events);
  const auto gt = two_point_gt(0, 10'000);

  const int T = 4;
  const auto samples = dataset::snn_samples(bundle, gt, pipe, T);
  REQUIRE(samples.size() == 4);  // 5 ticks minus the empty window

  // each sample encodes exactly the window slice, labeled at the window end
  std::size_t si = 0;
  for (int k = 1; k <= 5; ++k) {
    if (k == 4) continue;  // tick whose window [6000, 8000) was empty
    const std::int64_t t = 2'000 * k;
    std::vector<Event> span;
    for (const auto& e : bundle.dvs)
      if (e.t_ns >= t - 2'000 && e.t_ns < t) span.push_back(e);
    const auto direct = snn::encode_events(span, 8, 8, T, t - 2'000, 2'000);
    CHECK(samples[si].input.v == direct.v);
    const BBox want = eval::interp_gt(gt, t);
    CHECK(samples[si].gt == want);
    ++si;
  }

  // spike totals match the injected events (all distinct cells, in window)
  std::size_t total = 0;
  for (const auto& s : samples) total += s.input.spike_count();
  CHECK(total == events.size());
}

TEST_CASE("snn_samples rejects empty inputs") {
  tracker::PipelineConfig pipe;
  const auto bundle = make_bundle({0, 10'000}, {ev(500, 1, 1, 1)});
  CHECK_THROWS_AS(dataset::snn_samples({}, two_point_gt(0, 1), pipe, 4), DataError);
  CHECK_THROWS_AS(dataset::snn_samples(bundle, {}, pipe, 4), DataError);
}

TEST_CASE("ann_samples without attention passes raw frames with interpolated labels") {
  tracker::PipelineConfig pipe;
  pipe.ann_attention = false;
  const auto bundle = make_bundle({0, 10'000, 20'000}, {});
  const auto gt = two_point_gt(0, 20'000);

  const auto samples = dataset::ann_samples(bundle.aps, gt, pipe, 99);
  REQUIRE(samples.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(samples[i].input == bundle.aps[i].v);
    CHECK(samples[i].gt == eval::interp_gt(gt, bundle.aps[i].t_ns));
  }
}

TEST_CASE("ann_samples with attention masks with the augmented label") {
  tracker::PipelineConfig pipe;
  pipe.ann_attention = true;
  const auto bundle = make_bundle({0, 10'000, 20'000, 30'000}, {});
  const auto gt = two_point_gt(0, 30'000);
  const std::uint64_t seed = 7;

  const auto samples = dataset::ann_samples(bundle.aps, gt, pipe, seed);
  REQUIRE(samples.size() == 4);

  // replicate the augmentation stream: one augment_label call per frame
  Rng rng(Rng::substream(seed, 0xa069, 0));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    REQUIRE(s.input.size() == 2 * 64);
    // first channel is the untouched frame
    CHECK(std::equal(s.input.begin(), s.input.begin() + 64, bundle.aps[i].v.begin()));

    const BBox label = eval::interp_gt(gt, bundle.aps[i].t_ns);
    CHECK(s.gt == label);
    const BBox prior = attention::augment_label(label, rng, pipe.att);
    TrackEstimate est{prior, bundle.aps[i].t_ns, Source::Gt};
    REQUIRE(attention::usable_prior(est, 8, 8));  // mild noise stays usable
    const Frame mask = attention::build_mask(est, 8, 8, pipe.att);
    for (int j = 0; j < 64; ++j) CHECK(s.input[64 + j] == bundle.aps[i].v[j] * mask.v[j]);
  }

  // deterministic for a fixed seed, different under another
  CHECK(dataset::ann_samples(bundle.aps, gt, pipe, seed)[1].input == samples[1].input);
  CHECK(dataset::ann_samples(bundle.aps, gt, pipe, seed + 1)[1].input != samples[1].input);
}

TEST_CASE("ann_samples degrades wild augmented priors to the whole-frame mask") {
  tracker::PipelineConfig pipe;
  pipe.ann_attention = true;
  pipe.att.beta_sigma = 1e6;  // essentially every augmented box is unusable
  const auto bundle = make_bundle({0, 10'000, 20'000}, {});
  const auto gt = two_point_gt(0, 20'000);
  const std::uint64_t seed = 3;

  const auto samples = dataset::ann_samples(bundle.aps, gt, pipe, seed);
  REQUIRE(samples.size() == 3);

  Rng rng(Rng::substream(seed, 0xa069, 0));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const BBox label = eval::interp_gt(gt, bundle.aps[i].t_ns);
    const BBox prior = attention::augment_label(label, rng, pipe.att);
    TrackEstimate est{prior, bundle.aps[i].t_ns, Source::Gt};
    if (!attention::usable_prior(est, 8, 8))
      est = attention::nearest_prior(bundle.aps[i].t_ns, {}).est;
    const Frame mask = attention::build_mask(est, 8, 8, pipe.att);
    for (int j = 0; j < 64; ++j)
      CHECK(samples[i].input[64 + j] == bundle.aps[i].v[j] * mask.v[j]);
  }
}

TEST_CASE("ann_samples rejects empty inputs") {
  tracker::PipelineConfig pipe;
  const auto bundle = make_bundle({0, 10'000}, {});
  CHECK_THROWS_AS(dataset::ann_samples({}, two_point_gt(0, 1), pipe, 1), DataError);
  CHECK_THROWS_AS(dataset::ann_samples(bundle.aps, {}, pipe, 1), DataError);
}
