#include "dashtrack/event_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dashtrack/io.hpp"

namespace dashtrack::event_sim {

void SimConfig::validate() const {
  if (!(theta > 0)) throw ConfigError("sim.theta must be > 0");
  if (dt_e_ns <= 0) throw ConfigError("sim.dt_e_ns must be > 0");
  if (m < 1) throw ConfigError("sim.m must be >= 1");
  if (dt_f_ns <= 0 || dt_f_ns % (static_cast<std::int64_t>(m) * dt_e_ns) != 0)
    throw ConfigError("sim.dt_f_ns must be a positive multiple of m * dt_e_ns");
}

std::vector<double> brightness_delta(const Frame& prev, const Frame& next) {
  if (!prev.same_shape(next)) throw DataError("brightness_delta: frame shape mismatch");
  std::vector<double> d(prev.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = next.v[i] - prev.v[i];
  return d;
}

int polarity(double delta, double theta) {
  const int e_hi = (delta - theta) > 0 ? 1 : 0;
  const int e_lo = (delta + theta) > 0 ? 1 : 0;
  return e_hi + e_lo - 1;
}

int event_count(double accumulated_delta, double theta) {
  // 1e-9 relative guard: e.g. |-0.6| / 0.2 evaluates to 2.999...96 in binary
  // floating point but must count as 3 crossings.
  return static_cast<int>(std::floor(std::abs(accumulated_delta) / theta + 1e-9));
}

std::vector<std::int64_t> jitter_timestamps(int count, std::int64_t t_f,
                                            const SimConfig& cfg, Rng& rng) {
  const std::int64_t slots = cfg.jitter_slots();
  std::vector<std::int64_t> ts(static_cast<std::size_t>(std::max(count, 0)));
  for (auto& t : ts) {
    auto slot = static_cast<std::int64_t>(rng.uniform() * static_cast<double>(slots));
    slot = std::min(slot, slots - 1);  // guard the half-open upper bound
    t = t_f + slot * cfg.dt_e_ns;
  }
  return ts;
}

DavisBundle simulate(const std::vector<Frame>& frames, const SimConfig& cfg, Exec exec) {
  cfg.validate();
  if (frames.size() < 2) throw DataError("simulate: need at least 2 frames");
  const int w = frames[0].width, h = frames[0].height;
  if (w <= 0 || h <= 0 || w > 0xffff || h > 0xffff)
    throw DataError("simulate: frame dimensions out of range");
  const std::int64_t sub_dt = cfg.sub_dt_ns();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (!frames[i].same_shape(frames[0]))
      throw DataError("simulate: frame dimension drift at index " + std::to_string(i));
    if (i > 0 && frames[i].t_ns - frames[i - 1].t_ns != sub_dt)
      throw DataError("simulate: frame spacing != dt_f/m at index " + std::to_string(i));
  }
  if (frames[0].t_ns % cfg.dt_e_ns != 0)
    throw DataError("simulate: first frame timestamp not a multiple of dt_e");

  const int n_sub = static_cast<int>(frames.size()) - 1;
  const std::size_t n_px = static_cast<std::size_t>(w) * h;

  // Each pixel owns an independent RNG substream and walks the sub-intervals
  // in order, so the emitted set is identical under any schedule; events are
  // gathered per pixel and merged afterwards.
  std::vector<std::vector<Event>> per_pixel(n_px);
  par_for(static_cast<int>(n_px), exec, [&](int px) {
    const auto x = static_cast<std::uint16_t>(px % w);
    const auto y = static_cast<std::uint16_t>(px / w);
    Rng rng(Rng::substream(cfg.seed, static_cast<std::uint64_t>(px), 0));
    double acc = 0.0;
    auto& out = per_pixel[px];
    for (int i = 0; i < n_sub; ++i) {
      acc += frames[i + 1].v[px] - frames[i].v[px];
      const int count = event_count(acc, cfg.theta);
      if (count == 0) continue;
      const auto p = static_cast<std::int8_t>(acc > 0 ? 1 : -1);
      acc -= p * cfg.theta * count;
      const auto ts = jitter_timestamps(count, frames[i].t_ns, cfg, rng);
      for (auto t : ts) out.push_back(Event{x, y, p, t});
    }
  });

  DavisBundle bundle;
  bundle.cfg = cfg;
  std::size_t total = 0;
  for (const auto& v : per_pixel) total += v.size();
  bundle.dvs.reserve(total);
  for (const auto& v : per_pixel) bundle.dvs.insert(bundle.dvs.end(), v.begin(), v.end());
  std::sort(bundle.dvs.begin(), bundle.dvs.end(), event_order);

  for (std::size_t i = 0; i < frames.size(); i += cfg.m) bundle.aps.push_back(frames[i]);
  return bundle;
}

std::vector<Frame> reconstruct_frames(const Frame& base, const std::vector<Event>& events,
                                      double theta, const std::vector<std::int64_t>& query_times) {
  if (!(theta > 0)) throw ConfigError("reconstruct_frames: theta must be > 0");
  std::vector<Frame> out;
  out.reserve(query_times.size());
  std::vector<double> sum(base.size(), 0.0);
  std::size_t e = 0;
  std::int64_t prev_t = std::numeric_limits<std::int64_t>::min();
  for (auto t : query_times) {
    if (t < prev_t) throw DataError("reconstruct_frames: query times must be ascending");
    prev_t = t;
    while (e < events.size() && events[e].t_ns < t) {
      const auto& ev = events[e];
      sum[static_cast<std::size_t>(ev.y) * base.width + ev.x] += ev.p;
      ++e;
    }
    Frame f(base.width, base.height, t);
    for (std::size_t i = 0; i < f.size(); ++i)
      f.v[i] = std::clamp(base.v[i] + theta * sum[i], 0.0, 1.0);
    out.push_back(std::move(f));
  }
  return out;
}

void write_bundle(const std::filesystem::path& dir, const DavisBundle& bundle) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  int w = 0, h = 0;
  if (!bundle.aps.empty()) {
    w = bundle.aps[0].width;
    h = bundle.aps[0].height;
  }
  io::EventFileHeader hdr{static_cast<std::uint16_t>(w), static_cast<std::uint16_t>(h),
                          static_cast<std::uint32_t>(bundle.cfg.dt_e_ns)};
  io::write_events(dir / "events.bin", hdr, bundle.dvs);
  io::write_frame_dir(dir / "aps", bundle.aps);
  std::string meta;
  meta += "theta " + io::format_double(bundle.cfg.theta) + "\n";
  meta += "dt_e_ns " + std::to_string(bundle.cfg.dt_e_ns) + "\n";
  meta += "dt_f_ns " + std::to_string(bundle.cfg.dt_f_ns) + "\n";
  meta += "m " + std::to_string(bundle.cfg.m) + "\n";
  meta += "seed " + std::to_string(bundle.cfg.seed) + "\n";
  io::write_file_text(dir / "meta.txt", meta);
}

DavisBundle read_bundle(const std::filesystem::path& dir) {
  DavisBundle bundle;
  auto [hdr, events] = io::read_events(dir / "events.bin");
  bundle.dvs = std::move(events);
  bundle.aps = io::read_frame_dir(dir / "aps");
  std::istringstream meta(io::read_file_text(dir / "meta.txt"));
  std::string key, value;
  while (meta >> key >> value) {
    if (key == "theta") bundle.cfg.theta = io::parse_double(value);
    else if (key == "dt_e_ns") bundle.cfg.dt_e_ns = std::stoll(value);
    else if (key == "dt_f_ns") bundle.cfg.dt_f_ns = std::stoll(value);
    else if (key == "m") bundle.cfg.m = std::stoi(value);
    else if (key == "seed") bundle.cfg.seed = std::stoull(value);
    else throw DataError("bundle meta: unknown key '" + key + "'");
  }
  if (bundle.cfg.dt_e_ns != static_cast<std::int64_t>(hdr.dt_e_ns))
    throw DataError("bundle meta dt_e_ns disagrees with event file header");
  bundle.cfg.validate();
  return bundle;
}

}  // namespace dashtrack::event_sim
