#include "dashtrack/synth.hpp"

#include "dashtrack/io.hpp"

#include <algorithm>
#include <cmath>

namespace dashtrack::synth {

void SynthConfig::validate() const {
  if (width <= 0 || height <= 0) throw ConfigError("synth: image dimensions must be positive");
  if (frames < 2) throw ConfigError("synth: need at least 2 frames");
  if (dt_f_ns <= 0) throw ConfigError("synth: frame interval must be positive");
  if (object_w <= 0 || object_h <= 0) throw ConfigError("synth: object size must be positive");
  if (foreground < 0 || foreground > 1 || background < 0 || background > 1)
    throw ConfigError("synth: brightness values must lie in [0,1]");
  if (distractors < 0) throw ConfigError("synth: distractor count must be nonnegative");
  if (texture < 0 || texture > 1) throw ConfigError("synth: texture amplitude must lie in [0,1]");
}

namespace {

// Overlap of pixel cell [i, i+1) with the interval [c-half, c+half].
double coverage_1d(int i, double c, double half) {
  const double lo = std::max(static_cast<double>(i), c - half);
  const double hi = std::min(static_cast<double>(i) + 1.0, c + half);
  return std::max(0.0, hi - lo);
}

void paint_square(Frame& f, double cx, double cy, double half_w, double half_h, double value) {
  const int x_lo = std::max(0, static_cast<int>(std::floor(cx - half_w)));
  const int x_hi = std::min(f.width - 1, static_cast<int>(std::ceil(cx + half_w)));
  const int y_lo = std::max(0, static_cast<int>(std::floor(cy - half_h)));
  const int y_hi = std::min(f.height - 1, static_cast<int>(std::ceil(cy + half_h)));
  for (int y = y_lo; y <= y_hi; ++y)
    for (int x = x_lo; x <= x_hi; ++x) {
      const double cov = coverage_1d(x, cx, half_w) * coverage_1d(y, cy, half_h);
      double& px = f.at(x, y);
      px = px * (1.0 - cov) + value * cov;
    }
}

}  // namespace

SynthDataset synth_sequence(const SynthConfig& cfg) {
  cfg.validate();
  const double hw = cfg.object_w / 2.0, hh = cfg.object_h / 2.0;

  // Static scene: background, texture, distractors. Rendered once so the
  // clutter is bitwise identical across frames (and hence event-silent).
  Frame base(cfg.width, cfg.height, cfg.t0_ns, cfg.background);
  Rng rng(Rng::substream(cfg.seed, 0xd15, 0));
  if (cfg.texture > 0)
    for (double& v : base.v) v = std::clamp(v + cfg.texture * rng.uniform(), 0.0, 1.0);
  for (int d = 0; d < cfg.distractors; ++d) {
    const double dx = hw + rng.uniform() * (cfg.width - 2 * hw);
    const double dy = hh + rng.uniform() * (cfg.height - 2 * hh);
    paint_square(base, dx, dy, hw, hh, cfg.foreground);
  }

  SynthDataset ds;
  ds.frames.reserve(cfg.frames);
  ds.timestamps.reserve(cfg.frames);
  ds.gt.reserve(cfg.frames);
  for (int k = 0; k < cfg.frames; ++k) {
    const double cx = cfg.x0 + cfg.vx * k;
    const double cy = cfg.y0 + cfg.vy * k;
    const std::int64_t t = cfg.t0_ns + static_cast<std::int64_t>(k) * cfg.dt_f_ns;
    Frame f = base;
    f.t_ns = t;
    paint_square(f, cx, cy, hw, hh, cfg.foreground);
    for (double& v : f.v) v = std::clamp(v, 0.0, 1.0);
    ds.frames.push_back(std::move(f));
    ds.timestamps.push_back(t);
    ds.gt.push_back({{cx / cfg.width, cy / cfg.height, cfg.object_w / cfg.width,
                      cfg.object_h / cfg.height},
                     t,
                     Source::Gt});
  }
  return ds;
}

void write_dataset(const std::filesystem::path& dir, const SynthDataset& ds) {
  io::write_frame_dir(dir, ds.frames);
  io::write_trajectory(dir / "gt.txt", ds.gt);
}

}  // namespace dashtrack::synth
