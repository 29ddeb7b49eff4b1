#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dashtrack {

// Error categories, mapped to CLI exit codes (config=2, data=3, numeric=4).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Timestamped grayscale intensity grid, values in [0,1], row-major.
struct Frame {
  int width = 0;
  int height = 0;
  std::int64_t t_ns = 0;
  std::vector<double> v;

  Frame() = default;
  Frame(int w, int h, std::int64_t t, double fill = 0.0)
      : width(w), height(h), t_ns(t), v(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return v[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return v[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return v.size(); }
  bool same_shape(const Frame& o) const { return width == o.width && height == o.height; }
};

/// One DVS spike record.
struct Event {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int8_t p = 0;  // polarity, -1 or +1
  std::int64_t t_ns = 0;

  bool operator==(const Event&) const = default;
};

inline bool event_order(const Event& a, const Event& b) {
  if (a.t_ns != b.t_ns) return a.t_ns < b.t_ns;
  if (a.y != b.y) return a.y < b.y;
  if (a.x != b.x) return a.x < b.x;
  return a.p < b.p;
}

/// Center-format box [x, y, w, h] in normalized image coordinates.
struct BBox {
  double x = 0, y = 0, w = 0, h = 0;

  bool operator==(const BBox&) const = default;
};

enum class Source : std::uint8_t { Ann, Snn, Fused, Gt };

std::string to_string(Source s);
Source source_from_string(const std::string& s);

struct TrackEstimate {
  BBox bbox;
  std::int64_t t_ns = 0;
  Source source = Source::Ann;
};

/// Timestamp-ordered sequence of estimates from one source.
using Trajectory = std::vector<TrackEstimate>;

/// Binary spike activations over (timestep, channel, row, col).
struct SpikeTensor {
  int t = 0, c = 0, h = 0, w = 0;
  std::vector<std::uint8_t> v;  // strictly 0/1

  SpikeTensor() = default;
  SpikeTensor(int t_, int c_, int h_, int w_)
      : t(t_), c(c_), h(h_), w(w_),
        v(static_cast<std::size_t>(t_) * c_ * h_ * w_, 0) {}

  std::size_t idx(int ti, int ci, int yi, int xi) const {
    return ((static_cast<std::size_t>(ti) * c + ci) * h + yi) * w + xi;
  }
  std::uint8_t& at(int ti, int ci, int yi, int xi) { return v[idx(ti, ci, yi, xi)]; }
  std::uint8_t at(int ti, int ci, int yi, int xi) const { return v[idx(ti, ci, yi, xi)]; }
  std::size_t spike_count() const {
    std::size_t n = 0;
    for (auto b : v) n += b;
    return n;
  }
};

}  // namespace dashtrack
