#pragma once

#include "dashtrack/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dashtrack::io {

/// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double v);
double parse_double(const std::string& s);

// Little-endian byte serialization helpers.
struct ByteWriter {
  std::vector<std::uint8_t> bytes;
  void u8(std::uint8_t v) { bytes.push_back(v); }
  void i8(std::int8_t v) { bytes.push_back(static_cast<std::uint8_t>(v)); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  void raw(const void* p, std::size_t n);
};

struct ByteReader {
  const std::uint8_t* p = nullptr;
  std::size_t n = 0;
  std::size_t pos = 0;
  std::uint8_t u8();
  std::int8_t i8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  void raw(void* dst, std::size_t count);
  bool done() const { return pos == n; }
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::string read_file_text(const std::filesystem::path& path);
void write_file_text(const std::filesystem::path& path, const std::string& text);

// Binary portable graymap (P5, maxval 255). Intensities quantize to k/255.
void write_pgm(const std::filesystem::path& path, const Frame& frame);
Frame read_pgm(const std::filesystem::path& path);

// Sidecar timestamp index: one ns value per line.
void write_timestamps(const std::filesystem::path& path, const std::vector<std::int64_t>& ts);
std::vector<std::int64_t> read_timestamps(const std::filesystem::path& path);

/// A frame directory: frame_%06d.pgm plus timestamps.txt.
void write_frame_dir(const std::filesystem::path& dir, const std::vector<Frame>& frames);
std::vector<Frame> read_frame_dir(const std::filesystem::path& dir);

// Event file, bit-exact little-endian. 16-byte header: magic "DVS1",
// width u16, height u16, dt_e_ns u32, reserved u32. Then 16-byte records:
// x u16, y u16, p i8, 3 pad bytes, t_ns u64.
struct EventFileHeader {
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint32_t dt_e_ns = 0;
};
void write_events(const std::filesystem::path& path, const EventFileHeader& hdr,
                  const std::vector<Event>& events);
std::pair<EventFileHeader, std::vector<Event>> read_events(const std::filesystem::path& path);

// Trajectory text: one record per line, "t_ns source x y w h", decimal.
void write_trajectory(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory(const std::filesystem::path& path);

}  // namespace dashtrack::io
