#include "dashtrack/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dashtrack::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw DataError("not a number: '" + s + "'");
  return v;
}

void ByteWriter::u16(std::uint16_t v) {
  bytes.push_back(static_cast<std::uint8_t>(v & 0xff));
  bytes.push_back(static_cast<std::uint8_t>(v >> 8));
}
void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}
void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}
void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
void ByteWriter::raw(const void* p, std::size_t n) {
  const auto* b = static_cast<const std::uint8_t*>(p);
  bytes.insert(bytes.end(), b, b + n);
}

std::uint8_t ByteReader::u8() {
  if (pos + 1 > n) throw DataError("truncated binary data");
  return p[pos++];
}
std::int8_t ByteReader::i8() { return static_cast<std::int8_t>(u8()); }
std::uint16_t ByteReader::u16() {
  std::uint16_t lo = u8(), hi = u8();
  return static_cast<std::uint16_t>(lo | (hi << 8));
}
std::uint32_t ByteReader::u32() {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
  return v;
}
std::uint64_t ByteReader::u64() {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
  return v;
}
float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }
void ByteReader::raw(void* dst, std::size_t count) {
  if (pos + count > n) throw DataError("truncated binary data");
  std::memcpy(dst, p + pos, count);
  pos += count;
}

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("short write to " + path.string());
}

std::string read_file_text(const fs::path& path) {
  auto b = read_file_bytes(path);
  return std::string(b.begin(), b.end());
}

void write_file_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
  if (!f) throw DataError("short write to " + path.string());
}

void write_pgm(const fs::path& path, const Frame& frame) {
  std::vector<std::uint8_t> bytes;
  std::string header =
      "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) + "\n255\n";
  bytes.insert(bytes.end(), header.begin(), header.end());
  bytes.reserve(bytes.size() + frame.v.size());
  for (double x : frame.v) {
    const double c = std::clamp(x, 0.0, 1.0);
    bytes.push_back(static_cast<std::uint8_t>(std::lround(c * 255.0)));
  }
  write_file_bytes(path, bytes);
}

namespace {

int pgm_token(ByteReader& r, const fs::path& path) {
  // skip whitespace and '#' comments
  for (;;) {
    if (r.done()) throw DataError("truncated pgm header: " + path.string());
    const char c = static_cast<char>(r.p[r.pos]);
    if (c == '#') {
      while (!r.done() && r.p[r.pos] != '\n') ++r.pos;
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++r.pos;
    } else {
      break;
    }
  }
  int v = 0;
  bool any = false;
  while (!r.done() && r.p[r.pos] >= '0' && r.p[r.pos] <= '9') {
    v = v * 10 + (r.p[r.pos] - '0');
    ++r.pos;
    any = true;
  }
  if (!any) throw DataError("bad pgm header: " + path.string());
  return v;
}

}  // namespace

Frame read_pgm(const fs::path& path) {
  auto bytes = read_file_bytes(path);
  ByteReader r{bytes.data(), bytes.size(), 0};
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw DataError("not a P5 graymap: " + path.string());
  r.pos = 2;
  const int w = pgm_token(r, path);
  const int h = pgm_token(r, path);
  const int maxv = pgm_token(r, path);
  if (w <= 0 || h <= 0 || maxv <= 0 || maxv > 255)
    throw DataError("unsupported pgm dimensions in " + path.string());
  ++r.pos;  // single whitespace after maxval
  Frame f(w, h, 0);
  if (r.pos + f.size() > bytes.size()) throw DataError("truncated pgm data: " + path.string());
  for (std::size_t i = 0; i < f.size(); ++i)
    f.v[i] = static_cast<double>(bytes[r.pos + i]) / maxv;
  return f;
}

void write_timestamps(const fs::path& path, const std::vector<std::int64_t>& ts) {
  std::string out;
  for (auto t : ts) {
    out += std::to_string(t);
    out += '\n';
  }
  write_file_text(path, out);
}

std::vector<std::int64_t> read_timestamps(const fs::path& path) {
  std::istringstream in(read_file_text(path));
  std::vector<std::int64_t> ts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ts.push_back(std::stoll(line));
  }
  return ts;
}

namespace {

std::string frame_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06zu.pgm", i);
  return buf;
}

}  // namespace

void write_frame_dir(const fs::path& dir, const std::vector<Frame>& frames) {
  fs::create_directories(dir);
  std::vector<std::int64_t> ts;
  ts.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    write_pgm(dir / frame_name(i), frames[i]);
    ts.push_back(frames[i].t_ns);
  }
  write_timestamps(dir / "timestamps.txt", ts);
}

std::vector<Frame> read_frame_dir(const fs::path& dir) {
  const auto ts = read_timestamps(dir / "timestamps.txt");
  std::vector<Frame> frames;
  frames.reserve(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto path = dir / frame_name(i);
    Frame f = read_pgm(path);
    f.t_ns = ts[i];
    frames.push_back(std::move(f));
  }
  if (frames.empty()) throw DataError("no frames listed in " + (dir / "timestamps.txt").string());
  return frames;
}

void write_events(const fs::path& path, const EventFileHeader& hdr,
                  const std::vector<Event>& events) {
  ByteWriter w;
  w.raw("DVS1", 4);
  w.u16(hdr.width);
  w.u16(hdr.height);
  w.u32(hdr.dt_e_ns);
  w.u32(0);  // reserved
  for (const auto& e : events) {
    w.u16(e.x);
    w.u16(e.y);
    w.i8(e.p);
    w.u8(0);
    w.u8(0);
    w.u8(0);
    w.u64(static_cast<std::uint64_t>(e.t_ns));
  }
  write_file_bytes(path, w.bytes);
}

std::pair<EventFileHeader, std::vector<Event>> read_events(const fs::path& path) {
  auto bytes = read_file_bytes(path);
  ByteReader r{bytes.data(), bytes.size(), 0};
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, "DVS1", 4) != 0)
    throw DataError("bad event file magic in " + path.string());
  EventFileHeader hdr;
  hdr.width = r.u16();
  hdr.height = r.u16();
  hdr.dt_e_ns = r.u32();
  r.u32();  // reserved
  if ((bytes.size() - 16) % 16 != 0)
    throw DataError("event file not a whole number of records: " + path.string());
  std::vector<Event> events;
  events.reserve((bytes.size() - 16) / 16);
  while (!r.done()) {
    Event e;
    e.x = r.u16();
    e.y = r.u16();
    e.p = r.i8();
    r.u8();
    r.u8();
    r.u8();
    e.t_ns = static_cast<std::int64_t>(r.u64());
    events.push_back(e);
  }
  return {hdr, std::move(events)};
}

void write_trajectory(const fs::path& path, const Trajectory& traj) {
  std::string out;
  for (const auto& e : traj) {
    out += std::to_string(e.t_ns);
    out += ' ';
    out += to_string(e.source);
    for (double v : {e.bbox.x, e.bbox.y, e.bbox.w, e.bbox.h}) {
      out += ' ';
      out += format_double(v);
    }
    out += '\n';
  }
  write_file_text(path, out);
}

Trajectory read_trajectory(const fs::path& path) {
  std::istringstream in(read_file_text(path));
  Trajectory traj;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string t_str, src_str, f[4];
    if (!(ls >> t_str >> src_str >> f[0] >> f[1] >> f[2] >> f[3])) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected 't source x y w h'");
    }
    std::string extra;
    if (ls >> extra)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": trailing fields");
    TrackEstimate e;
    try {
      e.t_ns = std::stoll(t_str);
      e.source = source_from_string(src_str);
      e.bbox = {parse_double(f[0]), parse_double(f[1]), parse_double(f[2]), parse_double(f[3])};
    } catch (const std::exception& ex) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
    traj.push_back(e);
  }
  return traj;
}

}  // namespace dashtrack::io
