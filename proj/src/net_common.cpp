#include "dashtrack/net_common.hpp"

#include <charconv>
#include <cstring>

#include "dashtrack/io.hpp"

namespace dashtrack::net {

namespace {

int parse_int(const char*& p, const char* end, const std::string& tok) {
  int v = 0;
  auto res = std::from_chars(p, end, v);
  if (res.ec != std::errc{} || v <= 0)
    throw ConfigError("bad arch token '" + tok + "': expected a positive integer");
  p = res.ptr;
  return v;
}

}  // namespace

std::vector<LayerSpec> parse_arch(const std::string& s) {
  std::string body = s;
  if (body.rfind("Input-", 0) == 0) body = body.substr(6);
  if (body.empty()) throw ConfigError("empty architecture string");
  std::vector<LayerSpec> specs;
  std::size_t start = 0;
  while (start <= body.size()) {
    const std::size_t dash = body.find('-', start);
    const std::string tok =
        body.substr(start, dash == std::string::npos ? std::string::npos : dash - start);
    start = dash == std::string::npos ? body.size() + 1 : dash + 1;
    if (tok.empty()) throw ConfigError("empty arch token in '" + s + "'");
    const char* p = tok.data();
    const char* end = tok.data() + tok.size();
    LayerSpec spec;
    if (tok.rfind("MP", 0) == 0) {
      p += 2;
      spec.kind = LayerKind::MaxPool;
      spec.pool = parse_int(p, end, tok);
    } else if (tok.rfind("FC", 0) == 0) {
      p += 2;
      spec.kind = LayerKind::Fc;
      spec.n_out = parse_int(p, end, tok);
    } else {
      spec.kind = LayerKind::Conv;
      spec.out_ch = parse_int(p, end, tok);
      if (p == end || *p != 'C') throw ConfigError("bad arch token '" + tok + "'");
      ++p;
      spec.k = parse_int(p, end, tok);
      if (p != end) {
        if (*p != 'S') throw ConfigError("bad arch token '" + tok + "'");
        ++p;
        spec.stride = parse_int(p, end, tok);
      }
    }
    if (p != end) throw ConfigError("trailing characters in arch token '" + tok + "'");
    specs.push_back(spec);
  }
  return specs;
}

std::string arch_to_string(const std::vector<LayerSpec>& specs) {
  std::string s;
  for (const auto& spec : specs) {
    if (!s.empty()) s += '-';
    switch (spec.kind) {
      case LayerKind::Conv:
        s += std::to_string(spec.out_ch) + "C" + std::to_string(spec.k);
        if (spec.stride != 1) s += "S" + std::to_string(spec.stride);
        break;
      case LayerKind::MaxPool:
        s += "MP" + std::to_string(spec.pool);
        break;
      case LayerKind::Fc:
        s += "FC" + std::to_string(spec.n_out);
        break;
    }
  }
  return s;
}

std::size_t LayerPlan::weight_count() const {
  switch (spec.kind) {
    case LayerKind::Conv: return conv_shape().weight_count();
    case LayerKind::Fc: return in.count() * spec.n_out;
    case LayerKind::MaxPool: return 0;
  }
  return 0;
}

std::size_t LayerPlan::bias_count() const {
  switch (spec.kind) {
    case LayerKind::Conv: return static_cast<std::size_t>(spec.out_ch);
    case LayerKind::Fc: return static_cast<std::size_t>(spec.n_out);
    case LayerKind::MaxPool: return 0;
  }
  return 0;
}

kernels::ConvShape LayerPlan::conv_shape() const {
  return kernels::ConvShape{in.c,        in.h,   in.w, spec.out_ch,
                            spec.k, spec.stride, (spec.k - 1) / 2};
}

std::vector<LayerPlan> plan_layers(const std::vector<LayerSpec>& specs, TensorShape in) {
  if (in.c <= 0 || in.h <= 0 || in.w <= 0) throw ConfigError("bad network input shape");
  std::vector<LayerPlan> plans;
  plans.reserve(specs.size());
  for (const auto& spec : specs) {
    LayerPlan plan;
    plan.spec = spec;
    plan.in = in;
    switch (spec.kind) {
      case LayerKind::Conv: {
        const auto cs = plan.conv_shape();
        plan.out = {spec.out_ch, cs.out_h(), cs.out_w()};
        break;
      }
      case LayerKind::MaxPool:
        plan.out = {in.c, in.h / spec.pool, in.w / spec.pool};
        break;
      case LayerKind::Fc:
        plan.out = {spec.n_out, 1, 1};
        break;
    }
    if (plan.out.c <= 0 || plan.out.h <= 0 || plan.out.w <= 0)
      throw ConfigError("layer '" + arch_to_string({spec}) + "' collapses the tensor to zero");
    plans.push_back(plan);
    in = plan.out;
  }
  return plans;
}

void he_init(std::vector<double>& w, std::size_t fan_in, double gain, Rng& rng) {
  const double scale = gain / std::sqrt(static_cast<double>(fan_in));
  for (auto& x : w) x = rng.normal() * scale;
}

void Adam::update(double* w, const double* g, std::size_t count, std::size_t offset) {
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < count; ++i) {
    double& m = m_[offset + i];
    double& v = v_[offset + i];
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g[i];
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g[i] * g[i];
    const double mh = m / bc1;
    const double vh = v / bc2;
    w[i] -= cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps);
  }
}

void LifParams::validate() const {
  if (!(tau > 0)) throw ConfigError("lif.tau must be > 0");
  if (!(dt > 0)) throw ConfigError("lif.dt must be > 0");
  if (surrogate_a < 0) throw ConfigError("lif.surrogate_a must be >= 0");
  if (!(a() > 0)) throw ConfigError("lif surrogate width must resolve > 0");
}

namespace {
constexpr char kMagic[4] = {'D', 'T', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (ckpt.component != 'A' && ckpt.component != 'S')
    throw ConfigError("checkpoint component must be 'A' or 'S'");
  io::ByteWriter w;
  w.raw(kMagic, 4);
  w.u32(kVersion);
  w.u8(static_cast<std::uint8_t>(ckpt.component));
  w.u8(0);
  w.u16(static_cast<std::uint16_t>(ckpt.in.c));
  w.u16(static_cast<std::uint16_t>(ckpt.in.h));
  w.u16(static_cast<std::uint16_t>(ckpt.in.w));
  w.u32(static_cast<std::uint32_t>(ckpt.arch.size()));
  w.raw(ckpt.arch.data(), ckpt.arch.size());
  w.f64(ckpt.lambda);
  w.f64(ckpt.lif.tau);
  w.f64(ckpt.lif.dt);
  w.f64(ckpt.lif.v_th);
  w.f64(ckpt.lif.u_rest);
  w.f64(ckpt.lif.surrogate_a);
  w.u32(static_cast<std::uint32_t>(ckpt.time_window));
  w.u32(static_cast<std::uint32_t>(ckpt.decode_window));
  w.u32(static_cast<std::uint32_t>(ckpt.arrays.size()));
  for (const auto& arr : ckpt.arrays) {
    w.u32(static_cast<std::uint32_t>(arr.size()));
    for (double x : arr) w.f32(static_cast<float>(x));
  }
  io::write_file_bytes(path, w.bytes);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  const auto bytes = io::read_file_bytes(path);
  io::ByteReader r{bytes.data(), bytes.size(), 0};
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not a checkpoint file: " + path.string());
  if (r.u32() != kVersion) throw DataError("unsupported checkpoint version: " + path.string());
  Checkpoint ckpt;
  ckpt.component = static_cast<char>(r.u8());
  if (ckpt.component != 'A' && ckpt.component != 'S')
    throw DataError("unknown checkpoint component tag in " + path.string());
  r.u8();
  ckpt.in.c = r.u16();
  ckpt.in.h = r.u16();
  ckpt.in.w = r.u16();
  ckpt.arch.resize(r.u32());
  r.raw(ckpt.arch.data(), ckpt.arch.size());
  ckpt.lambda = r.f64();
  ckpt.lif.tau = r.f64();
  ckpt.lif.dt = r.f64();
  ckpt.lif.v_th = r.f64();
  ckpt.lif.u_rest = r.f64();
  ckpt.lif.surrogate_a = r.f64();
  ckpt.time_window = static_cast<int>(r.u32());
  ckpt.decode_window = static_cast<int>(r.u32());
  ckpt.arrays.resize(r.u32());
  for (auto& arr : ckpt.arrays) {
    arr.resize(r.u32());
    for (auto& x : arr) x = static_cast<double>(r.f32());
  }
  if (!r.done()) throw DataError("trailing bytes in checkpoint " + path.string());
  return ckpt;
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<double>& losses) {
  std::string out = "epoch,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i)
    out += std::to_string(i + 1) + "," + io::format_double(losses[i]) + "\n";
  io::write_file_text(path, out);
}

}  // namespace dashtrack::net
