#include "dashtrack/config.hpp"

#include "dashtrack/io.hpp"

#include <charconv>
#include <climits>
#include <cstdlib>
#include <functional>
#include <vector>

namespace dashtrack::config {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& v) {
  throw ConfigError("config: bad value '" + v + "' for key '" + key + "'");
}

double num_d(const std::string& key, const std::string& v) {
  try {
    return io::parse_double(v);
  } catch (const DataError&) {
    bad_value(key, v);
  }
}

std::int64_t num_i64(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto* b = v.data();
  const auto* e = b + v.size();
  auto [p, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || p != e) bad_value(key, v);
  return out;
}

int num_i(const std::string& key, const std::string& v) {
  const std::int64_t x = num_i64(key, v);
  if (x < INT_MIN || x > INT_MAX) bad_value(key, v);
  return static_cast<int>(x);
}

std::uint64_t num_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* b = v.data();
  const auto* e = b + v.size();
  auto [p, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || p != e) bad_value(key, v);
  return out;
}

bool num_b(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  bad_value(key, v);
}

struct Entry {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define DT_D(name, expr)                                                \
  Entry{name, [](const RunConfig& c) { return io::format_double(c.expr); }, \
        [](RunConfig& c, const std::string& v) { c.expr = num_d(name, v); }}
#define DT_I(name, expr)                                              \
  Entry{name, [](const RunConfig& c) { return std::to_string(c.expr); }, \
        [](RunConfig& c, const std::string& v) { c.expr = num_i(name, v); }}
#define DT_I64(name, expr)                                            \
  Entry{name, [](const RunConfig& c) { return std::to_string(c.expr); }, \
        [](RunConfig& c, const std::string& v) { c.expr = num_i64(name, v); }}
#define DT_U64(name, expr)                                            \
  Entry{name, [](const RunConfig& c) { return std::to_string(c.expr); }, \
        [](RunConfig& c, const std::string& v) { c.expr = num_u64(name, v); }}
#define DT_B(name, expr)                                                 \
  Entry{name, [](const RunConfig& c) { return c.expr ? "1" : "0"; },     \
        [](RunConfig& c, const std::string& v) { c.expr = num_b(name, v); }}
#define DT_S(name, expr)                                  \
  Entry{name, [](const RunConfig& c) { return c.expr; }, \
        [](RunConfig& c, const std::string& v) { c.expr = v; }}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      DT_U64("seed", seed),
      DT_I("threads", threads),
      DT_I("synth.width", synth.width),
      DT_I("synth.height", synth.height),
      DT_I("synth.frames", synth.frames),
      DT_I64("synth.t0_ns", synth.t0_ns),
      DT_I64("synth.dt_f_ns", synth.dt_f_ns),
      DT_D("synth.object_w", synth.object_w),
      DT_D("synth.object_h", synth.object_h),
      DT_D("synth.x0", synth.x0),
      DT_D("synth.y0", synth.y0),
      DT_D("synth.vx", synth.vx),
      DT_D("synth.vy", synth.vy),
      DT_D("synth.foreground", synth.foreground),
      DT_D("synth.background", synth.background),
      DT_I("synth.distractors", synth.distractors),
      DT_D("synth.texture", synth.texture),
      DT_D("sim.theta", sim.theta),
      DT_I64("sim.dt_e_ns", sim.dt_e_ns),
      DT_I64("sim.dt_f_ns", sim.dt_f_ns),
      DT_I("sim.m", sim.m),
      DT_I("interp.factor", interp_factor),
      DT_I("interp.r", interp_r),
      DT_S("net.preset", preset),
      Entry{"net.snn_arch", [](const RunConfig& c) { return snn_arch(c); },
            [](RunConfig& c, const std::string& v) { c.snn_arch = v; }},
      Entry{"net.ann_arch", [](const RunConfig& c) { return ann_arch(c); },
            [](RunConfig& c, const std::string& v) { c.ann_arch = v; }},
      DT_D("lif.tau", lif.tau),
      DT_D("lif.dt", lif.dt),
      DT_D("lif.v_th", lif.v_th),
      DT_D("lif.u_rest", lif.u_rest),
      DT_D("lif.surrogate_a", lif.surrogate_a),
      DT_I("snn.T", snn_T),
      DT_I("snn.decode_window", snn_decode_window),
      DT_I("train.epochs", train.epochs),
      DT_I("train.batch", train.batch_size),
      DT_D("train.lr", train.lr),
      DT_D("train.lambda", train.lambda),
      DT_D("train.init_gain", train.init_gain),
      DT_I64("tcf.kappa_ns", pipe.tcf.kappa_ns),
      DT_B("tcf.causal", pipe.tcf.causal),
      DT_D("att.sigma", pipe.att.sigma),
      DT_D("att.alpha_sigma", pipe.att.alpha_sigma),
      DT_D("att.beta_sigma", pipe.att.beta_sigma),
      DT_B("att.normalized_prefactor", pipe.att.normalized_prefactor),
      DT_I64("pipe.snn_period_ns", pipe.snn_period_ns),
      DT_I64("pipe.snn_window_ns", pipe.snn_window_ns),
      DT_B("pipe.ann_attention", pipe.ann_attention),
  };
  return entries;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const Entry& e : registry())
    if (key == e.key) {
      e.set(cfg, value);
      return;
    }
  throw ConfigError("config: unknown key '" + key + "'");
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::size_t pos = 0, line_no = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (std::size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: line " + std::to_string(line_no) + ": empty key");
    set_key(cfg, key, value);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_file_text(path);
  } catch (const DataError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_run_config(text);
}

void apply_env(RunConfig& cfg) {
  if (const char* env = std::getenv("DASH_SEED")) cfg.seed = num_u64("DASH_SEED", env);
}

std::string snn_arch(const RunConfig& cfg) {
  if (!cfg.snn_arch.empty()) return cfg.snn_arch;
  if (cfg.preset == "desk") return "8C3S2-16C3S2-FC64-FC4";
  if (cfg.preset == "full") return "MP2-32C3S3-64C3S1-128C3S1-128C3S2-256C3S2-FC1024-FC4";
  throw ConfigError("config: unknown preset '" + cfg.preset + "' (expected desk or full)");
}

std::string ann_arch(const RunConfig& cfg) {
  if (!cfg.ann_arch.empty()) return cfg.ann_arch;
  if (cfg.preset == "desk") return "8C3S2-MP2-16C3S1-FC64-FC4";
  if (cfg.preset == "full")
    return "32C3S3-MP2-64C3S1-MP2-128C3S1-128C1S1-MP2-256C2S2-FC1024-FC4";
  throw ConfigError("config: unknown preset '" + cfg.preset + "' (expected desk or full)");
}

std::string effective_config(const RunConfig& cfg) {
  std::string out;
  for (const Entry& e : registry()) {
    out += e.key;
    out += " = ";
    out += e.get(cfg);
    out += '\n';
  }
  return out;
}

}  // namespace dashtrack::config
