#include "dashtrack/attention.hpp"
#include "dashtrack/config.hpp"
#include "dashtrack/dataset.hpp"
#include "dashtrack/eval.hpp"
#include "dashtrack/event_sim.hpp"
#include "dashtrack/interp.hpp"
#include "dashtrack/io.hpp"
#include "dashtrack/parallel.hpp"
#include "dashtrack/synth.hpp"
#include "dashtrack/tracker.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace dashtrack;

namespace {

// Options shared by every subcommand; precedence: flags > DASH_SEED >
// config file > defaults.
struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "key = value config file");
  cmd->add_option("--set", c.sets, "config override, key=value (repeatable)");
  cmd->add_option("--seed", c.seed, "master RNG seed")->each([&c](const std::string&) {
    c.seed_given = true;
  });
  cmd->add_option("--threads", c.threads, "cap worker threads (0 = runtime default)");
  cmd->add_option("--out", c.out, "output directory")->required();
}

config::RunConfig make_config(const Common& c) {
  config::RunConfig cfg;
  if (!c.config_path.empty()) cfg = config::load_run_config(c.config_path);
  config::apply_env(cfg);
  for (const std::string& s : c.sets) {
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + s + "'");
    config::set_key(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (c.seed_given) cfg.seed = c.seed;
  if (c.threads > 0) cfg.threads = c.threads;
  if (cfg.threads < 0) throw ConfigError("threads must be nonnegative");
  if (cfg.threads > 0) set_thread_cap(cfg.threads);
  return cfg;
}

void print_header(const config::RunConfig& cfg) {
  std::cout << "# effective config\n" << config::effective_config(cfg) << "#\n";
}

void copy_if_exists(const fs::path& from, const fs::path& to) {
  if (fs::exists(from)) fs::copy_file(from, to, fs::copy_options::overwrite_existing);
}

std::vector<Frame> read_frames_or_aps(const fs::path& dir) {
  return io::read_frame_dir(fs::exists(dir / "aps") ? dir / "aps" : dir);
}

int cmd_synth(const Common& c) {
  config::RunConfig cfg = make_config(c);
  cfg.synth.seed = cfg.seed;
  print_header(cfg);
  const synth::SynthDataset ds = synth::synth_sequence(cfg.synth);
  synth::write_dataset(c.out, ds);
  std::cout << "frames: " << ds.frames.size() << "\n"
            << "wrote: " << c.out << "\n";
  return 0;
}

int cmd_simulate(const Common& c, const std::string& frames_dir,
                 const std::string& kernel_path) {
  config::RunConfig cfg = make_config(c);
  const std::vector<Frame> frames = io::read_frame_dir(frames_dir);
  if (frames.size() < 2) throw DataError("simulate: need at least 2 frames");
  const interp::InterpKernel kernel = kernel_path.empty()
                                          ? interp::default_kernel(cfg.interp_r)
                                          : interp::read_kernel(kernel_path);
  cfg.sim.dt_f_ns = frames[1].t_ns - frames[0].t_ns;
  cfg.sim.m = cfg.interp_factor + 1;
  cfg.sim.seed = cfg.seed;
  print_header(cfg);
  const std::vector<Frame> expanded = interp::expand_sequence(frames, cfg.interp_factor, kernel);
  const event_sim::DavisBundle bundle = event_sim::simulate(expanded, cfg.sim);
  event_sim::write_bundle(c.out, bundle);
  copy_if_exists(fs::path(frames_dir) / "gt.txt", fs::path(c.out) / "gt.txt");
  std::cout << "events: " << bundle.dvs.size() << "\n"
            << "aps_frames: " << bundle.aps.size() << "\n"
            << "wrote: " << c.out << "\n";
  return 0;
}

int cmd_train(const Common& c, const std::string& kind, const std::string& data_dir,
              std::string gt_path) {
  config::RunConfig cfg = make_config(c);
  print_header(cfg);
  if (gt_path.empty()) gt_path = (fs::path(data_dir) / "gt.txt").string();
  fs::create_directories(c.out);
  const net::AdamConfig opt{cfg.train.lr, 0.9, 0.999, 1e-8};

  if (kind == "snn") {
    const event_sim::DavisBundle bundle = event_sim::read_bundle(data_dir);
    const Trajectory gt = io::read_trajectory(gt_path);
    const auto samples = dataset::snn_samples(bundle, gt, cfg.pipe, cfg.snn_T);
    if (samples.empty()) throw DataError("train: no usable event windows in the dataset");
    const int h = bundle.aps.front().height, w = bundle.aps.front().width;
    Rng rng(Rng::substream(cfg.seed, 0x1217, 0));
    snn::SnnNetwork net =
        snn::make_snn(config::snn_arch(cfg), {2, h, w}, cfg.lif, cfg.snn_T,
                      cfg.snn_decode_window, cfg.train.lambda, cfg.train.init_gain, rng);
    const auto losses =
        snn::snn_train(net, samples, opt, cfg.train.epochs, cfg.train.batch_size, cfg.seed);
    net::write_checkpoint(fs::path(c.out) / "snn.ckpt", snn::to_checkpoint(net));
    net::write_loss_csv(fs::path(c.out) / "snn_loss.csv", losses);
    std::cout << "samples: " << samples.size() << "\n";
    if (!losses.empty())
      std::cout << "first_loss: " << io::format_double(losses.front()) << "\n"
                << "final_loss: " << io::format_double(losses.back()) << "\n";
    std::cout << "wrote: " << (fs::path(c.out) / "snn.ckpt").string() << "\n";
    return 0;
  }
  if (kind == "ann") {
    const std::vector<Frame> frames = read_frames_or_aps(data_dir);
    const Trajectory gt = io::read_trajectory(gt_path);
    const auto samples = dataset::ann_samples(frames, gt, cfg.pipe, cfg.seed);
    const int h = frames.front().height, w = frames.front().width;
    const int channels = cfg.pipe.ann_attention ? 2 : 1;
    Rng rng(Rng::substream(cfg.seed, 0x1217, 1));
    ann::AnnNetwork net = ann::make_ann(config::ann_arch(cfg), {channels, h, w},
                                        cfg.train.lambda, cfg.train.init_gain, rng);
    const auto losses =
        ann::ann_train(net, samples, opt, cfg.train.epochs, cfg.train.batch_size, cfg.seed);
    net::write_checkpoint(fs::path(c.out) / "ann.ckpt", ann::to_checkpoint(net));
    net::write_loss_csv(fs::path(c.out) / "ann_loss.csv", losses);
    std::cout << "samples: " << samples.size() << "\n";
    if (!losses.empty())
      std::cout << "first_loss: " << io::format_double(losses.front()) << "\n"
                << "final_loss: " << io::format_double(losses.back()) << "\n";
    std::cout << "wrote: " << (fs::path(c.out) / "ann.ckpt").string() << "\n";
    return 0;
  }
  if (kind == "interp") {
    const std::vector<Frame> frames = read_frames_or_aps(data_dir);
    if (frames.size() < 3) throw DataError("train: need at least 3 frames for triplets");
    std::vector<interp::InterpTriplet> triplets;
    for (std::size_t i = 0; i + 2 < frames.size(); ++i)
      triplets.push_back({frames[i], frames[i + 1], frames[i + 2]});
    auto [kernel, history] =
        interp::train_kernel(triplets, cfg.interp_r, cfg.train.lr, cfg.train.epochs);
    interp::write_kernel(fs::path(c.out) / "kernel.txt", kernel);
    net::write_loss_csv(fs::path(c.out) / "interp_loss.csv", history);
    std::cout << "triplets: " << triplets.size() << "\n"
              << "first_loss: " << io::format_double(history.front()) << "\n"
              << "final_loss: " << io::format_double(history.back()) << "\n"
              << "wrote: " << (fs::path(c.out) / "kernel.txt").string() << "\n";
    return 0;
  }
  throw ConfigError("train: unknown kind '" + kind + "' (expected snn, ann, or interp)");
}

int cmd_track(const Common& c, const std::string& bundle_dir, const std::string& snn_ckpt,
              const std::string& ann_ckpt) {
  config::RunConfig cfg = make_config(c);
  const event_sim::DavisBundle bundle = event_sim::read_bundle(bundle_dir);
  const snn::SnnNetwork snn_net = snn::from_checkpoint(net::read_checkpoint(snn_ckpt));
  const ann::AnnNetwork ann_net = ann::from_checkpoint(net::read_checkpoint(ann_ckpt));
  // The frame net's checkpoint knows whether it was trained on masked input.
  cfg.pipe.ann_attention = ann_net.in.c == 2;
  print_header(cfg);
  const tracker::TrackResult res = tracker::run(bundle, snn_net, ann_net, cfg.pipe);
  fs::create_directories(c.out);
  io::write_trajectory(fs::path(c.out) / "fused.txt", res.fused);
  io::write_trajectory(fs::path(c.out) / "ann.txt", res.ann);
  io::write_trajectory(fs::path(c.out) / "snn.txt", res.snn);
  copy_if_exists(fs::path(bundle_dir) / "gt.txt", fs::path(c.out) / "gt.txt");
  std::cout << "fused: " << res.fused.size() << "\n"
            << "ann: " << res.ann.size() << "\n"
            << "snn: " << res.snn.size() << "\n"
            << "dropped_events: " << res.dropped_events << "\n"
            << "wrote: " << c.out << "\n";
  return 0;
}

int cmd_eval(const Common& c, const std::string& gt_path, const std::string& at_dir,
             const std::string& nat_dir, const std::string& snn_ckpt,
             const std::string& ann_ckpt, const std::string& bundle_dir) {
  config::RunConfig cfg = make_config(c);
  print_header(cfg);
  const Trajectory gt = io::read_trajectory(gt_path);
  const Trajectory at_fused = io::read_trajectory(fs::path(at_dir) / "fused.txt");
  const Trajectory at_ann = io::read_trajectory(fs::path(at_dir) / "ann.txt");
  const Trajectory at_snn = io::read_trajectory(fs::path(at_dir) / "snn.txt");
  const Trajectory nat_fused = io::read_trajectory(fs::path(nat_dir) / "fused.txt");
  const Trajectory nat_ann = io::read_trajectory(fs::path(nat_dir) / "ann.txt");

  std::vector<std::int64_t> fused_times;
  fused_times.reserve(at_fused.size());
  for (const auto& e : at_fused) fused_times.push_back(e.t_ns);
  const auto [zoh, zoh_early] = tracker::zero_order_hold(at_ann, fused_times);

  const std::vector<std::pair<std::string, const Trajectory*>> columns = {
      {"snn_origin", &at_snn},   {"snn_hybrid", &nat_fused}, {"ann_nat", &nat_ann},
      {"ann_at", &at_ann},       {"ann_at_zoh", &zoh},       {"hybrid_at", &at_fused},
  };

  fs::create_directories(c.out);
  std::string report;
  for (const auto& [name, traj] : columns) {
    const auto [curve, score] = eval::success_auc(*traj, gt);
    const eval::TrackMetrics m = eval::track_metrics(*traj, gt);
    report += "column: " + name + "\n";
    report += "samples: " + std::to_string(m.samples) + "\n";
    report += "miou: " + io::format_double(m.miou) + "\n";
    report += "mauc: " + io::format_double(score) + "\n";
    report += "rb: " + io::format_double(m.rb) + "\n\n";
    eval::write_success_csv(fs::path(c.out) / ("success_" + name + ".csv"), curve);
  }
  report += "zoh_early_queries: " + std::to_string(zoh_early) + "\n";

  if (!snn_ckpt.empty() && !ann_ckpt.empty() && !bundle_dir.empty()) {
    const ann::AnnNetwork ann_net = ann::from_checkpoint(net::read_checkpoint(ann_ckpt));
    const eval::OpCount ao = eval::op_count(ann_net);
    const snn::SnnNetwork snn_net = snn::from_checkpoint(net::read_checkpoint(snn_ckpt));
    const event_sim::DavisBundle bundle = event_sim::read_bundle(bundle_dir);
    auto samples = dataset::snn_samples(bundle, gt, cfg.pipe, snn_net.time_window);
    if (samples.size() > 32) samples.resize(32);
    std::vector<SpikeTensor> inputs;
    inputs.reserve(samples.size());
    for (auto& s : samples) inputs.push_back(std::move(s.input));
    const eval::OpCount so = eval::op_count(snn_net, inputs);
    report += "\nops.ann.adds: " + io::format_double(ao.adds) + "\n";
    report += "ops.ann.muls: " + io::format_double(ao.muls) + "\n";
    report += "ops.snn.synaptic_adds: " + io::format_double(so.synaptic_adds) + "\n";
    report += "ops.snn.synaptic_muls: " + io::format_double(so.synaptic_muls) + "\n";
    report += "ops.snn.decay_muls: " + io::format_double(so.decay_muls) + "\n";
    report += "ops.snn.decode_adds: " + io::format_double(so.decode_adds) + "\n";
    report += "ops.snn.decode_muls: " + io::format_double(so.decode_muls) + "\n";
    report += "ops.snn.adds: " + io::format_double(so.adds) + "\n";
    report += "ops.snn.muls: " + io::format_double(so.muls) + "\n";
  }

  io::write_file_text(fs::path(c.out) / "report.txt", report);
  std::cout << report;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid frame/event object-tracking toolkit"};
  app.require_subcommand(1);

  Common c_synth, c_sim, c_train, c_track, c_eval;
  std::string frames_dir, kernel_path, kind, data_dir, gt_path;
  std::string bundle_dir, snn_ckpt, ann_ckpt;
  std::string eval_gt, at_dir, nat_dir, eval_snn, eval_ann, eval_bundle;
  int rc = 0;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic moving-square dataset");
  add_common(synth, c_synth);
  synth->callback([&] { rc = cmd_synth(c_synth); });

  CLI::App* simulate =
      app.add_subcommand("simulate", "interpolate frames and simulate a DVS/APS bundle");
  add_common(simulate, c_sim);
  simulate->add_option("--frames", frames_dir, "input frame directory")->required();
  simulate->add_option("--kernel", kernel_path, "trained synthesis kernel (default: linear)");
  simulate->callback([&] { rc = cmd_simulate(c_sim, frames_dir, kernel_path); });

  CLI::App* train = app.add_subcommand("train", "train a network or the synthesis kernel");
  add_common(train, c_train);
  train->add_option("--kind", kind, "snn | ann | interp")->required();
  train->add_option("--data", data_dir, "dataset directory (bundle for snn, frames for ann/interp)")
      ->required();
  train->add_option("--gt", gt_path, "ground-truth trajectory (default: <data>/gt.txt)");
  train->callback([&] { rc = cmd_train(c_train, kind, data_dir, gt_path); });

  CLI::App* track = app.add_subcommand("track", "run the tracking pipeline over a bundle");
  add_common(track, c_track);
  track->add_option("--bundle", bundle_dir, "simulated bundle directory")->required();
  track->add_option("--snn", snn_ckpt, "spiking-net checkpoint")->required();
  track->add_option("--ann", ann_ckpt, "frame-net checkpoint")->required();
  track->callback([&] { rc = cmd_track(c_track, bundle_dir, snn_ckpt, ann_ckpt); });

  CLI::App* evalc = app.add_subcommand("eval", "score trajectories and count operations");
  add_common(evalc, c_eval);
  evalc->add_option("--gt", eval_gt, "ground-truth trajectory")->required();
  evalc->add_option("--at", at_dir, "track output dir, attention run")->required();
  evalc->add_option("--nat", nat_dir, "track output dir, no-attention run")->required();
  evalc->add_option("--snn", eval_snn, "spiking-net checkpoint (enables op counts)");
  evalc->add_option("--ann", eval_ann, "frame-net checkpoint (enables op counts)");
  evalc->add_option("--bundle", eval_bundle, "bundle directory (enables op counts)");
  evalc->callback([&] {
    rc = cmd_eval(c_eval, eval_gt, at_dir, nat_dir, eval_snn, eval_ann, eval_bundle);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int r = app.exit(e);
    return r == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
