#include "dashtrack/eval.hpp"

#include "dashtrack/io.hpp"
#include "dashtrack/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

namespace dashtrack::eval {

using net::LayerKind;
using net::LayerPlan;

double iou(const BBox& a, const BBox& b) {
  const double aw = std::max(a.w, 0.0), ah = std::max(a.h, 0.0);
  const double bw = std::max(b.w, 0.0), bh = std::max(b.h, 0.0);
  const double ix0 = std::max(a.x - aw / 2, b.x - bw / 2);
  const double ix1 = std::min(a.x + aw / 2, b.x + bw / 2);
  const double iy0 = std::max(a.y - ah / 2, b.y - bh / 2);
  const double iy1 = std::min(a.y + ah / 2, b.y + bh / 2);
  const double inter = std::max(0.0, ix1 - ix0) * std::max(0.0, iy1 - iy0);
  const double uni = aw * ah + bw * bh - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

namespace {

void check_pair(const Trajectory& traj, const Trajectory& gt) {
  if (traj.empty()) throw DataError("eval: empty trajectory");
  if (gt.empty()) throw DataError("eval: empty ground truth");
  for (std::size_t i = 1; i < gt.size(); ++i)
    if (gt[i].t_ns < gt[i - 1].t_ns) throw DataError("eval: ground truth not sorted by time");
}

double lerp(double a, double b, double f) { return a + (b - a) * f; }

}  // namespace

BBox interp_gt(const Trajectory& gt, std::int64_t t) {
  if (gt.empty()) throw DataError("eval: empty ground truth");
  if (t <= gt.front().t_ns) return gt.front().bbox;
  if (t >= gt.back().t_ns) return gt.back().bbox;
  auto hi = std::upper_bound(gt.begin(), gt.end(), t,
                             [](std::int64_t v, const TrackEstimate& e) { return v < e.t_ns; });
  auto lo = hi - 1;
  if (hi->t_ns == lo->t_ns) return lo->bbox;
  const double f =
      static_cast<double>(t - lo->t_ns) / static_cast<double>(hi->t_ns - lo->t_ns);
  return {lerp(lo->bbox.x, hi->bbox.x, f), lerp(lo->bbox.y, hi->bbox.y, f),
          lerp(lo->bbox.w, hi->bbox.w, f), lerp(lo->bbox.h, hi->bbox.h, f)};
}

double miou(const Trajectory& traj, const Trajectory& gt) {
  check_pair(traj, gt);
  double sum = 0.0;
  for (const auto& e : traj) sum += iou(e.bbox, interp_gt(gt, e.t_ns));
  return sum / static_cast<double>(traj.size());
}

std::pair<SuccessCurve, double> success_auc(const Trajectory& traj, const Trajectory& gt,
                                            double threshold) {
  check_pair(traj, gt);
  std::vector<double> ious;
  ious.reserve(traj.size());
  for (const auto& e : traj) ious.push_back(iou(e.bbox, interp_gt(gt, e.t_ns)));

  const auto rate_above = [&](double thr) {
    std::size_t n = 0;
    for (double v : ious)
      if (v > thr) ++n;
    return static_cast<double>(n) / static_cast<double>(ious.size());
  };

  SuccessCurve curve;
  curve.thresholds.resize(101);
  curve.rates.resize(101);
  for (int i = 0; i <= 100; ++i) {
    curve.thresholds[i] = i / 100.0;
    curve.rates[i] = rate_above(curve.thresholds[i]);
  }
  return {std::move(curve), rate_above(threshold)};
}

double robustness(const Trajectory& traj, const Trajectory& gt, double fail_threshold) {
  check_pair(traj, gt);
  std::size_t fails = 0;
  for (const auto& e : traj)
    if (iou(e.bbox, interp_gt(gt, e.t_ns)) < fail_threshold) ++fails;
  return static_cast<double>(fails) / static_cast<double>(traj.size());
}

std::pair<double, double> rmse_psnr(const std::vector<Frame>& sim,
                                    const std::vector<Frame>& ref) {
  if (sim.size() != ref.size()) throw DataError("rmse_psnr: sequence length mismatch");
  if (sim.empty()) throw DataError("rmse_psnr: empty sequences");
  double se = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    if (sim[i].width != ref[i].width || sim[i].height != ref[i].height)
      throw DataError("rmse_psnr: frame dimension mismatch");
    for (std::size_t p = 0; p < sim[i].v.size(); ++p) {
      const double d = sim[i].v[p] - ref[i].v[p];
      se += d * d;
    }
    n += sim[i].v.size();
  }
  const double rmse = std::sqrt(se / static_cast<double>(n));
  const double psnr = rmse == 0.0 ? std::numeric_limits<double>::infinity()
                                  : 20.0 * std::log10(1.0 / rmse);
  return {rmse, psnr};
}

namespace {

// How many output rows a given input row feeds through a k/stride/pad conv.
std::vector<int> fanout_1d(int in_n, int out_n, int k, int stride, int pad) {
  std::vector<int> cnt(in_n, 0);
  for (int i = 0; i < in_n; ++i)
    for (int kk = 0; kk < k; ++kk) {
      const int t = i + pad - kk;
      if (t >= 0 && t % stride == 0 && t / stride < out_n) ++cnt[i];
    }
  return cnt;
}

}  // namespace

OpCount op_count(const snn::SnnNetwork& net, const std::vector<SpikeTensor>& inputs) {
  net.validate();
  if (inputs.empty()) throw DataError("op_count: empty input set");
  const int n_spk = net.n_spiking();

  // Per-layer 1-D fan-out tables (conv layers only).
  std::vector<std::vector<int>> cnt_y(n_spk), cnt_x(n_spk);
  for (int l = 0; l < n_spk; ++l) {
    const LayerPlan& plan = net.layers[l];
    if (plan.spec.kind != LayerKind::Conv) continue;
    const auto cs = plan.conv_shape();
    cnt_y[l] = fanout_1d(cs.in_h, cs.out_h(), cs.k, cs.stride, cs.pad);
    cnt_x[l] = fanout_1d(cs.in_w, cs.out_w(), cs.k, cs.stride, cs.pad);
  }

  OpCount total;
  for (const auto& input : inputs) {
    snn::SnnTrace trace;
    snn_forward(net, input, Exec::Serial, &trace);
    for (int t = 0; t < net.time_window; ++t) {
      for (int l = 0; l < n_spk; ++l) {
        const LayerPlan& plan = net.layers[l];
        if (plan.spec.kind == LayerKind::MaxPool) continue;  // routing only
        const std::size_t in_count = plan.in.count();
        const auto active = [&](std::size_t i) -> bool {
          if (l == 0) return input.v[static_cast<std::size_t>(t) * in_count + i] != 0;
          return trace.spikes[t][l - 1][i] != 0.0;
        };
        if (plan.spec.kind == LayerKind::Conv) {
          const int ih = plan.in.h, iw = plan.in.w;
          const int oc = plan.out.c;
          for (std::size_t i = 0; i < in_count; ++i) {
            if (!active(i)) continue;
            const int iy = static_cast<int>((i / iw) % ih);
            const int ix = static_cast<int>(i % iw);
            total.synaptic_adds += static_cast<double>(oc) * cnt_y[l][iy] * cnt_x[l][ix];
          }
        } else {
          for (std::size_t i = 0; i < in_count; ++i)
            if (active(i)) total.synaptic_adds += plan.spec.n_out;
        }
      }
    }
    for (int l = 0; l < n_spk; ++l)
      if (net.layers[l].spec.kind != LayerKind::MaxPool)
        total.decay_muls +=
            static_cast<double>(net.layers[l].out.count()) * net.time_window;
    const double dense = static_cast<double>(net.decode_plan().in.count()) * 4.0;
    total.decode_muls += dense;
    total.decode_adds += dense;  // bias fold: one add per product, last one adds the bias
  }

  const double inv = 1.0 / static_cast<double>(inputs.size());
  total.synaptic_adds *= inv;
  total.synaptic_muls *= inv;
  total.decay_muls *= inv;
  total.decode_adds *= inv;
  total.decode_muls *= inv;
  total.adds = total.synaptic_adds + total.decode_adds;
  total.muls = total.synaptic_muls + total.decay_muls + total.decode_muls;
  return total;
}

OpCount op_count(const ann::AnnNetwork& net) {
  net.validate();
  OpCount total;
  for (const LayerPlan& plan : net.layers) {
    if (plan.weight_count() == 0) continue;
    double apps = 0;
    if (plan.spec.kind == LayerKind::Conv)
      apps = static_cast<double>(plan.out.count()) * plan.in.c * plan.spec.k * plan.spec.k;
    else
      apps = static_cast<double>(plan.in.count()) * plan.spec.n_out;
    total.muls += apps;
    total.adds += apps;  // bias folded into the accumulation chain
  }
  return total;
}

TrackMetrics track_metrics(const Trajectory& traj, const Trajectory& gt, double auc_threshold,
                           double rb_threshold) {
  TrackMetrics m;
  m.miou = miou(traj, gt);
  m.mauc = success_auc(traj, gt, auc_threshold).second;
  m.rb = robustness(traj, gt, rb_threshold);
  m.samples = traj.size();
  return m;
}

void write_success_csv(const std::filesystem::path& path, const SuccessCurve& curve) {
  std::string out = "threshold,success\n";
  for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
    out += io::format_double(curve.thresholds[i]);
    out += ',';
    out += io::format_double(curve.rates[i]);
    out += '\n';
  }
  io::write_file_text(path, out);
}

}  // namespace dashtrack::eval
