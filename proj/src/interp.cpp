#include "dashtrack/interp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dashtrack/io.hpp"
#include "dashtrack/kernels.hpp"

namespace dashtrack::interp {

void InterpKernel::validate() const {
  if (r < 0) throw ConfigError("interp kernel radius must be >= 0");
  if (weights.size() != 2 * per_patch())
    throw ConfigError("interp kernel weight count mismatch");
  for (double w : weights)
    if (!std::isfinite(w)) throw NumericError("interp kernel weight not finite");
}

InterpKernel default_kernel(int r) {
  if (r < 0) throw ConfigError("interp kernel radius must be >= 0");
  InterpKernel k;
  k.r = r;
  k.weights.assign(2 * k.per_patch(), 0.0);
  const std::size_t center = static_cast<std::size_t>(r) * (2 * r + 1) + r;
  k.weights[center] = 0.5;
  k.weights[k.per_patch() + center] = 0.5;
  return k;
}

Frame interpolate_frame(const Frame& prev, const Frame& next, const InterpKernel& k,
                        Exec exec) {
  if (!prev.same_shape(next)) throw DataError("interpolate_frame: frame shape mismatch");
  k.validate();
  Frame out(prev.width, prev.height, (prev.t_ns + next.t_ns) / 2);
  kernels::blend_patches(prev.width, prev.height, prev.v.data(), next.v.data(), k.r,
                         k.weights.data(), out.v.data(), exec);
  return out;
}

double l1_loss(const Frame& pred, const Frame& gt) {
  if (!pred.same_shape(gt)) throw DataError("l1_loss: frame shape mismatch");
  double l = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) l += std::abs(pred.v[i] - gt.v[i]);
  return l;
}

namespace {

// L1 over the raw (unclamped) synthesis, plus its kernel subgradient.
double triplet_loss_grad(const InterpTriplet& t, const InterpKernel& k,
                         std::vector<double>* grad, Exec exec) {
  const int w = t.prev.width, h = t.prev.height;
  std::vector<double> pred(t.prev.size());
  kernels::blend_patches_raw(w, h, t.prev.v.data(), t.next.v.data(), k.r,
                             k.weights.data(), pred.data(), exec);
  const int side = 2 * k.r + 1;
  double loss = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double diff = pred[static_cast<std::size_t>(y) * w + x] - t.mid.v[static_cast<std::size_t>(y) * w + x];
      loss += std::abs(diff);
      if (!grad) continue;
      const double s = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);  // subgradient 0 at ties
      if (s == 0.0) continue;
      for (int dy = -k.r; dy <= k.r; ++dy) {
        const int sy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -k.r; dx <= k.r; ++dx) {
          const int sx = std::clamp(x + dx, 0, w - 1);
          const int ki = (dy + k.r) * side + (dx + k.r);
          const std::size_t si = static_cast<std::size_t>(sy) * w + sx;
          (*grad)[ki] += s * t.prev.v[si];
          (*grad)[k.per_patch() + ki] += s * t.next.v[si];
        }
      }
    }
  }
  return loss;
}

}  // namespace

std::pair<InterpKernel, std::vector<double>> train_kernel(
    const std::vector<InterpTriplet>& triplets, int r, double lr, int steps, Exec exec) {
  if (triplets.empty()) throw DataError("train_kernel: empty training set");
  if (steps < 0) throw ConfigError("train_kernel: steps must be >= 0");
  for (const auto& t : triplets)
    if (!t.prev.same_shape(t.mid) || !t.prev.same_shape(t.next))
      throw DataError("train_kernel: triplet shape mismatch");

  // Start from a uniform blur (sums to 1, far from the averaging optimum)
  // so the descent has something to learn even on linear-blend data.
  InterpKernel k;
  k.r = r;
  k.weights.assign(2 * k.per_patch(), 0.5 / static_cast<double>(k.per_patch()));
  InterpKernel best = k;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(steps) + 1);

  for (int step = 0; step <= steps; ++step) {
    std::vector<double> grad(k.weights.size(), 0.0);
    double loss = 0.0;
    for (const auto& t : triplets)
      loss += triplet_loss_grad(t, k, step < steps ? &grad : nullptr, exec);
    if (!std::isfinite(loss)) throw NumericError("train_kernel: loss diverged");
    history.push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best = k;
    }
    if (step == steps) break;
    for (std::size_t i = 0; i < k.weights.size(); ++i)
      k.weights[i] -= lr * grad[i] / static_cast<double>(triplets.size());
  }
  return {best, history};
}

std::vector<Frame> expand_sequence(const std::vector<Frame>& frames, int factor,
                                   const InterpKernel& k, Exec exec) {
  if (factor != 0 && factor != 1 && factor != 3 && factor != 7)
    throw ConfigError("interp factor must be 0, 1, 3, or 7");
  if (frames.size() < 2 && factor > 0)
    throw DataError("expand_sequence: need at least 2 frames");
  std::vector<Frame> cur = frames;
  for (int pass = factor + 1; pass > 1; pass /= 2) {
    std::vector<Frame> next;
    next.reserve(cur.size() * 2 - 1);
    for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
      if ((cur[i].t_ns + cur[i + 1].t_ns) % 2 != 0)
        throw DataError("expand_sequence: timestamps do not halve evenly");
      next.push_back(cur[i]);
      next.push_back(interpolate_frame(cur[i], cur[i + 1], k, exec));
    }
    next.push_back(cur.back());
    cur = std::move(next);
  }
  return cur;
}

void write_kernel(const std::filesystem::path& path, const InterpKernel& k) {
  k.validate();
  std::string out = std::to_string(k.r) + "\n";
  const int side = 2 * k.r + 1;
  for (int row = 0; row < 2 * side; ++row) {
    for (int col = 0; col < side; ++col) {
      if (col) out += ' ';
      out += io::format_double(k.weights[static_cast<std::size_t>(row) * side + col]);
    }
    out += '\n';
  }
  io::write_file_text(path, out);
}

InterpKernel read_kernel(const std::filesystem::path& path) {
  std::istringstream in(io::read_file_text(path));
  InterpKernel k;
  if (!(in >> k.r)) throw DataError("kernel file: missing radius: " + path.string());
  if (k.r < 0) throw DataError("kernel file: negative radius: " + path.string());
  k.weights.resize(2 * k.per_patch());
  std::string tok;
  for (auto& w : k.weights) {
    if (!(in >> tok)) throw DataError("kernel file: truncated weights: " + path.string());
    w = io::parse_double(tok);
  }
  if (in >> tok) throw DataError("kernel file: trailing data: " + path.string());
  k.validate();
  return k;
}

}  // namespace dashtrack::interp
