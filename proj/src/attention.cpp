#include "dashtrack/attention.hpp"

#include <algorithm>
#include <cmath>

#include "dashtrack/kernels.hpp"

namespace dashtrack::attention {

void AttentionConfig::validate() const {
  if (!(sigma > 0)) throw ConfigError("attention.sigma must be > 0");
  if (alpha_sigma < 0 || beta_sigma < 0)
    throw ConfigError("attention noise std-devs must be >= 0");
}

double AttentionConfig::prefactor() const {
  return normalized_prefactor ? 1.0 / (2.0 * 3.141592653589793238462643383279 * std::sqrt(sigma))
                              : 1.0;
}

Prior nearest_prior(std::int64_t t_query, const std::vector<TrackEstimate>& fused_history) {
  const TrackEstimate* best = nullptr;
  for (const auto& est : fused_history) {
    if (est.t_ns >= t_query) continue;  // strictly earlier only
    if (!best || est.t_ns > best->t_ns) best = &est;
  }
  if (best) return {*best, false};
  Prior p;
  p.est.bbox = {0.5, 0.5, 1.0, 1.0};  // whole frame
  p.est.t_ns = t_query;
  p.est.source = Source::Fused;
  p.cold_start = true;
  return p;
}

bool usable_prior(const TrackEstimate& est, int W, int H) {
  if (W <= 0 || H <= 0) return false;
  const BBox& b = est.bbox;
  if (!std::isfinite(b.x) || !std::isfinite(b.y) || !std::isfinite(b.w) || !std::isfinite(b.h))
    return false;
  if (b.w < 0 || b.h < 0) return false;
  const long px = std::lround(b.x * W - 0.5), py = std::lround(b.y * H - 0.5);
  return px >= 0 && px < W && py >= 0 && py < H;
}

Frame build_mask(const TrackEstimate& est, int W, int H, const AttentionConfig& cfg,
                 Exec exec) {
  cfg.validate();
  if (W <= 0 || H <= 0) throw ConfigError("build_mask: image dimensions must be positive");
  const double cx = est.bbox.x * W - 0.5;
  const double cy = est.bbox.y * H - 0.5;
  double half_w = est.bbox.w * W / 2.0;
  double half_h = est.bbox.h * H / 2.0;
  if (half_w < 0 || half_h < 0) throw DataError("build_mask: negative box dimensions");

  Frame mask(W, H, est.t_ns);
  kernels::mask_fill(W, H, cx, cy, half_w, half_h, cfg.sigma, cfg.prefactor(), mask.v.data(),
                     exec);
  // A box so small (or degenerate) that no pixel center landed inside is
  // treated as a point box: the pixel nearest the center becomes the region.
  const bool any_inside = std::any_of(mask.v.begin(), mask.v.end(),
                                      [](double v) { return v == 1.0; });
  if (!any_inside) {
    const long px = std::lround(cx), py = std::lround(cy);
    if (px < 0 || px >= W || py < 0 || py >= H)
      throw DataError("build_mask: box does not intersect the image");
    mask.at(static_cast<int>(px), static_cast<int>(py)) = 1.0;
  }
  return mask;
}

std::vector<double> apply_mask(const std::vector<double>& x, const net::TensorShape& shape,
                               const Frame& mask, Exec exec) {
  if (x.size() != shape.count()) throw DataError("apply_mask: input size mismatch");
  if (mask.width != shape.w || mask.height != shape.h)
    throw DataError("apply_mask: mask dimensions mismatch");
  const std::size_t plane = static_cast<std::size_t>(shape.h) * shape.w;
  std::vector<double> out(2 * x.size());
  std::copy(x.begin(), x.end(), out.begin());
  for (int c = 0; c < shape.c; ++c)
    kernels::elemwise_mul(plane, x.data() + c * plane, mask.v.data(),
                          out.data() + x.size() + c * plane, exec);
  return out;
}

BBox augment_label(const BBox& gt, Rng& rng, const AttentionConfig& cfg) {
  cfg.validate();
  const double alpha = rng.normal(0.0, cfg.alpha_sigma);
  const double bx = rng.normal(0.0, cfg.beta_sigma);
  const double by = rng.normal(0.0, cfg.beta_sigma);
  const double bw = rng.normal(0.0, cfg.beta_sigma);
  const double bh = rng.normal(0.0, cfg.beta_sigma);
  return BBox{(1.0 + alpha) * (gt.x + bx), (1.0 + alpha) * (gt.y + by),
              (1.0 + alpha) * (gt.w + bw), (1.0 + alpha) * (gt.h + bh)};
}

}  // namespace dashtrack::attention
