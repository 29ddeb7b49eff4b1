#pragma once

#include "dashtrack/net_common.hpp"
#include "dashtrack/parallel.hpp"
#include "dashtrack/rng.hpp"
#include "dashtrack/types.hpp"

#include <cstdint>
#include <vector>

namespace dashtrack::attention {

struct AttentionConfig {
  double sigma = 8.0;  // Gaussian falloff scale, pixels
  double alpha_sigma = 0.1;
  double beta_sigma = 0.1;
  // Historical normalization 1/(2*pi*sqrt(sigma)) on the exterior Gaussian.
  // Off by default: it would cap the exterior far below the interior value 1
  // and produce a large discontinuity at the box edge.
  bool normalized_prefactor = false;

  void validate() const;
  double prefactor() const;
};

struct Prior {
  TrackEstimate est;
  bool cold_start = false;  // true when the whole-frame fallback was used
};

/// Latest fused estimate strictly before t_query; whole-frame fallback (box
/// covering the image, flagged) when the history has nothing earlier.
Prior nearest_prior(std::int64_t t_query, const std::vector<TrackEstimate>& fused_history);

/// Whether an estimate can seed build_mask on a WxH sensor: finite values,
/// nonnegative extents, and a center pixel on the image. Conservative near
/// the border (build_mask also accepts edge-straddling boxes whose center
/// falls just outside), so callers can substitute the whole-frame prior
/// instead of propagating a DataError from a wild upstream estimate.
bool usable_prior(const TrackEstimate& est, int W, int H);

/// Soft attention mask: 1 inside the box, Gaussian falloff with distance
/// from the box center outside. Returned as a Frame (values in (0,1]).
/// Normalized bbox coordinates map pixel (i,j) center to ((i+0.5)/W, (j+0.5)/H).
Frame build_mask(const TrackEstimate& est, int W, int H, const AttentionConfig& cfg,
                 Exec exec = Exec::Parallel);

/// Channel concatenation [X; X * M]: C input channels become 2C.
std::vector<double> apply_mask(const std::vector<double>& x, const net::TensorShape& shape,
                               const Frame& mask, Exec exec = Exec::Parallel);

/// Training-time label noise: h' = (1 + alpha) * (gt + beta), alpha scalar,
/// beta an independent 4-vector, all N(0, sigma) draws. Draw order: alpha,
/// then beta for x, y, w, h.
BBox augment_label(const BBox& gt, Rng& rng, const AttentionConfig& cfg);

}  // namespace dashtrack::attention
