#pragma once

#include "dashtrack/net_common.hpp"
#include "dashtrack/parallel.hpp"
#include "dashtrack/types.hpp"

#include <cstdint>
#include <vector>

namespace dashtrack::ann {

/// Frame-based network: conv/pool/fc stack, ReLU on every hidden layer,
/// linear 4-output head, biases throughout.
struct AnnNetwork {
  net::TensorShape in;
  std::vector<net::LayerPlan> layers;  // last entry must be FC4
  double lambda = 1e-4;
  std::vector<std::vector<double>> w, b;  // empty for pool layers

  void validate() const;
};

AnnNetwork make_ann(const std::string& arch, net::TensorShape in, double lambda,
                    double init_gain, Rng& rng);

net::Checkpoint to_checkpoint(const AnnNetwork& net);
AnnNetwork from_checkpoint(const net::Checkpoint& ckpt);

struct AnnTrace {
  std::vector<std::vector<double>> pre;   // per layer: pre-activation (or pool out)
  std::vector<std::vector<double>> act;   // per layer: after ReLU (last: linear)
  std::vector<std::vector<std::int32_t>> argmax;  // pools only
  BBox pred;
};

BBox ann_forward(const AnnNetwork& net, const std::vector<double>& input,
                 Exec exec = Exec::Parallel, AnnTrace* trace = nullptr);

/// Squared error plus lambda * sum of squared weights (biases excluded).
double ann_loss(const BBox& pred, const BBox& gt, const AnnNetwork& net);

struct AnnSample {
  std::vector<double> input;  // (c, h, w) row-major
  BBox gt;
};

struct AnnGrads {
  std::vector<std::vector<double>> w, b;
};

/// Exact gradients: data term averaged over the batch, L2 penalty once.
AnnGrads ann_grads(const AnnNetwork& net, const std::vector<AnnSample>& batch,
                   Exec exec = Exec::Parallel);

double batch_loss(const AnnNetwork& net, const std::vector<AnnSample>& batch,
                  Exec exec = Exec::Parallel);

/// ADAM training; returns per-epoch mean loss. Deterministic for fixed seed.
std::vector<double> ann_train(AnnNetwork& net, const std::vector<AnnSample>& data,
                              const net::AdamConfig& opt, int epochs, int batch_size,
                              std::uint64_t seed, Exec exec = Exec::Parallel);

}  // namespace dashtrack::ann
