#pragma once

#include "dashtrack/net_common.hpp"
#include "dashtrack/parallel.hpp"
#include "dashtrack/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace dashtrack::snn {

/// Spiking network: every arch layer except the final FC runs LIF dynamics
/// (no biases, binary activations); the final FC is a plain linear decode
/// over spike counts accumulated during the last decode_window timesteps.
struct SnnNetwork {
  net::TensorShape in;
  std::vector<net::LayerPlan> layers;  // last entry is the decode layer
  net::LifParams lif;
  int time_window = 8;    // T
  int decode_window = 4;  // delta-t
  double lambda = 1e-4;
  std::vector<std::vector<double>> w;  // per layer; empty for pools
  std::vector<double> decode_bias;

  int n_spiking() const { return static_cast<int>(layers.size()) - 1; }
  const net::LayerPlan& decode_plan() const { return layers.back(); }
  void validate() const;
};

/// Build and He-initialize a spiking net from an arch string.
SnnNetwork make_snn(const std::string& arch, net::TensorShape in, const net::LifParams& lif,
                    int time_window, int decode_window, double lambda, double init_gain,
                    Rng& rng);

net::Checkpoint to_checkpoint(const SnnNetwork& net);
SnnNetwork from_checkpoint(const net::Checkpoint& ckpt);

/// Bin events into a binary (T, 2, H, W) tensor over [t0, t0 + window_ns);
/// channel 0 = ON (+1), channel 1 = OFF (-1). Out-of-window events are
/// ignored. window_ns must divide evenly into T bins.
SpikeTensor encode_events(const std::vector<Event>& events, int height, int width, int T,
                          std::int64_t t0, std::int64_t window_ns);

/// Everything the backward pass needs, recorded during forward.
struct SnnTrace {
  // indexed [t][layer]; spikes holds each non-decode layer's binary output,
  // u_pre the pre-reset membrane of spiking layers (empty for pools)
  std::vector<std::vector<std::vector<double>>> spikes;
  std::vector<std::vector<std::vector<double>>> u_pre;
  std::vector<std::vector<std::vector<std::int32_t>>> argmax;  // pools only
  std::vector<double> counts;  // decode input
  BBox pred;
};

BBox snn_forward(const SnnNetwork& net, const SpikeTensor& input, Exec exec = Exec::Parallel,
                 SnnTrace* trace = nullptr);

/// Single-sample objective: squared error plus lambda * sum of squared
/// weights (biases excluded).
double snn_loss(const BBox& pred, const BBox& gt, const SnnNetwork& net);

struct SnnSample {
  SpikeTensor input;
  BBox gt;
};

struct SnnGrads {
  std::vector<std::vector<double>> w;
  std::vector<double> decode_bias;
};

/// BPTT over the unrolled T timesteps: rectangle surrogate for the firing
/// function, reset path detached. Data term is averaged over the batch; the
/// L2 penalty enters once.
SnnGrads bptt_grads(const SnnNetwork& net, const std::vector<SnnSample>& batch,
                    Exec exec = Exec::Parallel);

/// Mean batch loss matching bptt_grads' objective.
double batch_loss(const SnnNetwork& net, const std::vector<SnnSample>& batch,
                  Exec exec = Exec::Parallel);

/// ADAM training; returns per-epoch mean loss. Deterministic for fixed seed.
std::vector<double> snn_train(SnnNetwork& net, const std::vector<SnnSample>& data,
                              const net::AdamConfig& opt, int epochs, int batch_size,
                              std::uint64_t seed, Exec exec = Exec::Parallel);

}  // namespace dashtrack::snn
