#pragma once

#include "dashtrack/kernels.hpp"
#include "dashtrack/rng.hpp"
#include "dashtrack/types.hpp"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace dashtrack::net {

struct TensorShape {
  int c = 0, h = 0, w = 0;
  std::size_t count() const { return static_cast<std::size_t>(c) * h * w; }
  bool operator==(const TensorShape&) const = default;
};

enum class LayerKind { Conv, MaxPool, Fc };

/// One token of an architecture string: "<n>C<k>S<s>" convolution (stride
/// optional, padding (k-1)/2), "MP<p>" max pooling, "FC<n>" fully connected.
struct LayerSpec {
  LayerKind kind = LayerKind::Fc;
  int out_ch = 0, k = 0, stride = 1;  // conv
  int pool = 0;                       // maxpool
  int n_out = 0;                      // fc

  bool operator==(const LayerSpec&) const = default;
};

std::vector<LayerSpec> parse_arch(const std::string& s);
std::string arch_to_string(const std::vector<LayerSpec>& specs);

/// A LayerSpec resolved against concrete input/output shapes.
struct LayerPlan {
  LayerSpec spec;
  TensorShape in, out;

  std::size_t weight_count() const;
  std::size_t bias_count() const;  // natural bias size; nets may opt out
  kernels::ConvShape conv_shape() const;
};

/// Propagate shapes through the stack; throws ConfigError on collapse.
std::vector<LayerPlan> plan_layers(const std::vector<LayerSpec>& specs, TensorShape in);

/// Scaled normal init: w ~ N(0, gain / sqrt(fan_in)).
void he_init(std::vector<double>& w, std::size_t fan_in, double gain, Rng& rng);

struct AdamConfig {
  double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

/// ADAM with bias correction; updates are applied serially in index order so
/// training is deterministic.
class Adam {
 public:
  Adam(AdamConfig cfg, std::size_t n) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}
  void begin_step() { ++t_; }
  void update(double* w, const double* g, std::size_t count, std::size_t offset);

 private:
  AdamConfig cfg_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

/// Leaky integrate-and-fire parameters shared by the spiking stack.
struct LifParams {
  double tau = 2.0;          // membrane time constant
  double dt = 1.0;           // simulation timestep, same unit as tau
  double v_th = 1.0;         // firing threshold
  double u_rest = 0.0;       // post-spike potential
  double surrogate_a = 0.0;  // rectangle width; 0 means "use v_th"

  double gamma() const { return std::exp(-dt / tau); }
  double a() const { return surrogate_a > 0 ? surrogate_a : v_th; }
  void validate() const;
};

/// Self-describing weight container for both network kinds. Weights are
/// stored little-endian f32 on disk and held as double in memory; a read
/// followed by a write reproduces the file bit-exactly.
struct Checkpoint {
  char component = 'A';  // 'A' frame net, 'S' spiking net
  TensorShape in;
  std::string arch;
  double lambda = 0.0;
  LifParams lif;               // meaningful for component 'S'
  int time_window = 0;         // T, spiking only
  int decode_window = 0;       // delta-t, spiking only
  std::vector<std::vector<double>> arrays;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Loss history CSV: header "epoch,loss", one row per epoch.
void write_loss_csv(const std::filesystem::path& path, const std::vector<double>& losses);

}  // namespace dashtrack::net
