#include "dashtrack/snn.hpp"

#include <algorithm>
#include <cmath>

#include "dashtrack/kernels.hpp"

namespace dashtrack::snn {

using net::LayerKind;
using net::LayerPlan;

void SnnNetwork::validate() const {
  if (layers.size() < 2) throw ConfigError("spiking net needs at least one spiking layer");
  const auto& dec = layers.back();
  if (dec.spec.kind != LayerKind::Fc || dec.spec.n_out != 4)
    throw ConfigError("spiking net must end in FC4 (decode layer)");
  if (decode_window < 1 || decode_window > time_window)
    throw ConfigError("decode_window must be in [1, time_window]");
  if (!(lambda >= 0)) throw ConfigError("lambda must be >= 0");
  lif.validate();
  if (w.size() != layers.size()) throw ConfigError("weight array count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l)
    if (w[l].size() != layers[l].weight_count())
      throw ConfigError("weight size mismatch at layer " + std::to_string(l));
  if (decode_bias.size() != 4) throw ConfigError("decode bias must have 4 entries");
}

SnnNetwork make_snn(const std::string& arch, net::TensorShape in, const net::LifParams& lif,
                    int time_window, int decode_window, double lambda, double init_gain,
                    Rng& rng) {
  SnnNetwork net;
  net.in = in;
  net.layers = net::plan_layers(net::parse_arch(arch), in);
  net.lif = lif;
  net.time_window = time_window;
  net.decode_window = decode_window;
  net.lambda = lambda;
  net.w.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    net.w[l].resize(net.layers[l].weight_count());
    const std::size_t fan_in = net.layers[l].spec.kind == LayerKind::Conv
                                   ? static_cast<std::size_t>(net.layers[l].in.c) *
                                         net.layers[l].spec.k * net.layers[l].spec.k
                                   : net.layers[l].in.count();
    if (!net.w[l].empty()) net::he_init(net.w[l], fan_in, init_gain, rng);
  }
  net.decode_bias.assign(4, 0.0);
  net.validate();
  return net;
}

net::Checkpoint to_checkpoint(const SnnNetwork& net) {
  net.validate();
  net::Checkpoint ckpt;
  ckpt.component = 'S';
  ckpt.in = net.in;
  std::vector<net::LayerSpec> specs;
  for (const auto& l : net.layers) specs.push_back(l.spec);
  ckpt.arch = net::arch_to_string(specs);
  ckpt.lambda = net.lambda;
  ckpt.lif = net.lif;
  ckpt.time_window = net.time_window;
  ckpt.decode_window = net.decode_window;
  for (const auto& arr : net.w)
    if (!arr.empty()) ckpt.arrays.push_back(arr);
  ckpt.arrays.push_back(net.decode_bias);
  return ckpt;
}

SnnNetwork from_checkpoint(const net::Checkpoint& ckpt) {
  if (ckpt.component != 'S') throw DataError("checkpoint does not hold a spiking net");
  SnnNetwork net;
  net.in = ckpt.in;
  net.layers = net::plan_layers(net::parse_arch(ckpt.arch), ckpt.in);
  net.lif = ckpt.lif;
  net.time_window = ckpt.time_window;
  net.decode_window = ckpt.decode_window;
  net.lambda = ckpt.lambda;
  net.w.resize(net.layers.size());
  std::size_t next = 0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const std::size_t count = net.layers[l].weight_count();
    if (count == 0) continue;
    if (next >= ckpt.arrays.size() || ckpt.arrays[next].size() != count)
      throw DataError("checkpoint weight arrays do not match architecture");
    net.w[l] = ckpt.arrays[next++];
  }
  if (next >= ckpt.arrays.size() || ckpt.arrays[next].size() != 4)
    throw DataError("checkpoint missing decode bias");
  net.decode_bias = ckpt.arrays[next++];
  if (next != ckpt.arrays.size()) throw DataError("checkpoint has extra weight arrays");
  net.validate();
  return net;
}

SpikeTensor encode_events(const std::vector<Event>& events, int height, int width, int T,
                          std::int64_t t0, std::int64_t window_ns) {
  if (T < 1) throw ConfigError("encode_events: T must be >= 1");
  if (window_ns <= 0 || window_ns % T != 0)
    throw ConfigError("encode_events: window must divide into T equal bins");
  const std::int64_t bin_ns = window_ns / T;
  SpikeTensor s(T, 2, height, width);
  for (const auto& e : events) {
    const std::int64_t off = e.t_ns - t0;
    if (off < 0 || off >= window_ns) continue;
    if (static_cast<int>(e.x) >= width || static_cast<int>(e.y) >= height)
      throw DataError("encode_events: event coordinates outside the sensor");
    const int bin = static_cast<int>(off / bin_ns);
    const int ch = e.p > 0 ? 0 : 1;
    s.at(bin, ch, e.y, e.x) = 1;
  }
  return s;
}

namespace {

// Input current for a spiking layer: weighted sum of upstream binary spikes.
void layer_current(const LayerPlan& plan, const std::vector<double>& w,
                   const double* in, double* out, Exec exec) {
  if (plan.spec.kind == LayerKind::Conv) {
    kernels::conv2d_forward(plan.conv_shape(), in, w.data(), nullptr, out, exec);
  } else {
    kernels::fc_forward(static_cast<int>(plan.in.count()), plan.spec.n_out, in, w.data(),
                        nullptr, out, exec);
  }
}

}  // namespace

BBox snn_forward(const SnnNetwork& net, const SpikeTensor& input, Exec exec, SnnTrace* trace) {
  net.validate();
  if (input.t != net.time_window || input.c != net.in.c || input.h != net.in.h ||
      input.w != net.in.w)
    throw DataError("snn_forward: input tensor shape mismatch");
  const int n_spk = net.n_spiking();
  const double gamma = net.lif.gamma();

  std::vector<std::vector<double>> membrane(n_spk);
  for (int l = 0; l < n_spk; ++l)
    membrane[l].assign(net.layers[l].out.count(), net.lif.u_rest);

  if (trace) {
    trace->spikes.assign(net.time_window, std::vector<std::vector<double>>(n_spk));
    trace->u_pre.assign(net.time_window, std::vector<std::vector<double>>(n_spk));
    trace->argmax.assign(net.time_window, std::vector<std::vector<std::int32_t>>(n_spk));
  }

  std::vector<double> counts(net.layers[n_spk - 1].out.count(), 0.0);
  std::vector<double> cur, next, current;
  for (int t = 0; t < net.time_window; ++t) {
    cur.assign(net.in.count(), 0.0);
    const std::size_t base = static_cast<std::size_t>(t) * net.in.count();
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = input.v[base + i];

    for (int l = 0; l < n_spk; ++l) {
      const auto& plan = net.layers[l];
      next.assign(plan.out.count(), 0.0);
      if (plan.spec.kind == LayerKind::MaxPool) {
        std::vector<std::int32_t> argmax(plan.out.count());
        kernels::maxpool_forward(plan.in.c, plan.in.h, plan.in.w, plan.spec.pool, cur.data(),
                                 next.data(), argmax.data(), exec);
        if (trace) trace->argmax[t][l] = std::move(argmax);
      } else {
        current.assign(plan.out.count(), 0.0);
        layer_current(plan, net.w[l], cur.data(), current.data(), exec);
        std::vector<double> u_pre(plan.out.count());
        kernels::lif_step_kernel(static_cast<int>(plan.out.count()), gamma, net.lif.v_th,
                                 net.lif.u_rest, membrane[l].data(), current.data(),
                                 u_pre.data(), next.data(), membrane[l].data(), exec);
        if (trace) trace->u_pre[t][l] = std::move(u_pre);
      }
      if (trace) trace->spikes[t][l] = next;
      cur = std::move(next);
    }
    if (t >= net.time_window - net.decode_window)
      for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += cur[i];
  }

  std::vector<double> out(4);
  kernels::fc_forward(static_cast<int>(counts.size()), 4, counts.data(),
                      net.w.back().data(), net.decode_bias.data(), out.data(), exec);
  BBox pred{out[0], out[1], out[2], out[3]};
  if (trace) {
    trace->counts = std::move(counts);
    trace->pred = pred;
  }
  return pred;
}

double snn_loss(const BBox& pred, const BBox& gt, const SnnNetwork& net) {
  const double dx = gt.x - pred.x, dy = gt.y - pred.y, dw = gt.w - pred.w, dh = gt.h - pred.h;
  double loss = dx * dx + dy * dy + dw * dw + dh * dh;
  double reg = 0.0;
  for (const auto& arr : net.w)
    for (double v : arr) reg += v * v;
  return loss + net.lambda * reg;
}

namespace {

SnnGrads zero_grads(const SnnNetwork& net) {
  SnnGrads g;
  g.w.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) g.w[l].assign(net.w[l].size(), 0.0);
  g.decode_bias.assign(4, 0.0);
  return g;
}

// Backward for one sample; accumulates scaled data-term gradients into g.
void backward_sample(const SnnNetwork& net, const SpikeTensor& input, const BBox& gt,
                     const SnnTrace& trace, double scale, SnnGrads& g, Exec exec) {
  const int n_spk = net.n_spiking();
  const double gamma = net.lif.gamma();
  const double a = net.lif.a();
  const double inv_a = 1.0 / a;

  // decode layer
  const double gpred[4] = {2.0 * (trace.pred.x - gt.x) * scale,
                           2.0 * (trace.pred.y - gt.y) * scale,
                           2.0 * (trace.pred.w - gt.w) * scale,
                           2.0 * (trace.pred.h - gt.h) * scale};
  const int n_counts = static_cast<int>(trace.counts.size());
  {
    std::vector<double> gw(net.w.back().size());
    std::vector<double> gb(4);
    kernels::fc_backward_weights(n_counts, 4, trace.counts.data(), gpred, gw.data(), gb.data(),
                                 exec);
    for (std::size_t i = 0; i < gw.size(); ++i) g.w.back()[i] += gw[i];
    for (int i = 0; i < 4; ++i) g.decode_bias[i] += gb[i];
  }
  std::vector<double> gcounts(n_counts);
  kernels::fc_backward_data(n_counts, 4, net.w.back().data(), gpred, gcounts.data(), exec);

  // go[l]: dL/d(spikes of layer l at the timestep being processed);
  // gu_next[l]: dL/d(post-reset membrane) flowing back from the next step.
  std::vector<std::vector<double>> gu_next(n_spk);
  for (int l = 0; l < n_spk; ++l) gu_next[l].assign(net.layers[l].out.count(), 0.0);

  std::vector<double> gin_buf, du_pre;
  std::vector<std::vector<double>> go(n_spk);
  for (int t = net.time_window - 1; t >= 0; --t) {
    for (int l = 0; l < n_spk; ++l) go[l].assign(net.layers[l].out.count(), 0.0);
    if (t >= net.time_window - net.decode_window)
      for (int i = 0; i < n_counts; ++i) go[n_spk - 1][i] += gcounts[i];

    for (int l = n_spk - 1; l >= 0; --l) {
      const auto& plan = net.layers[l];
      const std::size_t n_out = plan.out.count();

      if (plan.spec.kind == LayerKind::MaxPool) {
        gin_buf.assign(plan.in.count(), 0.0);
        kernels::maxpool_backward(plan.in.c, plan.in.h, plan.in.w, plan.spec.pool,
                                  go[l].data(), trace.argmax[t][l].data(), gin_buf.data(),
                                  exec);
        if (l > 0)
          for (std::size_t i = 0; i < gin_buf.size(); ++i) go[l - 1][i] += gin_buf[i];
        continue;
      }

      // LIF backward: spike path through the rectangle surrogate, membrane
      // path through the detached reset mask (1 - o).
      const auto& u_pre = trace.u_pre[t][l];
      const auto& o = trace.spikes[t][l];
      du_pre.assign(n_out, 0.0);
      for (std::size_t i = 0; i < n_out; ++i) {
        const double h = std::abs(u_pre[i] - net.lif.v_th) < a / 2 ? inv_a : 0.0;
        du_pre[i] = go[l][i] * h + gu_next[l][i] * (1.0 - o[i]);
      }
      for (std::size_t i = 0; i < n_out; ++i) gu_next[l][i] = gamma * du_pre[i];

      const double* layer_in =
          l == 0 ? nullptr : trace.spikes[t][l - 1].data();
      std::vector<double> input_t;
      if (l == 0) {
        input_t.resize(net.in.count());
        const std::size_t base = static_cast<std::size_t>(t) * net.in.count();
        for (std::size_t i = 0; i < input_t.size(); ++i) input_t[i] = input.v[base + i];
        layer_in = input_t.data();
      }

      std::vector<double> gw(net.w[l].size());
      if (plan.spec.kind == LayerKind::Conv) {
        kernels::conv2d_backward_weights(plan.conv_shape(), layer_in, du_pre.data(), gw.data(),
                                         nullptr, exec);
        if (l > 0) {
          gin_buf.assign(plan.in.count(), 0.0);
          kernels::conv2d_backward_data(plan.conv_shape(), net.w[l].data(), du_pre.data(),
                                        gin_buf.data(), exec);
          for (std::size_t i = 0; i < gin_buf.size(); ++i) go[l - 1][i] += gin_buf[i];
        }
      } else {
        kernels::fc_backward_weights(static_cast<int>(plan.in.count()), plan.spec.n_out,
                                     layer_in, du_pre.data(), gw.data(), nullptr, exec);
        if (l > 0) {
          gin_buf.assign(plan.in.count(), 0.0);
          kernels::fc_backward_data(static_cast<int>(plan.in.count()), plan.spec.n_out,
                                    net.w[l].data(), du_pre.data(), gin_buf.data(), exec);
          for (std::size_t i = 0; i < gin_buf.size(); ++i) go[l - 1][i] += gin_buf[i];
        }
      }
      for (std::size_t i = 0; i < gw.size(); ++i) g.w[l][i] += gw[i];
    }
  }
}

}  // namespace

SnnGrads bptt_grads(const SnnNetwork& net, const std::vector<SnnSample>& batch, Exec exec) {
  if (batch.empty()) throw DataError("bptt_grads: empty batch");
  const double scale = 1.0 / static_cast<double>(batch.size());

  // Per-sample gradients land in private buffers and are reduced in sample
  // order, so the result is independent of the execution policy.
  std::vector<SnnGrads> partial(batch.size());
  par_for(static_cast<int>(batch.size()), exec, [&](int s) {
    SnnTrace trace;
    snn_forward(net, batch[s].input, Exec::Serial, &trace);
    partial[s] = zero_grads(net);
    backward_sample(net, batch[s].input, batch[s].gt, trace, scale, partial[s], Exec::Serial);
  });

  SnnGrads g = zero_grads(net);
  for (const auto& p : partial) {
    for (std::size_t l = 0; l < g.w.size(); ++l)
      for (std::size_t i = 0; i < g.w[l].size(); ++i) g.w[l][i] += p.w[l][i];
    for (int i = 0; i < 4; ++i) g.decode_bias[i] += p.decode_bias[i];
  }
  for (std::size_t l = 0; l < g.w.size(); ++l)
    for (std::size_t i = 0; i < g.w[l].size(); ++i) g.w[l][i] += 2.0 * net.lambda * net.w[l][i];
  return g;
}

double batch_loss(const SnnNetwork& net, const std::vector<SnnSample>& batch, Exec exec) {
  if (batch.empty()) throw DataError("batch_loss: empty batch");
  std::vector<double> data_terms(batch.size());
  par_for(static_cast<int>(batch.size()), exec, [&](int s) {
    const BBox pred = snn_forward(net, batch[s].input, Exec::Serial);
    const BBox& gt = batch[s].gt;
    const double dx = gt.x - pred.x, dy = gt.y - pred.y;
    const double dw = gt.w - pred.w, dh = gt.h - pred.h;
    data_terms[s] = dx * dx + dy * dy + dw * dw + dh * dh;
  });
  double data = 0.0;
  for (double d : data_terms) data += d;
  data /= static_cast<double>(batch.size());
  double reg = 0.0;
  for (const auto& arr : net.w)
    for (double v : arr) reg += v * v;
  return data + net.lambda * reg;
}

std::vector<double> snn_train(SnnNetwork& net, const std::vector<SnnSample>& data,
                              const net::AdamConfig& opt, int epochs, int batch_size,
                              std::uint64_t seed, Exec exec) {
  if (data.empty()) throw DataError("snn_train: empty dataset");
  if (batch_size < 1) throw ConfigError("snn_train: batch_size must be >= 1");
  net.validate();

  std::size_t total = 0;
  for (const auto& arr : net.w) total += arr.size();
  total += net.decode_bias.size();
  net::Adam adam(opt, total);

  Rng rng(Rng::substream(seed, 0x5a5a, 0));
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(epochs));
  for (int epoch = 0; epoch < epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_loss = 0.0;
    int n_batches = 0;
    for (std::size_t pos = 0; pos < order.size(); pos += batch_size) {
      std::vector<SnnSample> batch;
      for (std::size_t i = pos; i < std::min(order.size(), pos + batch_size); ++i)
        batch.push_back(data[order[i]]);
      epoch_loss += batch_loss(net, batch, exec);
      ++n_batches;
      const SnnGrads g = bptt_grads(net, batch, exec);
      adam.begin_step();
      std::size_t offset = 0;
      for (std::size_t l = 0; l < net.w.size(); ++l) {
        adam.update(net.w[l].data(), g.w[l].data(), net.w[l].size(), offset);
        offset += net.w[l].size();
      }
      adam.update(net.decode_bias.data(), g.decode_bias.data(), 4, offset);
    }
    epoch_loss /= n_batches;
    if (!std::isfinite(epoch_loss)) throw NumericError("snn_train: loss diverged");
    history.push_back(epoch_loss);
  }
  return history;
}

}  // namespace dashtrack::snn
