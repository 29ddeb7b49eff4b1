#include "dashtrack/ann.hpp"

#include <algorithm>
#include <cmath>

#include "dashtrack/kernels.hpp"

namespace dashtrack::ann {

using net::LayerKind;
using net::LayerPlan;

void AnnNetwork::validate() const {
  if (layers.empty()) throw ConfigError("frame net needs at least one layer");
  const auto& last = layers.back();
  if (last.spec.kind != LayerKind::Fc || last.spec.n_out != 4)
    throw ConfigError("frame net must end in FC4");
  if (!(lambda >= 0)) throw ConfigError("lambda must be >= 0");
  if (w.size() != layers.size() || b.size() != layers.size())
    throw ConfigError("weight array count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (w[l].size() != layers[l].weight_count())
      throw ConfigError("weight size mismatch at layer " + std::to_string(l));
    const std::size_t nb = layers[l].weight_count() == 0 ? 0 : layers[l].bias_count();
    if (b[l].size() != nb) throw ConfigError("bias size mismatch at layer " + std::to_string(l));
  }
}

AnnNetwork make_ann(const std::string& arch, net::TensorShape in, double lambda,
                    double init_gain, Rng& rng) {
  AnnNetwork net;
  net.in = in;
  net.layers = net::plan_layers(net::parse_arch(arch), in);
  net.lambda = lambda;
  net.w.resize(net.layers.size());
  net.b.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& plan = net.layers[l];
    net.w[l].resize(plan.weight_count());
    if (plan.weight_count() == 0) continue;
    const std::size_t fan_in = plan.spec.kind == LayerKind::Conv
                                   ? static_cast<std::size_t>(plan.in.c) * plan.spec.k * plan.spec.k
                                   : plan.in.count();
    net::he_init(net.w[l], fan_in, init_gain, rng);
    net.b[l].assign(plan.bias_count(), 0.0);
  }
  net.validate();
  return net;
}

net::Checkpoint to_checkpoint(const AnnNetwork& net) {
  net.validate();
  net::Checkpoint ckpt;
  ckpt.component = 'A';
  ckpt.in = net.in;
  std::vector<net::LayerSpec> specs;
  for (const auto& l : net.layers) specs.push_back(l.spec);
  ckpt.arch = net::arch_to_string(specs);
  ckpt.lambda = net.lambda;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (net.w[l].empty()) continue;
    ckpt.arrays.push_back(net.w[l]);
    ckpt.arrays.push_back(net.b[l]);
  }
  return ckpt;
}

AnnNetwork from_checkpoint(const net::Checkpoint& ckpt) {
  if (ckpt.component != 'A') throw DataError("checkpoint does not hold a frame net");
  AnnNetwork net;
  net.in = ckpt.in;
  net.layers = net::plan_layers(net::parse_arch(ckpt.arch), ckpt.in);
  net.lambda = ckpt.lambda;
  net.w.resize(net.layers.size());
  net.b.resize(net.layers.size());
  std::size_t next = 0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const std::size_t count = net.layers[l].weight_count();
    if (count == 0) continue;
    if (next >= ckpt.arrays.size() || ckpt.arrays[next].size() != count)
      throw DataError("checkpoint weight arrays do not match architecture");
    net.w[l] = ckpt.arrays[next++];
    if (next >= ckpt.arrays.size() || ckpt.arrays[next].size() != net.layers[l].bias_count())
      throw DataError("checkpoint bias arrays do not match architecture");
    net.b[l] = ckpt.arrays[next++];
  }
  if (next != ckpt.arrays.size()) throw DataError("checkpoint has extra weight arrays");
  net.validate();
  return net;
}

BBox ann_forward(const AnnNetwork& net, const std::vector<double>& input, Exec exec,
                 AnnTrace* trace) {
  net.validate();
  if (input.size() != net.in.count()) throw DataError("ann_forward: input size mismatch");
  if (trace) {
    trace->pre.assign(net.layers.size(), {});
    trace->act.assign(net.layers.size(), {});
    trace->argmax.assign(net.layers.size(), {});
  }
  std::vector<double> cur = input, next;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& plan = net.layers[l];
    const bool is_last = l + 1 == net.layers.size();
    next.assign(plan.out.count(), 0.0);
    switch (plan.spec.kind) {
      case LayerKind::MaxPool: {
        std::vector<std::int32_t> argmax(plan.out.count());
        kernels::maxpool_forward(plan.in.c, plan.in.h, plan.in.w, plan.spec.pool, cur.data(),
                                 next.data(), argmax.data(), exec);
        if (trace) trace->argmax[l] = std::move(argmax);
        break;
      }
      case LayerKind::Conv:
        kernels::conv2d_forward(plan.conv_shape(), cur.data(), net.w[l].data(),
                                net.b[l].data(), next.data(), exec);
        break;
      case LayerKind::Fc:
        kernels::fc_forward(static_cast<int>(plan.in.count()), plan.spec.n_out, cur.data(),
                            net.w[l].data(), net.b[l].data(), next.data(), exec);
        break;
    }
    if (trace) trace->pre[l] = next;
    if (!is_last && plan.spec.kind != LayerKind::MaxPool)
      for (auto& v : next) v = std::max(v, 0.0);
    if (trace) trace->act[l] = next;
    cur = std::move(next);
  }
  BBox pred{cur[0], cur[1], cur[2], cur[3]};
  if (trace) trace->pred = pred;
  return pred;
}

double ann_loss(const BBox& pred, const BBox& gt, const AnnNetwork& net) {
  const double dx = gt.x - pred.x, dy = gt.y - pred.y, dw = gt.w - pred.w, dh = gt.h - pred.h;
  double loss = dx * dx + dy * dy + dw * dw + dh * dh;
  double reg = 0.0;
  for (const auto& arr : net.w)
    for (double v : arr) reg += v * v;
  return loss + net.lambda * reg;
}

namespace {

AnnGrads zero_grads(const AnnNetwork& net) {
  AnnGrads g;
  g.w.resize(net.layers.size());
  g.b.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    g.w[l].assign(net.w[l].size(), 0.0);
    g.b[l].assign(net.b[l].size(), 0.0);
  }
  return g;
}

void backward_sample(const AnnNetwork& net, const std::vector<double>& input,
                     const BBox& gt, const AnnTrace& trace, double scale, AnnGrads& g,
                     Exec exec) {
  const std::size_t L = net.layers.size();
  std::vector<double> gout = {2.0 * (trace.pred.x - gt.x) * scale,
                              2.0 * (trace.pred.y - gt.y) * scale,
                              2.0 * (trace.pred.w - gt.w) * scale,
                              2.0 * (trace.pred.h - gt.h) * scale};
  std::vector<double> gin;
  for (std::size_t li = L; li-- > 0;) {
    const auto& plan = net.layers[li];
    const bool is_last = li + 1 == L;
    // gradient through ReLU (hidden conv/fc layers only)
    if (!is_last && plan.spec.kind != LayerKind::MaxPool)
      for (std::size_t i = 0; i < gout.size(); ++i)
        if (trace.pre[li][i] <= 0.0) gout[i] = 0.0;

    const std::vector<double>& in_act = li == 0 ? input : trace.act[li - 1];
    gin.assign(plan.in.count(), 0.0);
    switch (plan.spec.kind) {
      case LayerKind::MaxPool:
        kernels::maxpool_backward(plan.in.c, plan.in.h, plan.in.w, plan.spec.pool,
                                  gout.data(), trace.argmax[li].data(), gin.data(), exec);
        break;
      case LayerKind::Conv: {
        std::vector<double> gw(net.w[li].size()), gb(net.b[li].size());
        kernels::conv2d_backward_weights(plan.conv_shape(), in_act.data(), gout.data(),
                                         gw.data(), gb.data(), exec);
        kernels::conv2d_backward_data(plan.conv_shape(), net.w[li].data(), gout.data(),
                                      gin.data(), exec);
        for (std::size_t i = 0; i < gw.size(); ++i) g.w[li][i] += gw[i];
        for (std::size_t i = 0; i < gb.size(); ++i) g.b[li][i] += gb[i];
        break;
      }
      case LayerKind::Fc: {
        std::vector<double> gw(net.w[li].size()), gb(net.b[li].size());
        kernels::fc_backward_weights(static_cast<int>(plan.in.count()), plan.spec.n_out,
                                     in_act.data(), gout.data(), gw.data(), gb.data(), exec);
        kernels::fc_backward_data(static_cast<int>(plan.in.count()), plan.spec.n_out,
                                  net.w[li].data(), gout.data(), gin.data(), exec);
        for (std::size_t i = 0; i < gw.size(); ++i) g.w[li][i] += gw[i];
        for (std::size_t i = 0; i < gb.size(); ++i) g.b[li][i] += gb[i];
        break;
      }
    }
    gout = std::move(gin);
  }
}

}  // namespace

AnnGrads ann_grads(const AnnNetwork& net, const std::vector<AnnSample>& batch, Exec exec) {
  if (batch.empty()) throw DataError("ann_grads: empty batch");
  const double scale = 1.0 / static_cast<double>(batch.size());
  std::vector<AnnGrads> partial(batch.size());
  par_for(static_cast<int>(batch.size()), exec, [&](int s) {
    AnnTrace trace;
    ann_forward(net, batch[s].input, Exec::Serial, &trace);
    partial[s] = zero_grads(net);
    backward_sample(net, batch[s].input, batch[s].gt, trace, scale, partial[s], Exec::Serial);
  });
  AnnGrads g = zero_grads(net);
  for (const auto& p : partial) {
    for (std::size_t l = 0; l < g.w.size(); ++l) {
      for (std::size_t i = 0; i < g.w[l].size(); ++i) g.w[l][i] += p.w[l][i];
      for (std::size_t i = 0; i < g.b[l].size(); ++i) g.b[l][i] += p.b[l][i];
    }
  }
  for (std::size_t l = 0; l < g.w.size(); ++l)
    for (std::size_t i = 0; i < g.w[l].size(); ++i) g.w[l][i] += 2.0 * net.lambda * net.w[l][i];
  return g;
}

double batch_loss(const AnnNetwork& net, const std::vector<AnnSample>& batch, Exec exec) {
  if (batch.empty()) throw DataError("batch_loss: empty batch");
  std::vector<double> data_terms(batch.size());
  par_for(static_cast<int>(batch.size()), exec, [&](int s) {
    const BBox pred = ann_forward(net, batch[s].input, Exec::Serial);
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

std::vector<double> ann_train(AnnNetwork& net, const std::vector<AnnSample>& data,
                              const net::AdamConfig& opt, int epochs, int batch_size,
                              std::uint64_t seed, Exec exec) {
  if (data.empty()) throw DataError("ann_train: empty dataset");
  if (batch_size < 1) throw ConfigError("ann_train: batch_size must be >= 1");
  net.validate();

  std::size_t total = 0;
  for (std::size_t l = 0; l < net.w.size(); ++l) total += net.w[l].size() + net.b[l].size();
  net::Adam adam(opt, total);

  Rng rng(Rng::substream(seed, 0xa7a7, 0));
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(epochs));
  for (int epoch = 0; epoch < epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_loss = 0.0;
    int n_batches = 0;
    for (std::size_t pos = 0; pos < order.size(); pos += batch_size) {
      std::vector<AnnSample> batch;
      for (std::size_t i = pos; i < std::min(order.size(), pos + batch_size); ++i)
        batch.push_back(data[order[i]]);
      epoch_loss += batch_loss(net, batch, exec);
      ++n_batches;
      const AnnGrads g = ann_grads(net, batch, exec);
      adam.begin_step();
      std::size_t offset = 0;
      for (std::size_t l = 0; l < net.w.size(); ++l) {
        adam.update(net.w[l].data(), g.w[l].data(), net.w[l].size(), offset);
        offset += net.w[l].size();
        adam.update(net.b[l].data(), g.b[l].data(), net.b[l].size(), offset);
        offset += net.b[l].size();
      }
    }
    epoch_loss /= n_batches;
    if (!std::isfinite(epoch_loss)) throw NumericError("ann_train: loss diverged");
    history.push_back(epoch_loss);
  }
  return history;
}

}  // namespace dashtrack::ann
