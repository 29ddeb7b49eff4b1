#pragma once

#include "dashtrack/parallel.hpp"

#include <cstdint>

namespace dashtrack::kernels {

inline int conv_out_dim(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

struct ConvShape {
  int in_ch, in_h, in_w;
  int out_ch, k, stride, pad;
  int out_h() const { return conv_out_dim(in_h, k, stride, pad); }
  int out_w() const { return conv_out_dim(in_w, k, stride, pad); }
  std::size_t weight_count() const {
    return static_cast<std::size_t>(out_ch) * in_ch * k * k;
  }
  std::size_t in_count() const { return static_cast<std::size_t>(in_ch) * in_h * in_w; }
  std::size_t out_count() const { return static_cast<std::size_t>(out_ch) * out_h() * out_w(); }
};

// 2-D convolution, zero padding. w layout [oc][ic][ky][kx]; bias may be null.
void conv2d_forward(const ConvShape& s, const double* in, const double* w,
                    const double* bias, double* out, Exec exec);
// Gradient w.r.t. the input (gather formulation, one writer per element).
void conv2d_backward_data(const ConvShape& s, const double* w, const double* gout,
                          double* gin, Exec exec);
// Gradients w.r.t. weights and bias (parallel over output channels).
void conv2d_backward_weights(const ConvShape& s, const double* in, const double* gout,
                             double* gw, double* gbias, Exec exec);

// Fully connected layer. w layout [out][in]; bias may be null.
void fc_forward(int n_in, int n_out, const double* in, const double* w,
                const double* bias, double* out, Exec exec);
void fc_backward_data(int n_in, int n_out, const double* w, const double* gout,
                      double* gin, Exec exec);
void fc_backward_weights(int n_in, int n_out, const double* in, const double* gout,
                         double* gw, double* gbias, Exec exec);

// Non-overlapping max pooling over each channel plane; ties keep the first
// element in row-major window order. argmax records the winning plane index.
void maxpool_forward(int ch, int in_h, int in_w, int p, const double* in,
                     double* out, std::int32_t* argmax, Exec exec);
void maxpool_backward(int ch, int in_h, int in_w, int p, const double* gout,
                      const std::int32_t* argmax, double* gin, Exec exec);

// One LIF timestep over n neurons: u_pre = u_prev * gamma + input, spike on
// u_pre > v_th (strict), post-spike potential resets to u_rest.
void lif_step_kernel(int n, double gamma, double v_th, double u_rest,
                     const double* u_prev, const double* input, double* u_pre,
                     double* spikes, double* u_post, Exec exec);

// Kernel-based two-frame synthesis: per output pixel, dot product of the two
// replicate-padded patches with the (2, 2r+1, 2r+1) kernel, clamped to [0,1].
void blend_patches(int w, int h, const double* prev, const double* next, int r,
                   const double* kw, double* out, Exec exec);
// Same, without the clamp (training-time raw prediction).
void blend_patches_raw(int w, int h, const double* prev, const double* next, int r,
                       const double* kw, double* out, Exec exec);

// Soft attention mask: 1 inside the box (|i-cx|<=half_w and |j-cy|<=half_h),
// prefactor * exp(-dist^2 / (2 sigma^2)) outside, floored at denorm_min.
void mask_fill(int w, int h, double cx, double cy, double half_w, double half_h,
               double sigma, double prefactor, double* out, Exec exec);

void elemwise_mul(std::size_t n, const double* a, const double* b, double* out, Exec exec);

}  // namespace dashtrack::kernels
