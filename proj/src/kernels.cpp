#include "dashtrack/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dashtrack::kernels {

void conv2d_forward(const ConvShape& s, const double* in, const double* w,
                    const double* bias, double* out, Exec exec) {
  const int oh = s.out_h(), ow = s.out_w();
  par_for(s.out_ch * oh, exec, [&](int job) {
    const int oc = job / oh;
    const int oy = job % oh;
    const double* wc = w + static_cast<std::size_t>(oc) * s.in_ch * s.k * s.k;
    double* orow = out + (static_cast<std::size_t>(oc) * oh + oy) * ow;
    for (int ox = 0; ox < ow; ++ox) {
      double acc = bias ? bias[oc] : 0.0;
      for (int ic = 0; ic < s.in_ch; ++ic) {
        const double* iplane = in + static_cast<std::size_t>(ic) * s.in_h * s.in_w;
        const double* wk = wc + static_cast<std::size_t>(ic) * s.k * s.k;
        for (int ky = 0; ky < s.k; ++ky) {
          const int iy = oy * s.stride - s.pad + ky;
          if (iy < 0 || iy >= s.in_h) continue;
          for (int kx = 0; kx < s.k; ++kx) {
            const int ix = ox * s.stride - s.pad + kx;
            if (ix < 0 || ix >= s.in_w) continue;
            acc += wk[ky * s.k + kx] * iplane[iy * s.in_w + ix];
          }
        }
      }
      orow[ox] = acc;
    }
  });
}

void conv2d_backward_data(const ConvShape& s, const double* w, const double* gout,
                          double* gin, Exec exec) {
  const int oh = s.out_h(), ow = s.out_w();
  par_for(s.in_ch * s.in_h, exec, [&](int job) {
    const int ic = job / s.in_h;
    const int iy = job % s.in_h;
    double* grow = gin + (static_cast<std::size_t>(ic) * s.in_h + iy) * s.in_w;
    for (int ix = 0; ix < s.in_w; ++ix) {
      double acc = 0.0;
      for (int ky = 0; ky < s.k; ++ky) {
        const int ny = iy + s.pad - ky;
        if (ny < 0 || ny % s.stride != 0) continue;
        const int oy = ny / s.stride;
        if (oy >= oh) continue;
        for (int kx = 0; kx < s.k; ++kx) {
          const int nx = ix + s.pad - kx;
          if (nx < 0 || nx % s.stride != 0) continue;
          const int ox = nx / s.stride;
          if (ox >= ow) continue;
          for (int oc = 0; oc < s.out_ch; ++oc) {
            const double* wc = w + ((static_cast<std::size_t>(oc) * s.in_ch + ic) * s.k + ky) * s.k;
            const double* gplane = gout + static_cast<std::size_t>(oc) * oh * ow;
            acc += wc[kx] * gplane[oy * ow + ox];
          }
        }
      }
      grow[ix] = acc;
    }
  });
}

void conv2d_backward_weights(const ConvShape& s, const double* in, const double* gout,
                             double* gw, double* gbias, Exec exec) {
  const int oh = s.out_h(), ow = s.out_w();
  par_for(s.out_ch, exec, [&](int oc) {
    const double* gplane = gout + static_cast<std::size_t>(oc) * oh * ow;
    double* wc = gw + static_cast<std::size_t>(oc) * s.in_ch * s.k * s.k;
    for (int ic = 0; ic < s.in_ch; ++ic) {
      const double* iplane = in + static_cast<std::size_t>(ic) * s.in_h * s.in_w;
      for (int ky = 0; ky < s.k; ++ky) {
        for (int kx = 0; kx < s.k; ++kx) {
          double acc = 0.0;
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * s.stride - s.pad + ky;
            if (iy < 0 || iy >= s.in_h) continue;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * s.stride - s.pad + kx;
              if (ix < 0 || ix >= s.in_w) continue;
              acc += gplane[oy * ow + ox] * iplane[iy * s.in_w + ix];
            }
          }
          wc[(static_cast<std::size_t>(ic) * s.k + ky) * s.k + kx] = acc;
        }
      }
    }
    if (gbias) {
      double acc = 0.0;
      for (int i = 0; i < oh * ow; ++i) acc += gplane[i];
      gbias[oc] = acc;
    }
  });
}

void fc_forward(int n_in, int n_out, const double* in, const double* w,
                const double* bias, double* out, Exec exec) {
  par_for(n_out, exec, [&](int o) {
    const double* row = w + static_cast<std::size_t>(o) * n_in;
    double acc = bias ? bias[o] : 0.0;
    for (int i = 0; i < n_in; ++i) acc += row[i] * in[i];
    out[o] = acc;
  });
}

void fc_backward_data(int n_in, int n_out, const double* w, const double* gout,
                      double* gin, Exec exec) {
  par_for(n_in, exec, [&](int i) {
    double acc = 0.0;
    for (int o = 0; o < n_out; ++o) acc += w[static_cast<std::size_t>(o) * n_in + i] * gout[o];
    gin[i] = acc;
  });
}

void fc_backward_weights(int n_in, int n_out, const double* in, const double* gout,
                         double* gw, double* gbias, Exec exec) {
  par_for(n_out, exec, [&](int o) {
    double* row = gw + static_cast<std::size_t>(o) * n_in;
    const double g = gout[o];
    for (int i = 0; i < n_in; ++i) row[i] = g * in[i];
    if (gbias) gbias[o] = g;
  });
}

void maxpool_forward(int ch, int in_h, int in_w, int p, const double* in,
                     double* out, std::int32_t* argmax, Exec exec) {
  const int oh = in_h / p, ow = in_w / p;
  par_for(ch * oh, exec, [&](int job) {
    const int c = job / oh;
    const int oy = job % oh;
    const double* iplane = in + static_cast<std::size_t>(c) * in_h * in_w;
    const std::size_t obase = (static_cast<std::size_t>(c) * oh + oy) * ow;
    for (int ox = 0; ox < ow; ++ox) {
      int best = (oy * p) * in_w + ox * p;
      double bv = iplane[best];
      for (int ky = 0; ky < p; ++ky) {
        for (int kx = 0; kx < p; ++kx) {
          const int idx = (oy * p + ky) * in_w + (ox * p + kx);
          if (iplane[idx] > bv) {  // strict: ties keep the first
            bv = iplane[idx];
            best = idx;
          }
        }
      }
      out[obase + ox] = bv;
      argmax[obase + ox] = best;
    }
  });
}

void maxpool_backward(int ch, int in_h, int in_w, int p, const double* gout,
                      const std::int32_t* argmax, double* gin, Exec exec) {
  const int oh = in_h / p, ow = in_w / p;
  std::fill(gin, gin + static_cast<std::size_t>(ch) * in_h * in_w, 0.0);
  // pooling windows are disjoint, so scattering per output element is safe
  par_for(ch, exec, [&](int c) {
    double* iplane = gin + static_cast<std::size_t>(c) * in_h * in_w;
    const std::size_t obase = static_cast<std::size_t>(c) * oh * ow;
    for (int i = 0; i < oh * ow; ++i) iplane[argmax[obase + i]] += gout[obase + i];
  });
}

void lif_step_kernel(int n, double gamma, double v_th, double u_rest,
                     const double* u_prev, const double* input, double* u_pre,
                     double* spikes, double* u_post, Exec exec) {
  par_for(n, exec, [&](int i) {
    const double u = u_prev[i] * gamma + input[i];
    const double o = u > v_th ? 1.0 : 0.0;  // H(0) = 0
    u_pre[i] = u;
    spikes[i] = o;
    u_post[i] = o > 0.0 ? u_rest : u;
  });
}

namespace {

template <bool Clamp>
void blend_patches_impl(int w, int h, const double* prev, const double* next, int r,
                        const double* kw, double* out, Exec exec) {
  const int side = 2 * r + 1;
  const double* k0 = kw;
  const double* k1 = kw + static_cast<std::size_t>(side) * side;
  par_for(h, exec, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        const int sy = std::clamp(y + dy, 0, h - 1);  // replicate padding
        for (int dx = -r; dx <= r; ++dx) {
          const int sx = std::clamp(x + dx, 0, w - 1);
          const int ki = (dy + r) * side + (dx + r);
          const std::size_t si = static_cast<std::size_t>(sy) * w + sx;
          acc += k0[ki] * prev[si] + k1[ki] * next[si];
        }
      }
      if constexpr (Clamp) acc = std::clamp(acc, 0.0, 1.0);
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  });
}

}  // namespace

void blend_patches(int w, int h, const double* prev, const double* next, int r,
                   const double* kw, double* out, Exec exec) {
  blend_patches_impl<true>(w, h, prev, next, r, kw, out, exec);
}

void blend_patches_raw(int w, int h, const double* prev, const double* next, int r,
                       const double* kw, double* out, Exec exec) {
  blend_patches_impl<false>(w, h, prev, next, r, kw, out, exec);
}

void mask_fill(int w, int h, double cx, double cy, double half_w, double half_h,
               double sigma, double prefactor, double* out, Exec exec) {
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  par_for(h, exec, [&](int j) {
    for (int i = 0; i < w; ++i) {
      double m;
      if (std::abs(i - cx) <= half_w && std::abs(j - cy) <= half_h) {
        m = 1.0;
      } else {
        const double d2 = (i - cx) * (i - cx) + (j - cy) * (j - cy);
        m = std::max(prefactor * std::exp(-d2 * inv2s2),
                     std::numeric_limits<double>::denorm_min());
      }
      out[static_cast<std::size_t>(j) * w + i] = m;
    }
  });
}

void elemwise_mul(std::size_t n, const double* a, const double* b, double* out, Exec exec) {
  par_for(static_cast<int>(n), exec, [&](int i) { out[i] = a[i] * b[i]; });
}

}  // namespace dashtrack::kernels
