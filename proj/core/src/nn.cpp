// Copyright 2026 The Spira Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spira/nn.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace spira::nn {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

#ifdef __GLIBC__
namespace {
// Activation tensors are tens of megabytes; without this, glibc serves them
// via mmap and returns the pages on every free, so each batch re-faults its
// whole working set.
struct MallocTuning {
  MallocTuning() {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
  }
};
const MallocTuning malloc_tuning;
}  // namespace
#endif

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
  std::size_t n = 1;
  for (const int d : shape) {
    if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
    n *= static_cast<std::size_t>(d);
  }
  v.assign(n, 0.0);
}

namespace {

int conv_out_dim(int in, int k, int stride) {
  const int pad = k / 2;
  return (in + 2 * pad - k) / stride + 1;
}

// Gathers the receptive fields of one sample into a [K x Ho*Wo] column
// matrix, K = Cin*kh*kw. The stride-1 path copies row segments wholesale.
void im2col(const Tensor& x, int n, int kh, int kw, int stride,
            std::vector<double>& col, int ho, int wo) {
  const int cin = x.dim(1);
  const int h = x.dim(2);
  const int w = x.dim(3);
  const int ph = kh / 2;
  const int pw = kw / 2;
  const int hw = ho * wo;
  const double* base =
      x.v.data() + static_cast<std::size_t>(n) * cin * h * w;
  std::size_t row = 0;
  for (int c = 0; c < cin; ++c) {
    const double* plane = base + static_cast<std::size_t>(c) * h * w;
    for (int i = 0; i < kh; ++i) {
      for (int j = 0; j < kw; ++j, ++row) {
        double* dst = col.data() + row * static_cast<std::size_t>(hw);
        for (int y = 0; y < ho; ++y) {
          const int sy = y * stride - ph + i;
          double* out_row = dst + static_cast<std::size_t>(y) * wo;
          if (sy < 0 || sy >= h) {
            std::fill(out_row, out_row + wo, 0.0);
            continue;
          }
          const double* in_row = plane + static_cast<std::size_t>(sy) * w;
          if (stride == 1) {
            // Valid z span: 0 <= z - pw + j < w.
            const int z_lo = std::max(0, pw - j);
            const int z_hi = std::min(wo, w + pw - j);
            std::fill(out_row, out_row + z_lo, 0.0);
            if (z_hi > z_lo) {
              std::copy(in_row + (z_lo - pw + j), in_row + (z_hi - pw + j),
                        out_row + z_lo);
            }
            std::fill(out_row + std::max(z_lo, z_hi), out_row + wo, 0.0);
          } else {
            for (int z = 0; z < wo; ++z) {
              const int sx = z * stride - pw + j;
              out_row[z] = (sx < 0 || sx >= w) ? 0.0 : in_row[sx];
            }
          }
        }
      }
    }
  }
}

void col2im_add(const std::vector<double>& col, int n, int cin, int h, int w,
                int kh, int kw, int stride, int ho, int wo, Tensor* dx) {
  const int ph = kh / 2;
  const int pw = kw / 2;
  const int hw = ho * wo;
  double* base = dx->v.data() + static_cast<std::size_t>(n) * cin * h * w;
  std::size_t row = 0;
  for (int c = 0; c < cin; ++c) {
    double* plane = base + static_cast<std::size_t>(c) * h * w;
    for (int i = 0; i < kh; ++i) {
      for (int j = 0; j < kw; ++j, ++row) {
        const double* src = col.data() + row * static_cast<std::size_t>(hw);
        for (int y = 0; y < ho; ++y) {
          const int sy = y * stride - ph + i;
          if (sy < 0 || sy >= h) continue;
          double* out_row = plane + static_cast<std::size_t>(sy) * w;
          const double* in_row = src + static_cast<std::size_t>(y) * wo;
          if (stride == 1) {
            const int z_lo = std::max(0, pw - j);
            const int z_hi = std::min(wo, w + pw - j);
            for (int z = z_lo; z < z_hi; ++z) out_row[z - pw + j] += in_row[z];
          } else {
            for (int z = 0; z < wo; ++z) {
              const int sx = z * stride - pw + j;
              if (sx >= 0 && sx < w) out_row[sx] += in_row[z];
            }
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b,
                      int stride, Conv2dCtx* ctx) {
  if (x.shape.size() != 4 || w.shape.size() != 4) {
    throw std::invalid_argument("conv2d: expected 4-d tensors");
  }
  if (x.dim(1) != w.dim(1)) throw std::invalid_argument("conv2d: channel mismatch");
  if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
  const int nb = x.dim(0);
  const int cout = w.dim(0);
  const int kh = w.dim(2);
  const int kw = w.dim(3);
  const int ho = conv_out_dim(x.dim(2), kh, stride);
  const int wo = conv_out_dim(x.dim(3), kw, stride);
  if (ho <= 0 || wo <= 0) throw std::invalid_argument("conv2d: output collapses to zero");

  const int k = x.dim(1) * kh * kw;
  const int hw = ho * wo;
  Tensor out({nb, cout, ho, wo});
  std::vector<double> col(static_cast<std::size_t>(k) * hw);

  Eigen::Map<const EMat> wm(w.v.data(), cout, k);
  for (int n = 0; n < nb; ++n) {
    im2col(x, n, kh, kw, stride, col, ho, wo);
    Eigen::Map<const EMat> cm(col.data(), k, hw);
    Eigen::Map<EMat> om(out.v.data() + static_cast<std::size_t>(n) * cout * hw, cout, hw);
    om.noalias() = wm * cm;
    for (int c = 0; c < cout; ++c) om.row(c).array() += b.v[static_cast<std::size_t>(c)];
  }
  if (ctx != nullptr) {
    ctx->input = x;
    ctx->stride = stride;
  }
  return out;
}

void conv2d_backward(const Conv2dCtx& ctx, const Tensor& w, const Tensor& d_out,
                     Tensor* dx, Tensor* dw, Tensor* db) {
  const Tensor& x = ctx.input;
  const int nb = x.dim(0);
  const int cin = x.dim(1);
  const int h = x.dim(2);
  const int wdt = x.dim(3);
  const int cout = w.dim(0);
  const int kh = w.dim(2);
  const int kw = w.dim(3);
  const int ho = d_out.dim(2);
  const int wo = d_out.dim(3);
  const int k = cin * kh * kw;
  const int hw = ho * wo;

  if (dx != nullptr) *dx = Tensor(x.shape);
  if (dw != nullptr) *dw = Tensor(w.shape);
  if (db != nullptr) *db = Tensor({cout});

  std::vector<double> col(static_cast<std::size_t>(k) * hw);
  std::vector<double> dcol(static_cast<std::size_t>(k) * hw);
  Eigen::Map<const EMat> wm(w.v.data(), cout, k);

  for (int n = 0; n < nb; ++n) {
    Eigen::Map<const EMat> dom(d_out.v.data() + static_cast<std::size_t>(n) * cout * hw,
                               cout, hw);
    if (dw != nullptr || db != nullptr) {
      im2col(x, n, kh, kw, ctx.stride, col, ho, wo);
      if (dw != nullptr) {
        Eigen::Map<const EMat> cm(col.data(), k, hw);
        Eigen::Map<EMat> dwm(dw->v.data(), cout, k);
        dwm.noalias() += dom * cm.transpose();
      }
      if (db != nullptr) {
        for (int c = 0; c < cout; ++c) db->v[static_cast<std::size_t>(c)] += dom.row(c).sum();
      }
    }
    if (dx != nullptr) {
      Eigen::Map<EMat> dcm(dcol.data(), k, hw);
      dcm.noalias() = wm.transpose() * dom;
      col2im_add(dcol, n, cin, h, wdt, kh, kw, ctx.stride, ho, wo, dx);
    }
  }
}

Tensor batchnorm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         const Tensor& running_mean, const Tensor& running_var,
                         bool train, BatchNormCtx* ctx) {
  if (x.shape.size() != 4) throw std::invalid_argument("batchnorm: expected 4-d input");
  const int nb = x.dim(0);
  const int ch = x.dim(1);
  const int h = x.dim(2);
  const int w = x.dim(3);
  const double m = static_cast<double>(nb) * h * w;

  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const std::size_t sample = static_cast<std::size_t>(ch) * plane;
  std::vector<double> mean(static_cast<std::size_t>(ch));
  std::vector<double> var(static_cast<std::size_t>(ch));
  if (train) {
    for (int c = 0; c < ch; ++c) {
      double s = 0.0;
      double sq = 0.0;
      for (int n = 0; n < nb; ++n) {
        const double* p = x.v.data() + static_cast<std::size_t>(n) * sample +
                          static_cast<std::size_t>(c) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          s += p[i];
          sq += p[i] * p[i];
        }
      }
      const double mu = s / m;
      mean[static_cast<std::size_t>(c)] = mu;
      var[static_cast<std::size_t>(c)] = std::max(sq / m - mu * mu, 0.0);
    }
  } else {
    for (int c = 0; c < ch; ++c) {
      mean[static_cast<std::size_t>(c)] = running_mean.v[static_cast<std::size_t>(c)];
      var[static_cast<std::size_t>(c)] = running_var.v[static_cast<std::size_t>(c)];
    }
  }

  Tensor out(x.shape);
  Tensor xhat(x.shape);
  std::vector<double> inv_std(static_cast<std::size_t>(ch));
  for (int c = 0; c < ch; ++c) {
    inv_std[static_cast<std::size_t>(c)] =
        1.0 / std::sqrt(var[static_cast<std::size_t>(c)] + kBnEps);
  }
  for (int n = 0; n < nb; ++n) {
    for (int c = 0; c < ch; ++c) {
      const double mu = mean[static_cast<std::size_t>(c)];
      const double is = inv_std[static_cast<std::size_t>(c)];
      const double g = gamma.v[static_cast<std::size_t>(c)];
      const double bt = beta.v[static_cast<std::size_t>(c)];
      const std::size_t off = static_cast<std::size_t>(n) * sample +
                              static_cast<std::size_t>(c) * plane;
      const double* px = x.v.data() + off;
      double* ph = xhat.v.data() + off;
      double* po = out.v.data() + off;
      for (std::size_t i = 0; i < plane; ++i) {
        const double xh = (px[i] - mu) * is;
        ph[i] = xh;
        po[i] = g * xh + bt;
      }
    }
  }
  if (ctx != nullptr) {
    ctx->xhat = std::move(xhat);
    ctx->mean = std::move(mean);
    ctx->var = std::move(var);
    ctx->inv_std = std::move(inv_std);
    ctx->train = train;
  }
  return out;
}

void batchnorm_backward(const BatchNormCtx& ctx, const Tensor& gamma,
                        const Tensor& d_out, Tensor* dx, Tensor* dgamma,
                        Tensor* dbeta) {
  const Tensor& xhat = ctx.xhat;
  const int nb = xhat.dim(0);
  const int ch = xhat.dim(1);
  const int h = xhat.dim(2);
  const int w = xhat.dim(3);
  const double m = static_cast<double>(nb) * h * w;

  if (dx != nullptr) *dx = Tensor(xhat.shape);
  if (dgamma != nullptr) *dgamma = Tensor({ch});
  if (dbeta != nullptr) *dbeta = Tensor({ch});

  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const std::size_t sample = static_cast<std::size_t>(ch) * plane;
  for (int c = 0; c < ch; ++c) {
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (int n = 0; n < nb; ++n) {
      const std::size_t off = static_cast<std::size_t>(n) * sample +
                              static_cast<std::size_t>(c) * plane;
      const double* pdy = d_out.v.data() + off;
      const double* ph = xhat.v.data() + off;
      for (std::size_t i = 0; i < plane; ++i) {
        sum_dy += pdy[i];
        sum_dy_xhat += pdy[i] * ph[i];
      }
    }
    if (dgamma != nullptr) dgamma->v[static_cast<std::size_t>(c)] = sum_dy_xhat;
    if (dbeta != nullptr) dbeta->v[static_cast<std::size_t>(c)] = sum_dy;
    if (dx == nullptr) continue;

    const double g = gamma.v[static_cast<std::size_t>(c)];
    const double is = ctx.inv_std[static_cast<std::size_t>(c)];
    for (int n = 0; n < nb; ++n) {
      const std::size_t off = static_cast<std::size_t>(n) * sample +
                              static_cast<std::size_t>(c) * plane;
      const double* pdy = d_out.v.data() + off;
      double* pdx = dx->v.data() + off;
      if (ctx.train) {
        // dx = g*is * (dy - mean(dy) - xhat * mean(dy*xhat))
        const double mean_dy = sum_dy / m;
        const double mean_dy_xhat = sum_dy_xhat / m;
        const double* ph = xhat.v.data() + off;
        for (std::size_t i = 0; i < plane; ++i) {
          pdx[i] = g * is * (pdy[i] - mean_dy - ph[i] * mean_dy_xhat);
        }
      } else {
        for (std::size_t i = 0; i < plane; ++i) pdx[i] = pdy[i] * g * is;
      }
    }
  }
}

Tensor relu_forward(const Tensor& x) {
  Tensor out = x;
  for (double& e : out.v) e = e > 0.0 ? e : 0.0;
  return out;
}

Tensor relu_backward(const Tensor& x, const Tensor& d_out) {
  Tensor dx = d_out;
  for (std::size_t i = 0; i < dx.v.size(); ++i) {
    if (x.v[i] <= 0.0) dx.v[i] = 0.0;
  }
  return dx;
}

Tensor maxpool_forward(const Tensor& x, int pool_h, int pool_w, MaxPoolCtx* ctx) {
  if (pool_h < 1 || pool_w < 1) throw std::invalid_argument("maxpool: bad pool size");
  const int nb = x.dim(0);
  const int ch = x.dim(1);
  const int h = x.dim(2);
  const int w = x.dim(3);
  const int ho = h / pool_h;
  const int wo = w / pool_w;
  if (ho <= 0 || wo <= 0) throw std::invalid_argument("maxpool: output collapses to zero");

  Tensor out({nb, ch, ho, wo});
  if (ctx != nullptr) {
    ctx->argmax.assign(out.numel(), 0);
    ctx->in_shape = x.shape;
  }
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::size_t idx = 0;
  for (int n = 0; n < nb; ++n) {
    for (int c = 0; c < ch; ++c) {
      const std::size_t off =
          (static_cast<std::size_t>(n) * ch + static_cast<std::size_t>(c)) * plane;
      const double* p = x.v.data() + off;
      for (int y = 0; y < ho; ++y) {
        for (int z = 0; z < wo; ++z, ++idx) {
          double best = -std::numeric_limits<double>::infinity();
          std::size_t best_at = 0;
          for (int i = 0; i < pool_h; ++i) {
            const double* row = p + static_cast<std::size_t>(y * pool_h + i) * w +
                                static_cast<std::size_t>(z) * pool_w;
            for (int j = 0; j < pool_w; ++j) {
              if (row[j] > best) {
                best = row[j];
                best_at = off + static_cast<std::size_t>(y * pool_h + i) * w +
                          static_cast<std::size_t>(z * pool_w + j);
              }
            }
          }
          out.v[idx] = best;
          if (ctx != nullptr) ctx->argmax[idx] = static_cast<std::int64_t>(best_at);
        }
      }
    }
  }
  return out;
}

Tensor maxpool_backward(const MaxPoolCtx& ctx, const Tensor& d_out) {
  Tensor dx(ctx.in_shape);
  for (std::size_t i = 0; i < d_out.v.size(); ++i) {
    dx.v[static_cast<std::size_t>(ctx.argmax[i])] += d_out.v[i];
  }
  return dx;
}

Tensor gap_forward(const Tensor& x) {
  const int nb = x.dim(0);
  const int ch = x.dim(1);
  const double hw = static_cast<double>(x.dim(2)) * x.dim(3);
  Tensor out({nb, ch});
  for (int n = 0; n < nb; ++n) {
    for (int c = 0; c < ch; ++c) {
      double s = 0.0;
      for (int y = 0; y < x.dim(2); ++y) {
        for (int z = 0; z < x.dim(3); ++z) s += x.at4(n, c, y, z);
      }
      out.at2(n, c) = s / hw;
    }
  }
  return out;
}

Tensor gap_backward(const std::vector<int>& in_shape, const Tensor& d_out) {
  Tensor dx(in_shape);
  const int nb = in_shape[0];
  const int ch = in_shape[1];
  const double hw = static_cast<double>(in_shape[2]) * in_shape[3];
  for (int n = 0; n < nb; ++n) {
    for (int c = 0; c < ch; ++c) {
      const double g = d_out.at2(n, c) / hw;
      for (int y = 0; y < in_shape[2]; ++y) {
        for (int z = 0; z < in_shape[3]; ++z) dx.at4(n, c, y, z) = g;
      }
    }
  }
  return dx;
}

Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
  const int nb = x.dim(0);
  const int in = x.dim(1);
  const int out_dim = w.dim(0);
  if (w.dim(1) != in) throw std::invalid_argument("dense: weight shape mismatch");
  Tensor out({nb, out_dim});
  Eigen::Map<const EMat> xm(x.v.data(), nb, in);
  Eigen::Map<const EMat> wm(w.v.data(), out_dim, in);
  Eigen::Map<EMat> om(out.v.data(), nb, out_dim);
  om.noalias() = xm * wm.transpose();
  for (int n = 0; n < nb; ++n) {
    for (int o = 0; o < out_dim; ++o) om(n, o) += b.v[static_cast<std::size_t>(o)];
  }
  return out;
}

void dense_backward(const Tensor& x, const Tensor& w, const Tensor& d_out,
                    Tensor* dx, Tensor* dw, Tensor* db) {
  const int nb = x.dim(0);
  const int in = x.dim(1);
  const int out_dim = w.dim(0);
  Eigen::Map<const EMat> xm(x.v.data(), nb, in);
  Eigen::Map<const EMat> wm(w.v.data(), out_dim, in);
  Eigen::Map<const EMat> dom(d_out.v.data(), nb, out_dim);
  if (dx != nullptr) {
    *dx = Tensor({nb, in});
    Eigen::Map<EMat> dxm(dx->v.data(), nb, in);
    dxm.noalias() = dom * wm;
  }
  if (dw != nullptr) {
    *dw = Tensor({out_dim, in});
    Eigen::Map<EMat> dwm(dw->v.data(), out_dim, in);
    dwm.noalias() = dom.transpose() * xm;
  }
  if (db != nullptr) {
    *db = Tensor({out_dim});
    for (int o = 0; o < out_dim; ++o) {
      db->v[static_cast<std::size_t>(o)] = dom.col(o).sum();
    }
  }
}

Tensor dropout_forward(const Tensor& x, double rate, Rng& rng, Tensor* mask) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate in [0,1)");
  Tensor out = x;
  Tensor m(x.shape);
  const double keep = 1.0 - rate;
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    const double kept = rng.uniform() >= rate ? 1.0 / keep : 0.0;
    m.v[i] = kept;
    out.v[i] *= kept;
  }
  if (mask != nullptr) *mask = std::move(m);
  return out;
}

Tensor dropout_backward(const Tensor& mask, const Tensor& d_out) {
  Tensor dx = d_out;
  for (std::size_t i = 0; i < dx.v.size(); ++i) dx.v[i] *= mask.v[i];
  return dx;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double bce_loss(double logit, double target) {
  // max(z,0) - z*y + log(1 + exp(-|z|))
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

double bce_dlogit(double logit, double target) { return sigmoid(logit) - target; }

}  // namespace spira::nn
