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

#ifndef SPIRA_NN_HPP_
#define SPIRA_NN_HPP_

#include <cstdint>
#include <vector>

#include "spira/rng.hpp"

namespace spira::nn {

/// Flat dense tensor, row-major over the trailing dimensions.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);

  std::size_t numel() const { return v.size(); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

  // [N,C,H,W] accessor.
  double& at4(int n, int c, int h, int w) {
    return v[((static_cast<std::size_t>(n) * dim(1) + c) * dim(2) + h) * dim(3) + w];
  }
  double at4(int n, int c, int h, int w) const {
    return v[((static_cast<std::size_t>(n) * dim(1) + c) * dim(2) + h) * dim(3) + w];
  }
  // [N,C] accessor.
  double& at2(int n, int c) { return v[static_cast<std::size_t>(n) * dim(1) + c]; }
  double at2(int n, int c) const { return v[static_cast<std::size_t>(n) * dim(1) + c]; }
};

inline constexpr double kBnEps = 1e-5;

// ---- convolution (zero padding kh/2 x kw/2, configurable stride) ----

struct Conv2dCtx {
  Tensor input;
  int stride = 1;
};

/// x [N,Cin,H,W] * w [Cout,Cin,kh,kw] + b [Cout] -> [N,Cout,Ho,Wo].
Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b,
                      int stride, Conv2dCtx* ctx);
void conv2d_backward(const Conv2dCtx& ctx, const Tensor& w, const Tensor& d_out,
                     Tensor* dx, Tensor* dw, Tensor* db);

// ---- batch normalization (per channel) ----

struct BatchNormCtx {
  Tensor xhat;
  std::vector<double> mean, var, inv_std;  // per channel
  bool train = false;
};

/// Train mode normalizes by biased batch statistics; eval mode by the
/// running buffers.
Tensor batchnorm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         const Tensor& running_mean, const Tensor& running_var,
                         bool train, BatchNormCtx* ctx);
void batchnorm_backward(const BatchNormCtx& ctx, const Tensor& gamma,
                        const Tensor& d_out, Tensor* dx, Tensor* dgamma,
                        Tensor* dbeta);

// ---- relu ----

Tensor relu_forward(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& d_out);

// ---- max pooling (kernel == stride) ----

struct MaxPoolCtx {
  std::vector<std::int64_t> argmax;  // flat input index per output cell
  std::vector<int> in_shape;
};

Tensor maxpool_forward(const Tensor& x, int pool_h, int pool_w, MaxPoolCtx* ctx);
Tensor maxpool_backward(const MaxPoolCtx& ctx, const Tensor& d_out);

// ---- global average pool: [N,C,H,W] -> [N,C] ----

Tensor gap_forward(const Tensor& x);
Tensor gap_backward(const std::vector<int>& in_shape, const Tensor& d_out);

// ---- dense: y[N,O] = x[N,I] * w[O,I]^T + b ----

Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b);
void dense_backward(const Tensor& x, const Tensor& w, const Tensor& d_out,
                    Tensor* dx, Tensor* dw, Tensor* db);

// ---- inverted dropout ----

Tensor dropout_forward(const Tensor& x, double rate, Rng& rng, Tensor* mask);
Tensor dropout_backward(const Tensor& mask, const Tensor& d_out);

// ---- binary cross entropy on a logit ----

double sigmoid(double z);
double bce_loss(double logit, double target);
double bce_dlogit(double logit, double target);

}  // namespace spira::nn

#endif  // SPIRA_NN_HPP_
