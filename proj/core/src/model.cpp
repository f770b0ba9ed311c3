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

#include "spira/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace spira {

using nn::Tensor;

ModelConfig ModelConfig::default_for(int rows, int cols) {
  ModelConfig cfg;
  cfg.conv_blocks = {{16, 3, 3, 1, 2, 2},
                     {32, 3, 3, 1, 2, 2},
                     {64, 3, 3, 1, 2, 2},
                     {64, 3, 3, 1, 2, 2}};
  cfg.dense_units = 32;
  cfg.input_rows = rows;
  cfg.input_cols = cols;
  cfg.validate();
  return cfg;
}

ModelConfig ModelConfig::tiny_for(int rows, int cols) {
  ModelConfig cfg;
  cfg.conv_blocks = {{8, 3, 3, 1, 4, 4}, {16, 3, 3, 1, 4, 4}};
  cfg.dense_units = 16;
  cfg.input_rows = rows;
  cfg.input_cols = cols;
  cfg.validate();
  return cfg;
}

std::pair<int, int> ModelConfig::map_shape_after(int blocks) const {
  int h = input_rows;
  int w = input_cols;
  for (int b = 0; b < blocks; ++b) {
    const ConvBlockSpec& s = conv_blocks[static_cast<std::size_t>(b)];
    h = (h + 2 * (s.kh / 2) - s.kh) / s.stride + 1;
    w = (w + 2 * (s.kw / 2) - s.kw) / s.stride + 1;
    h /= s.pool_h;
    w /= s.pool_w;
  }
  return {h, w};
}

void ModelConfig::validate() const {
  if (conv_blocks.empty()) throw std::invalid_argument("model: need at least one conv block");
  if (dense_units < 1) throw std::invalid_argument("model: dense_units must be >= 1");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw std::invalid_argument("model: dropout_rate must be in [0,1)");
  }
  if (input_rows < 1 || input_cols < 1) throw std::invalid_argument("model: bad input shape");
  for (const auto& b : conv_blocks) {
    if (b.out_channels < 1 || b.kh < 1 || b.kw < 1 || b.stride < 1 || b.pool_h < 1 ||
        b.pool_w < 1) {
      throw std::invalid_argument("model: bad conv block spec");
    }
  }
  const auto [h, w] = map_shape_after(static_cast<int>(conv_blocks.size()));
  if (h < 1 || w < 1) {
    throw std::invalid_argument("model: feature map collapses to zero size");
  }
}

namespace {

std::string block_name(int b) { return "block" + std::to_string(b + 1); }

}  // namespace

ModelState init_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ModelState st;
  st.config = cfg;
  st.rng_seed = seed;
  Rng rng(Rng::derive(seed, "model-init"));

  int cin = 1;
  for (std::size_t b = 0; b < cfg.conv_blocks.size(); ++b) {
    const ConvBlockSpec& s = cfg.conv_blocks[b];
    const std::string conv = "conv" + std::to_string(b + 1);
    const std::string bn = "bn" + std::to_string(b + 1);
    Tensor w({s.out_channels, cin, s.kh, s.kw});
    const double std_he = std::sqrt(2.0 / (cin * s.kh * s.kw));
    for (double& e : w.v) e = rng.normal(0.0, std_he);
    st.params[conv + ".w"] = std::move(w);
    st.params[conv + ".b"] = Tensor({s.out_channels});
    Tensor gamma({s.out_channels});
    for (double& e : gamma.v) e = 1.0;
    st.params[bn + ".gamma"] = std::move(gamma);
    st.params[bn + ".beta"] = Tensor({s.out_channels});
    st.buffers[bn + ".running_mean"] = Tensor({s.out_channels});
    Tensor rv({s.out_channels});
    for (double& e : rv.v) e = 1.0;
    st.buffers[bn + ".running_var"] = std::move(rv);
    cin = s.out_channels;
  }

  Tensor fc1w({cfg.dense_units, cin});
  const double std1 = std::sqrt(2.0 / cin);
  for (double& e : fc1w.v) e = rng.normal(0.0, std1);
  st.params["fc1.w"] = std::move(fc1w);
  st.params["fc1.b"] = Tensor({cfg.dense_units});
  Tensor fc2w({1, cfg.dense_units});
  // Small head keeps initial logits near zero (loss starts at ln 2).
  const double std2 = 0.1 * std::sqrt(1.0 / cfg.dense_units);
  for (double& e : fc2w.v) e = rng.normal(0.0, std2);
  st.params["fc2.w"] = std::move(fc2w);
  st.params["fc2.b"] = Tensor({1});
  return st;
}

// Cached intermediates of one batched forward pass.
struct Tape {
  Mode mode = Mode::eval;
  int batch = 0;
  struct BlockTape {
    nn::Conv2dCtx conv;
    nn::BatchNormCtx bn;
    Tensor bn_out;     // pre-relu
    Tensor relu_out;   // the Grad-CAM feature maps
    nn::MaxPoolCtx pool;
  };
  std::vector<BlockTape> blocks;
  std::vector<int> gap_in_shape;
  Tensor gap_out;    // [N,C]
  Tensor fc1_pre;    // pre-relu
  Tensor fc1_act;    // post-relu (pre-dropout)
  Tensor drop_mask;  // empty when dropout inactive
  Tensor fc2_in;
};

namespace {

const Tensor& param(const ModelState& st, const std::string& name) {
  auto it = st.params.find(name);
  if (it == st.params.end()) throw std::runtime_error("missing parameter: " + name);
  return it->second;
}

const Tensor& buffer(const ModelState& st, const std::string& name) {
  auto it = st.buffers.find(name);
  if (it == st.buffers.end()) throw std::runtime_error("missing buffer: " + name);
  return it->second;
}

}  // namespace

BatchForward batch_forward(const ModelState& state, const Tensor& x, Mode mode,
                           Rng* dropout_rng) {
  const ModelConfig& cfg = state.config;
  if (x.shape.size() != 4 || x.dim(1) != 1 || x.dim(2) != cfg.input_rows ||
      x.dim(3) != cfg.input_cols) {
    throw std::invalid_argument("forward: input shape mismatch");
  }
  const bool train = mode == Mode::train;
  if (train && cfg.dropout_rate > 0.0 && dropout_rng == nullptr) {
    throw std::invalid_argument("forward: dropout requires an rng in train mode");
  }

  auto tape = std::make_shared<Tape>();
  tape->mode = mode;
  tape->batch = x.dim(0);
  tape->blocks.resize(cfg.conv_blocks.size());

  Tensor cur = x;
  for (std::size_t b = 0; b < cfg.conv_blocks.size(); ++b) {
    const ConvBlockSpec& s = cfg.conv_blocks[b];
    const std::string conv = "conv" + std::to_string(b + 1);
    const std::string bn = "bn" + std::to_string(b + 1);
    Tape::BlockTape& bt = tape->blocks[b];
    cur = nn::conv2d_forward(cur, param(state, conv + ".w"), param(state, conv + ".b"),
                             s.stride, &bt.conv);
    bt.bn_out = nn::batchnorm_forward(cur, param(state, bn + ".gamma"),
                                      param(state, bn + ".beta"),
                                      buffer(state, bn + ".running_mean"),
                                      buffer(state, bn + ".running_var"), train, &bt.bn);
    bt.relu_out = nn::relu_forward(bt.bn_out);
    cur = nn::maxpool_forward(bt.relu_out, s.pool_h, s.pool_w, &bt.pool);
  }

  tape->gap_in_shape = cur.shape;
  tape->gap_out = nn::gap_forward(cur);
  tape->fc1_pre = nn::dense_forward(tape->gap_out, param(state, "fc1.w"),
                                    param(state, "fc1.b"));
  tape->fc1_act = nn::relu_forward(tape->fc1_pre);
  if (train && cfg.dropout_rate > 0.0) {
    tape->fc2_in = nn::dropout_forward(tape->fc1_act, cfg.dropout_rate, *dropout_rng,
                                       &tape->drop_mask);
  } else {
    tape->fc2_in = tape->fc1_act;
  }
  const Tensor logits = nn::dense_forward(tape->fc2_in, param(state, "fc2.w"),
                                          param(state, "fc2.b"));

  BatchForward out;
  out.tape = std::move(tape);
  out.revision = state.revision;
  out.logits.resize(static_cast<std::size_t>(x.dim(0)));
  out.probs.resize(out.logits.size());
  for (int n = 0; n < x.dim(0); ++n) {
    out.logits[static_cast<std::size_t>(n)] = logits.at2(n, 0);
    out.probs[static_cast<std::size_t>(n)] = nn::sigmoid(logits.at2(n, 0));
  }
  return out;
}

Gradients batch_backward(const ModelState& state, const BatchForward& fwd,
                         const std::vector<double>& dlogits,
                         bool want_feature_grads) {
  if (fwd.revision != state.revision) {
    throw std::runtime_error("backward: stale tape (state changed since forward)");
  }
  const Tape& tape = *fwd.tape;
  const ModelConfig& cfg = state.config;
  if (static_cast<int>(dlogits.size()) != tape.batch) {
    throw std::invalid_argument("backward: dlogits size mismatch");
  }

  Gradients g;
  Tensor d_logits({tape.batch, 1});
  for (int n = 0; n < tape.batch; ++n) d_logits.at2(n, 0) = dlogits[static_cast<std::size_t>(n)];

  Tensor d_fc2_in, d_fc2_w, d_fc2_b;
  nn::dense_backward(tape.fc2_in, param(state, "fc2.w"), d_logits, &d_fc2_in, &d_fc2_w,
                     &d_fc2_b);
  g.params["fc2.w"] = std::move(d_fc2_w);
  g.params["fc2.b"] = std::move(d_fc2_b);

  Tensor d_fc1_act = tape.drop_mask.v.empty()
                         ? std::move(d_fc2_in)
                         : nn::dropout_backward(tape.drop_mask, d_fc2_in);
  Tensor d_fc1_pre = nn::relu_backward(tape.fc1_pre, d_fc1_act);
  Tensor d_gap_out, d_fc1_w, d_fc1_b;
  nn::dense_backward(tape.gap_out, param(state, "fc1.w"), d_fc1_pre, &d_gap_out,
                     &d_fc1_w, &d_fc1_b);
  g.params["fc1.w"] = std::move(d_fc1_w);
  g.params["fc1.b"] = std::move(d_fc1_b);

  Tensor d_cur = nn::gap_backward(tape.gap_in_shape, d_gap_out);

  for (int b = static_cast<int>(cfg.conv_blocks.size()) - 1; b >= 0; --b) {
    const Tape::BlockTape& bt = tape.blocks[static_cast<std::size_t>(b)];
    const std::string conv = "conv" + std::to_string(b + 1);
    const std::string bn = "bn" + std::to_string(b + 1);

    Tensor d_relu_out = nn::maxpool_backward(bt.pool, d_cur);
    if (want_feature_grads) g.feature_maps[block_name(b)] = d_relu_out;
    Tensor d_bn_out = nn::relu_backward(bt.bn_out, d_relu_out);
    Tensor d_conv_out, d_gamma, d_beta;
    nn::batchnorm_backward(bt.bn, param(state, bn + ".gamma"), d_bn_out, &d_conv_out,
                           &d_gamma, &d_beta);
    g.params[bn + ".gamma"] = std::move(d_gamma);
    g.params[bn + ".beta"] = std::move(d_beta);
    Tensor d_in, d_w, d_b;
    nn::conv2d_backward(bt.conv, param(state, conv + ".w"), d_conv_out, &d_in, &d_w,
                        &d_b);
    g.params[conv + ".w"] = std::move(d_w);
    g.params[conv + ".b"] = std::move(d_b);
    d_cur = std::move(d_in);
  }
  return g;
}

void update_running_stats(ModelState& state, const BatchForward& fwd) {
  constexpr double kMomentum = 0.1;
  const Tape& tape = *fwd.tape;
  if (tape.mode != Mode::train) return;
  for (std::size_t b = 0; b < tape.blocks.size(); ++b) {
    const std::string bn = "bn" + std::to_string(b + 1);
    Tensor& rm = state.buffers[bn + ".running_mean"];
    Tensor& rv = state.buffers[bn + ".running_var"];
    const auto& ctx = tape.blocks[b].bn;
    for (std::size_t c = 0; c < rm.v.size(); ++c) {
      rm.v[c] = (1.0 - kMomentum) * rm.v[c] + kMomentum * ctx.mean[c];
      rv.v[c] = (1.0 - kMomentum) * rv.v[c] + kMomentum * ctx.var[c];
    }
  }
}

namespace {

Tensor tensor_from_feature(const FeatureMatrix& x) {
  Tensor t({1, 1, x.values.rows, x.values.cols});
  t.v = x.values.v;
  return t;
}

}  // namespace

TapedForward forward(const ModelState& state, const FeatureMatrix& x, Mode mode,
                     Rng* dropout_rng) {
  BatchForward bf = batch_forward(state, tensor_from_feature(x), mode, dropout_rng);
  TapedForward out;
  out.logit = bf.logits[0];
  out.probability = bf.probs[0];
  out.tape = bf.tape;
  out.revision = bf.revision;
  for (std::size_t b = 0; b < bf.tape->blocks.size(); ++b) {
    const Tensor& maps = bf.tape->blocks[b].relu_out;  // [1,C,H,W]
    Tensor slice({maps.dim(1), maps.dim(2), maps.dim(3)});
    slice.v.assign(maps.v.begin(), maps.v.end());
    out.feature_maps[block_name(static_cast<int>(b))] = std::move(slice);
  }
  return out;
}

Gradients backward(const ModelState& state, const TapedForward& taped,
                   double logit_weight) {
  BatchForward bf;
  bf.tape = taped.tape;
  bf.revision = taped.revision;
  bf.logits = {taped.logit};
  bf.probs = {taped.probability};
  Gradients g = batch_backward(state, bf, {logit_weight}, /*want_feature_grads=*/true);
  // Flatten the batch dimension off the feature-map gradients.
  for (auto& [name, grad] : g.feature_maps) {
    (void)name;
    grad.shape.erase(grad.shape.begin());
  }
  return g;
}

std::pair<double, double> predict_window(const ModelState& state,
                                         const FeatureMatrix& x) {
  const TapedForward tf = forward(state, x, Mode::eval);
  return {tf.probability, 1.0 - tf.probability};
}

TrainReport train(ModelState& state, const EpochDataFn& data,
                  const ValidateFn& validate, const TrainHyper& hp) {
  if (hp.batch_size < 1 || hp.max_epochs < 1 || hp.patience < 1) {
    throw std::invalid_argument("train: bad hyperparameters");
  }
  Rng rng(Rng::derive(hp.seed, "train"));
  Rng dropout_rng(Rng::derive(hp.seed, "dropout"));

  std::map<std::string, Tensor> velocity;
  for (const auto& [name, p] : state.params) velocity[name] = Tensor(p.shape);

  TrainReport report;
  std::map<std::string, Tensor> best_params;
  std::map<std::string, Tensor> best_buffers;

  state.training_flag = true;
  for (int epoch = 0; epoch < hp.max_epochs; ++epoch) {
    std::vector<WindowFeatures> samples = data(epoch);
    if (samples.empty()) throw std::invalid_argument("train: empty dataset");

    std::vector<int> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(rng.uniform_int(i + 1))]);
    }

    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (std::size_t batch_start = 0; batch_start < order.size();
         batch_start += static_cast<std::size_t>(hp.batch_size)) {
      const std::size_t nb =
          std::min<std::size_t>(static_cast<std::size_t>(hp.batch_size),
                                order.size() - batch_start);
      Tensor x({static_cast<int>(nb), 1, state.config.input_rows,
                state.config.input_cols});
      std::vector<double> y(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        const WindowFeatures& wf =
            samples[static_cast<std::size_t>(order[batch_start + k])];
        if (wf.features.values.rows != state.config.input_rows ||
            wf.features.values.cols != state.config.input_cols) {
          throw std::invalid_argument("train: sample shape does not match model input");
        }
        std::copy(wf.features.values.v.begin(), wf.features.values.v.end(),
                  x.v.begin() + static_cast<std::ptrdiff_t>(
                                    k * wf.features.values.v.size()));
        y[k] = wf.label_vec[0];
      }

      if (hp.mixup_enabled && nb > 1) {
        // Pair each element with a shuffled partner; Beta(alpha,alpha) weight
        // per pair, applied to inputs and targets alike.
        std::vector<std::size_t> perm(nb);
        for (std::size_t k = 0; k < nb; ++k) perm[k] = static_cast<std::size_t>(
            rng.uniform_int(static_cast<std::int64_t>(nb)));
        const std::size_t plane = x.v.size() / nb;
        const Tensor x_orig = x;
        const std::vector<double> y_orig = y;
        for (std::size_t k = 0; k < nb; ++k) {
          const double lambda = draw_lambda(hp.mixup, rng);
          const std::size_t j = perm[k];
          double* dst = x.v.data() + k * plane;
          const double* a = x_orig.v.data() + k * plane;
          const double* b = x_orig.v.data() + j * plane;
          for (std::size_t i = 0; i < plane; ++i) {
            dst[i] = lambda * a[i] + (1.0 - lambda) * b[i];
          }
          y[k] = lambda * y_orig[k] + (1.0 - lambda) * y_orig[j];
        }
      }

      BatchForward fwd = batch_forward(state, x, Mode::train, &dropout_rng);
      std::vector<double> dlogits(nb);
      double batch_loss = 0.0;
      for (std::size_t k = 0; k < nb; ++k) {
        batch_loss += nn::bce_loss(fwd.logits[k], y[k]);
        dlogits[k] = nn::bce_dlogit(fwd.logits[k], y[k]) / static_cast<double>(nb);
      }
      batch_loss /= static_cast<double>(nb);
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error(
            "train: NaN/inf loss at epoch " + std::to_string(epoch) +
            " (lr too high or degenerate input)");
      }
      loss_sum += batch_loss * static_cast<double>(nb);
      loss_count += nb;

      Gradients g = batch_backward(state, fwd, dlogits);
      for (auto& [name, grad] : g.params) {
        Tensor& vel = velocity[name];
        Tensor& p = state.params[name];
        for (std::size_t i = 0; i < p.v.size(); ++i) {
          vel.v[i] = hp.momentum * vel.v[i] - hp.lr * grad.v[i];
          p.v[i] += vel.v[i];
        }
      }
      update_running_stats(state, fwd);
      ++state.revision;
    }

    EpochStat stat;
    stat.epoch = epoch;
    stat.train_loss = loss_sum / static_cast<double>(loss_count);
    stat.val_acc = validate(state);
    report.curve.push_back(stat);

    if (report.best_epoch < 0 || stat.val_acc > report.best_val_acc) {
      report.best_epoch = epoch;
      report.best_val_acc = stat.val_acc;
      best_params = state.params;
      best_buffers = state.buffers;
    }
    if (epoch - report.best_epoch >= hp.patience) break;
  }

  if (report.best_epoch >= 0) {
    state.params = std::move(best_params);
    state.buffers = std::move(best_buffers);
    ++state.revision;
  }
  state.training_flag = false;
  return report;
}

void write_train_report_csv(const TrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << "epoch,train_loss,val_acc\n";
  char buf[96];
  for (const auto& s : report.curve) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g", s.epoch, s.train_loss, s.val_acc);
    out << buf << '\n';
  }
}

// ---- checkpoint serialization ----

namespace {

constexpr char kMagic[8] = {'S', 'P', 'N', 'E', 'T', 'v', '0', '1'};

void put_i32(std::ostream& out, std::int32_t x) {
  out.write(reinterpret_cast<const char*>(&x), 4);
}
void put_u64(std::ostream& out, std::uint64_t x) {
  out.write(reinterpret_cast<const char*>(&x), 8);
}
std::int32_t get_i32(std::istream& in) {
  std::int32_t x = 0;
  in.read(reinterpret_cast<char*>(&x), 4);
  return x;
}
std::uint64_t get_u64(std::istream& in) {
  std::uint64_t x = 0;
  in.read(reinterpret_cast<char*>(&x), 8);
  return x;
}

void put_tensor(std::ostream& out, const std::string& name, const Tensor& t,
                bool is_buffer) {
  const auto name_len = static_cast<std::int32_t>(name.size());
  put_i32(out, name_len);
  out.write(name.data(), name_len);
  out.put(is_buffer ? 1 : 0);
  put_i32(out, static_cast<std::int32_t>(t.shape.size()));
  for (const int d : t.shape) put_i32(out, d);
  out.write(reinterpret_cast<const char*>(t.v.data()),
            static_cast<std::streamsize>(t.v.size() * sizeof(double)));
}

}  // namespace

void save_state(const ModelState& state, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));

  const ModelConfig& cfg = state.config;
  put_i32(out, static_cast<std::int32_t>(cfg.conv_blocks.size()));
  for (const auto& b : cfg.conv_blocks) {
    put_i32(out, b.out_channels);
    put_i32(out, b.kh);
    put_i32(out, b.kw);
    put_i32(out, b.stride);
    put_i32(out, b.pool_h);
    put_i32(out, b.pool_w);
  }
  put_i32(out, cfg.dense_units);
  out.write(reinterpret_cast<const char*>(&cfg.dropout_rate), sizeof(double));
  put_i32(out, cfg.input_rows);
  put_i32(out, cfg.input_cols);
  put_u64(out, state.rng_seed);
  out.put(state.training_flag ? 1 : 0);
  put_u64(out, state.revision);

  put_i32(out, static_cast<std::int32_t>(state.params.size() + state.buffers.size()));
  for (const auto& [name, t] : state.params) put_tensor(out, name, t, false);
  for (const auto& [name, t] : state.buffers) put_tensor(out, name, t, true);
  if (!out) throw std::runtime_error("short write: " + path);
}

ModelState load_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint not found: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a valid checkpoint (bad magic/version): " + path);
  }

  ModelState st;
  const std::int32_t n_blocks = get_i32(in);
  if (n_blocks < 1 || n_blocks > 64) {
    throw std::runtime_error("corrupt checkpoint (block count): " + path);
  }
  st.config.conv_blocks.resize(static_cast<std::size_t>(n_blocks));
  for (auto& b : st.config.conv_blocks) {
    b.out_channels = get_i32(in);
    b.kh = get_i32(in);
    b.kw = get_i32(in);
    b.stride = get_i32(in);
    b.pool_h = get_i32(in);
    b.pool_w = get_i32(in);
  }
  st.config.dense_units = get_i32(in);
  in.read(reinterpret_cast<char*>(&st.config.dropout_rate), sizeof(double));
  st.config.input_rows = get_i32(in);
  st.config.input_cols = get_i32(in);
  st.rng_seed = get_u64(in);
  st.training_flag = in.get() != 0;
  st.revision = get_u64(in);
  if (!in) throw std::runtime_error("corrupt checkpoint (truncated header): " + path);
  st.config.validate();

  const std::int32_t n_tensors = get_i32(in);
  for (std::int32_t i = 0; i < n_tensors; ++i) {
    const std::int32_t name_len = get_i32(in);
    if (!in || name_len <= 0 || name_len > 256) {
      throw std::runtime_error("corrupt checkpoint (tensor name): " + path);
    }
    std::string name(static_cast<std::size_t>(name_len), '\0');
    in.read(name.data(), name_len);
    const bool is_buffer = in.get() != 0;
    const std::int32_t ndim = get_i32(in);
    if (!in || ndim < 1 || ndim > 8) {
      throw std::runtime_error("corrupt checkpoint (tensor rank): " + path);
    }
    std::vector<int> shape(static_cast<std::size_t>(ndim));
    for (auto& d : shape) d = get_i32(in);
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.v.data()),
            static_cast<std::streamsize>(t.v.size() * sizeof(double)));
    if (!in) throw std::runtime_error("corrupt checkpoint (tensor data): " + path);
    (is_buffer ? st.buffers : st.params)[name] = std::move(t);
  }
  return st;
}

}  // namespace spira
