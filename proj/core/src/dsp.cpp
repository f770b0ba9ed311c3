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

#include "spira/dsp.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "dsp_internal.hpp"

namespace spira {

void SpectroConfig::validate() const {
  if (n_fft <= 0 || hop <= 0 || win_len <= 0 || n_mels <= 0 || sample_rate <= 0) {
    throw std::invalid_argument("SpectroConfig: sizes must be positive");
  }
  if (win_len > n_fft) throw std::invalid_argument("SpectroConfig: win_len > n_fft");
  if (hop > win_len) throw std::invalid_argument("SpectroConfig: hop > win_len");
  if (n_mels >= n_freq()) throw std::invalid_argument("SpectroConfig: n_mels >= n_freq");
  if (log_floor <= 0) throw std::invalid_argument("SpectroConfig: log_floor must be positive");
}

SpectroConfig SpectroConfig::set1() {
  SpectroConfig c;
  c.n_fft = 1200;
  c.hop = 160;
  c.win_len = 400;
  c.n_mels = 80;
  return c;
}

SpectroConfig SpectroConfig::set2() {
  SpectroConfig c;
  c.n_fft = 1024;
  c.hop = 320;
  c.win_len = 1024;
  c.n_mels = 64;
  return c;
}

SpectroConfig SpectroConfig::preset(int set) {
  if (set == 1) return set1();
  if (set == 2) return set2();
  throw std::invalid_argument("unknown spectrogram preset: " + std::to_string(set));
}

int stft_frames(std::size_t n_samples, const SpectroConfig& cfg) {
  return static_cast<int>(n_samples / static_cast<std::size_t>(cfg.hop)) + 1;
}

namespace {

// FFTW plans are cached per size; planning is not thread-safe, execution on
// caller-owned buffers is.
class FftPlans {
 public:
  static FftPlans& instance() {
    static FftPlans p;
    return p;
  }

  fftw_plan forward(int n) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = fwd_.find(n);
    if (it != fwd_.end()) return it->second;
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    fftw_plan p = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    fwd_[n] = p;
    return p;
  }

  fftw_plan backward(int n) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = bwd_.find(n);
    if (it != bwd_.end()) return it->second;
    fftw_complex* in = fftw_alloc_complex(n / 2 + 1);
    double* out = fftw_alloc_real(n);
    fftw_plan p = fftw_plan_dft_c2r_1d(n, in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    bwd_[n] = p;
    return p;
  }

 private:
  std::mutex mu_;
  std::map<int, fftw_plan> fwd_, bwd_;
};

struct FftwRealBuf {
  explicit FftwRealBuf(int n) : p(fftw_alloc_real(n)) {}
  ~FftwRealBuf() { fftw_free(p); }
  double* p;
};

struct FftwComplexBuf {
  explicit FftwComplexBuf(int n) : p(fftw_alloc_complex(n)) {}
  ~FftwComplexBuf() { fftw_free(p); }
  fftw_complex* p;
};

// Periodic Hann of win_len, zero-centered inside an n_fft frame.
std::vector<double> padded_hann(const SpectroConfig& cfg) {
  std::vector<double> w(static_cast<std::size_t>(cfg.n_fft), 0.0);
  const int off = (cfg.n_fft - cfg.win_len) / 2;
  for (int i = 0; i < cfg.win_len; ++i) {
    w[static_cast<std::size_t>(off + i)] =
        0.5 - 0.5 * std::cos(2.0 * M_PI * i / cfg.win_len);
  }
  return w;
}

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// Integral of the triangle with knots (a, b, c) over [x0, x1].
double triangle_integral(double a, double b, double c, double x0, double x1) {
  auto rise = [&](double x) { return (x - a) / (b - a); };
  auto fall = [&](double x) { return (c - x) / (c - b); };
  double total = 0.0;
  // Rising edge segment.
  {
    const double lo = std::max(x0, a);
    const double hi = std::min(x1, b);
    if (hi > lo) total += 0.5 * (rise(lo) + rise(hi)) * (hi - lo);
  }
  // Falling edge segment.
  {
    const double lo = std::max(x0, b);
    const double hi = std::min(x1, c);
    if (hi > lo) total += 0.5 * (fall(lo) + fall(hi)) * (hi - lo);
  }
  return total;
}

}  // namespace

namespace internal {
std::vector<double> reflect_pad(const std::vector<double>& x, int pad) {
  const auto n = static_cast<std::int64_t>(x.size());
  std::vector<double> out(x.size() + 2 * static_cast<std::size_t>(pad));
  auto reflect = [n](std::int64_t i) {
    if (n == 1) return std::int64_t{0};
    const std::int64_t period = 2 * (n - 1);
    std::int64_t j = ((i % period) + period) % period;
    return j < n ? j : period - j;
  };
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(out.size()); ++i) {
    out[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(reflect(i - pad))];
  }
  return out;
}
}  // namespace internal

ComplexSpectrogram stft(const AudioClip& clip, const SpectroConfig& cfg) {
  cfg.validate();
  if (clip.samples.empty()) throw std::invalid_argument("stft: empty clip");

  const int n_fft = cfg.n_fft;
  const int n_freq = cfg.n_freq();
  const int pad = n_fft / 2;
  const std::vector<double> window = padded_hann(cfg);
  const std::vector<double> padded = internal::reflect_pad(clip.samples, pad);
  const int frames = stft_frames(clip.samples.size(), cfg);

  ComplexSpectrogram spec;
  spec.magnitude = Mat(n_freq, frames);
  spec.phase = Mat(n_freq, frames);

  fftw_plan plan = FftPlans::instance().forward(n_fft);
  FftwRealBuf in(n_fft);
  FftwComplexBuf out(n_freq);

  for (int t = 0; t < frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * cfg.hop;
    for (int i = 0; i < n_fft; ++i) {
      in.p[i] = padded[start + static_cast<std::size_t>(i)] * window[static_cast<std::size_t>(i)];
    }
    fftw_execute_dft_r2c(plan, in.p, out.p);
    for (int k = 0; k < n_freq; ++k) {
      const double re = out.p[k][0];
      const double im = out.p[k][1];
      spec.magnitude(k, t) = std::hypot(re, im);
      spec.phase(k, t) = std::atan2(im, re);
    }
  }
  return spec;
}

AudioClip istft(const ComplexSpectrogram& spec, const SpectroConfig& cfg,
                std::int64_t length_hint) {
  cfg.validate();
  if (!spec.magnitude.same_shape(spec.phase)) {
    throw std::invalid_argument("istft: magnitude/phase shape mismatch");
  }
  if (spec.magnitude.rows != cfg.n_freq()) {
    throw std::invalid_argument("istft: spectrogram rows do not match config n_freq");
  }
  const int frames = spec.frames();
  if (frames <= 0) throw std::invalid_argument("istft: empty spectrogram");

  const int n_fft = cfg.n_fft;
  const int n_freq = cfg.n_freq();
  const int pad = n_fft / 2;
  const std::vector<double> window = padded_hann(cfg);

  const std::int64_t out_len =
      length_hint >= 0 ? length_hint : static_cast<std::int64_t>(frames - 1) * cfg.hop;
  const std::size_t padded_len =
      static_cast<std::size_t>(frames - 1) * cfg.hop + static_cast<std::size_t>(n_fft);
  std::vector<double> acc(padded_len, 0.0);
  std::vector<double> norm(padded_len, 0.0);

  fftw_plan plan = FftPlans::instance().backward(n_fft);
  FftwComplexBuf in(n_freq);
  FftwRealBuf out(n_fft);

  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < n_freq; ++k) {
      const double mag = spec.magnitude(k, t);
      const double ph = spec.phase(k, t);
      in.p[k][0] = mag * std::cos(ph);
      in.p[k][1] = mag * std::sin(ph);
    }
    fftw_execute_dft_c2r(plan, in.p, out.p);
    const std::size_t start = static_cast<std::size_t>(t) * cfg.hop;
    for (int i = 0; i < n_fft; ++i) {
      const double w = window[static_cast<std::size_t>(i)];
      if (w == 0.0) continue;
      // FFTW's c2r transform is unnormalized; divide by n_fft here.
      acc[start + static_cast<std::size_t>(i)] += w * out.p[i] / n_fft;
      norm[start + static_cast<std::size_t>(i)] += w * w;
    }
  }

  AudioClip clip;
  clip.sample_rate = cfg.sample_rate;
  clip.samples.resize(static_cast<std::size_t>(std::max<std::int64_t>(out_len, 0)), 0.0);
  for (std::int64_t i = 0; i < out_len; ++i) {
    const std::size_t j = static_cast<std::size_t>(i + pad);
    if (j < padded_len && norm[j] > 1e-12) {
      clip.samples[static_cast<std::size_t>(i)] = acc[j] / norm[j];
    }
  }
  return clip;
}

Mat mel_filterbank(const SpectroConfig& cfg) {
  cfg.validate();
  const int n_freq = cfg.n_freq();
  const double nyquist = cfg.sample_rate / 2.0;
  const double bin_width = static_cast<double>(cfg.sample_rate) / cfg.n_fft;

  // n_mels + 2 knots, uniform on the mel scale.
  std::vector<double> knots(static_cast<std::size_t>(cfg.n_mels) + 2);
  const double mel_max = hz_to_mel(nyquist);
  for (std::size_t i = 0; i < knots.size(); ++i) {
    knots[i] = mel_to_hz(mel_max * static_cast<double>(i) / (knots.size() - 1));
  }

  Mat fb(cfg.n_mels, n_freq);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double a = knots[static_cast<std::size_t>(m)];
    const double b = knots[static_cast<std::size_t>(m) + 1];
    const double c = knots[static_cast<std::size_t>(m) + 2];
    double row_sum = 0.0;
    for (int k = 0; k < n_freq; ++k) {
      const double f = k * bin_width;
      // Average of the triangle over the bin's frequency cell, clipped to
      // [0, nyquist]; this gives the edge bins nonzero coverage.
      const double x0 = std::max(0.0, f - bin_width / 2.0);
      const double x1 = std::min(nyquist, f + bin_width / 2.0);
      const double w = x1 > x0 ? triangle_integral(a, b, c, x0, x1) / (x1 - x0) : 0.0;
      fb(m, k) = w;
      row_sum += w;
    }
    if (row_sum <= 0.0) throw std::runtime_error("mel_filterbank: empty filter row");
    for (int k = 0; k < n_freq; ++k) fb(m, k) /= row_sum;
  }
  return fb;
}

std::vector<double> mel_center_freqs(const SpectroConfig& cfg) {
  std::vector<double> centers(static_cast<std::size_t>(cfg.n_mels));
  const double mel_max = hz_to_mel(cfg.sample_rate / 2.0);
  for (int m = 0; m < cfg.n_mels; ++m) {
    centers[static_cast<std::size_t>(m)] =
        mel_to_hz(mel_max * static_cast<double>(m + 1) / (cfg.n_mels + 1));
  }
  return centers;
}

MelSpectrogram log_mel(const ComplexSpectrogram& spec, const SpectroConfig& cfg) {
  cfg.validate();
  if (spec.magnitude.rows != cfg.n_freq()) {
    throw std::invalid_argument("log_mel: spectrogram rows do not match config n_freq");
  }
  const Mat fb = mel_filterbank(cfg);
  const int frames = spec.frames();

  MelSpectrogram mel;
  mel.config = cfg;
  mel.values = Mat(cfg.n_mels, frames);

  using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const EMat> fbm(fb.v.data(), fb.rows, fb.cols);
  Eigen::Map<const EMat> mag(spec.magnitude.v.data(), spec.magnitude.rows, frames);
  Eigen::Map<EMat> out(mel.values.v.data(), cfg.n_mels, frames);
  out.noalias() = fbm * mag;

  for (double& x : mel.values.v) x = std::log(std::max(x, cfg.log_floor));
  return mel;
}

namespace {

// Cached pseudo-inverse of the filterbank, keyed by preset geometry.
const Eigen::MatrixXd& filterbank_pinv(const SpectroConfig& cfg) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::unique_ptr<Eigen::MatrixXd>> cache;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_tuple(cfg.n_fft, cfg.n_mels, cfg.sample_rate);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;

  const Mat fb = mel_filterbank(cfg);
  using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const EMat> fbm(fb.v.data(), fb.rows, fb.cols);
  Eigen::MatrixXd dense = fbm;
  auto pinv = std::make_unique<Eigen::MatrixXd>(
      dense.completeOrthogonalDecomposition().pseudoInverse());
  const Eigen::MatrixXd& ref = *pinv;
  cache[key] = std::move(pinv);
  return ref;
}

}  // namespace

AudioClip inverse_log_mel(const MelSpectrogram& mel, const Mat& phase,
                          const SpectroConfig& cfg, std::int64_t length_hint) {
  cfg.validate();
  if (mel.values.rows != cfg.n_mels) {
    throw std::invalid_argument("inverse_log_mel: mel rows do not match config");
  }
  if (phase.rows != cfg.n_freq() || phase.cols != mel.values.cols) {
    throw std::invalid_argument("inverse_log_mel: phase shape mismatch");
  }

  const Eigen::MatrixXd& pinv = filterbank_pinv(cfg);  // [n_freq x n_mels]
  const int frames = mel.values.cols;

  Eigen::MatrixXd melmag(cfg.n_mels, frames);
  for (int m = 0; m < cfg.n_mels; ++m) {
    for (int t = 0; t < frames; ++t) melmag(m, t) = std::exp(mel.values(m, t));
  }
  Eigen::MatrixXd lin = pinv * melmag;

  ComplexSpectrogram spec;
  spec.magnitude = Mat(cfg.n_freq(), frames);
  spec.phase = phase;
  for (int k = 0; k < cfg.n_freq(); ++k) {
    for (int t = 0; t < frames; ++t) {
      spec.magnitude(k, t) = std::max(lin(k, t), 0.0);
    }
  }
  return istft(spec, cfg, length_hint);
}

}  // namespace spira
