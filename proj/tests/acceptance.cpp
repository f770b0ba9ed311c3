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
//
// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "gradcheck.hpp"
#include "spira/config.hpp"
#include "spira/eval.hpp"
#include "spira/explain.hpp"
#include "spira/model.hpp"
#include "spira/pipeline.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace spira;
namespace tu = spira::testutil;
namespace gc = spira::gradcheck;

namespace {

int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int id, bool pass, const std::string& what, const std::string& detail,
            double elapsed) {
  std::printf("[%s] criterion %2d: %s (%s; %.1f s)\n", pass ? "PASS" : "FAIL", id,
              what.c_str(), detail.c_str(), elapsed);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

struct Scratch {
  fs::path root;
  explicit Scratch(const std::string& tag) {
    root = fs::temp_directory_path() / ("spira_acceptance_" + tag + "_" +
                                        std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  std::string dir(const std::string& name) const {
    const fs::path p = root / name;
    fs::create_directories(p);
    return p.string();
  }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SPIRA_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---------------------------------------------------------------------------
// criterion 2: shape fidelity (fast, so it runs first)
// ---------------------------------------------------------------------------
void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::ostringstream detail;

  const SpectroConfig cfg = SpectroConfig::set1();
  AudioClip clip = tu::make_harmonic(140.0, 4.0, 16000);
  clip.samples.resize(64000);
  const MelSpectrogram mel = log_mel(stft(clip, cfg), cfg);
  pass &= mel.values.rows == 80 && mel.values.cols == 401;

  PitchTrack pitch;
  pitch.f0.assign(401, 120.0);
  SpeakerRecord rec{"s", Label::patient, 40, 0, ""};
  const FeatureMatrix spec = assemble(&mel, nullptr, nullptr, FeatureLayout::spec_only);
  const FeatureMatrix meta = assemble(nullptr, &pitch, &rec, FeatureLayout::meta_only);
  const FeatureMatrix full = assemble(&mel, &pitch, &rec, FeatureLayout::full);
  pass &= spec.values.rows == 80 && spec.values.cols == 401;
  pass &= meta.values.rows == 40 && meta.values.cols == 401;
  pass &= full.values.rows == 120 && full.values.cols == 401;

  const double elapsed = seconds_since(t0);
  pass &= elapsed < 1.0;
  detail << "log-mel " << mel.values.rows << "x" << mel.values.cols << ", layouts 80/40/120x401";
  report(2, pass, "set-1 spectrogram and feature layouts have exact shapes",
         detail.str(), elapsed);
}

// ---------------------------------------------------------------------------
// criterion 3: DSP properties
// ---------------------------------------------------------------------------
void criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::ostringstream detail;

  // Round trip >= 40 dB, both sets.
  Rng rng(3);
  AudioClip noise;
  noise.sample_rate = 16000;
  noise.samples.resize(24000);
  for (auto& s : noise.samples) s = rng.uniform(-0.8, 0.8);
  double worst_rt = 1e9;
  for (const int set : {1, 2}) {
    const SpectroConfig cfg = SpectroConfig::preset(set);
    const ComplexSpectrogram spec = stft(noise, cfg);
    const AudioClip back = istft(spec, cfg, static_cast<std::int64_t>(noise.samples.size()));
    worst_rt = std::min(worst_rt, tu::snr_db(noise.samples, back.samples));
  }
  pass &= worst_rt >= 40.0;

  // F0 error <= 3 Hz over 80..400 Hz sines.
  double worst_f0 = 0.0;
  const SpectroConfig cfg = SpectroConfig::set1();
  for (double f0 = 80.0; f0 <= 400.0; f0 += 16.0) {
    const AudioClip tone = tu::make_sine(f0, 0.5, 16000, 0.6);
    const PitchTrack track = estimate_f0(tone, cfg, 70.0, 450.0);
    std::vector<double> voiced;
    for (const double f : track.f0) {
      if (f > 0) voiced.push_back(f);
    }
    if (voiced.empty()) {
      pass = false;
      break;
    }
    std::sort(voiced.begin(), voiced.end());
    worst_f0 = std::max(worst_f0, std::abs(voiced[voiced.size() / 2] - f0));
  }
  pass &= worst_f0 <= 3.0;

  // Mel inversion with true phase >= 10 dB on harmonic clips.
  double worst_inv = 1e9;
  for (const double f0 : {110.0, 180.0, 240.0}) {
    const AudioClip clip = tu::make_harmonic(f0, 2.0, 16000);
    const ComplexSpectrogram spec = stft(clip, cfg);
    const MelSpectrogram mel = log_mel(spec, cfg);
    const AudioClip back = inverse_log_mel(mel, spec.phase, cfg,
                                           static_cast<std::int64_t>(clip.samples.size()));
    worst_inv = std::min(worst_inv, tu::snr_db(clip.samples, back.samples));
  }
  pass &= worst_inv >= 10.0;

  const double elapsed = seconds_since(t0);
  pass &= elapsed < 30.0;
  detail.setf(std::ios::fixed);
  detail.precision(1);
  detail << "round-trip " << worst_rt << " dB, worst F0 err " << worst_f0
         << " Hz, mel inversion " << worst_inv << " dB";
  report(3, pass, "stft/istft, F0 and mel-inversion tolerances hold", detail.str(),
         elapsed);
}

// ---------------------------------------------------------------------------
// criterion 4: gradient correctness
// ---------------------------------------------------------------------------
void criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_at = "-";
  auto fold = [&](const gc::FdReport& r) {
    if (r.max_rel_err > worst) {
      worst = r.max_rel_err;
      worst_at = r.worst;
    }
  };
  fold(gc::check_conv2d(1, 1));
  fold(gc::check_conv2d(2, 2));
  fold(gc::check_batchnorm(3, true));
  fold(gc::check_batchnorm(4, false));
  fold(gc::check_relu(5));
  fold(gc::check_maxpool(6));
  fold(gc::check_gap(7));
  fold(gc::check_dense(8));
  fold(gc::check_dropout(9));
  fold(gc::check_bce(10));
  fold(gc::check_end_to_end(11, Mode::train));
  fold(gc::check_end_to_end(12, Mode::eval));

  const double elapsed = seconds_since(t0);
  const bool pass = worst <= 1e-3 && elapsed < 60.0;
  std::ostringstream detail;
  detail << "max rel err " << worst << " at " << worst_at;
  report(4, pass, "analytic gradients match central finite differences", detail.str(),
         elapsed);
}

// ---------------------------------------------------------------------------
// criterion 5: augmentation contracts
// ---------------------------------------------------------------------------
void criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;

  // Mix-up endpoints and midpoint, exact.
  FeatureMatrix xi, xj;
  xi.layout = xj.layout = FeatureLayout::spec_only;
  xi.values = Mat(1, 2);
  xi.values(0, 0) = 2.0;
  xi.values(0, 1) = 4.0;
  xj.values = Mat(1, 2);
  xj.values(0, 1) = 2.0;
  {
    const auto [x, y] = mixup(xi, {1, 0}, xj, {0, 1}, 1.0);
    pass &= x.values.v == xi.values.v && y[0] == 1.0;
  }
  {
    const auto [x, y] = mixup(xi, {1, 0}, xj, {0, 1}, 0.0);
    pass &= x.values.v == xj.values.v && y[1] == 1.0;
  }
  {
    const auto [x, y] = mixup(xi, {1, 0}, xj, {0, 1}, 0.5);
    pass &= x.values(0, 0) == 1.0 && x.values(0, 1) == 3.0 && y[0] == 0.5;
  }

  // Lambda draws: in range, Beta(0.2,0.2) mean 0.5 +- 0.01 over 1e5.
  Rng rng(55);
  MixupConfig mc;
  mc.alpha = 0.2;
  double sum = 0.0;
  bool in_range = true;
  for (int i = 0; i < 100000; ++i) {
    const double l = draw_lambda(mc, rng);
    in_range &= l >= 0.0 && l <= 1.0;
    sum += l;
  }
  const double mean = sum / 100000.0;
  pass &= in_range && std::abs(mean - 0.5) <= 0.01;

  // SpecAugment: band height bounded by F=8 inside [0,80); untouched cells
  // bit-identical.
  MelSpectrogram mel;
  mel.config = SpectroConfig::set1();
  mel.values = Mat(80, 120);
  for (int r = 0; r < 80; ++r) {
    for (int c = 0; c < 120; ++c) mel.values(r, c) = r + c * 1e-3;
  }
  SpecAugmentConfig sc;  // F=8, one mask; T left default
  sc.n_time_masks = 0;
  const double fill = mel.values.mean_value();
  Rng arng(56);
  for (int t = 0; t < 300 && pass; ++t) {
    const MelSpectrogram out = spec_augment(mel, sc, arng);
    int masked = 0;
    int first = -1;
    for (int r = 0; r < 80; ++r) {
      bool all = true;
      for (int c = 0; c < 120 && all; ++c) {
        if (out.values(r, c) != fill) all = false;
      }
      if (all) {
        if (first < 0) first = r;
        ++masked;
      }
    }
    pass &= masked <= 8;
    if (first >= 0) pass &= first >= 0 && first + masked <= 80;
    for (int r = 0; r < 80; ++r) {
      const bool in_band = first >= 0 && r >= first && r < first + masked;
      if (in_band) continue;
      for (int c = 0; c < 120; ++c) {
        if (out.values(r, c) != mel.values(r, c)) {
          pass = false;
          break;
        }
      }
    }
  }

  const double elapsed = seconds_since(t0);
  std::ostringstream detail;
  detail << "lambda mean " << mean << ", masks bounded by F=8";
  report(5, pass, "Mix-up endpoints and SpecAugment mask contracts hold", detail.str(),
         elapsed);
}

// ---------------------------------------------------------------------------
// criterion 6: voting oracle
// ---------------------------------------------------------------------------
void criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;

  Rng rng(66);
  for (int t = 0; t < 1000 && pass; ++t) {
    const int n = 1 + static_cast<int>(rng.uniform_int(9));
    std::vector<std::pair<double, double>> probs;
    double sp = 0.0, cp = 0.0;
    for (int i = 0; i < n; ++i) {
      const double p = rng.uniform();
      probs.push_back({p, 1.0 - p});
      sp += p;
      cp += 1.0 - p;
    }
    const VoteResult r = vote(probs);
    pass &= std::abs(r.sum_patient - sp) < 1e-9 && std::abs(r.sum_control - cp) < 1e-9;
    pass &= r.predicted == (sp >= cp ? Label::patient : Label::control);
  }

  // The 5 s clip -> exactly two windows, voted by summation.
  AudioClip five;
  five.sample_rate = 16000;
  five.samples.assign(80000, 0.1);
  five.source_id = "five";
  const auto windows = make_windows(five, Label::patient);
  pass &= windows.size() == 2;
  pass &= vote({{0.4, 0.6}, {0.8, 0.2}}).predicted == Label::patient;

  // Tie rule.
  pass &= vote({{0.5, 0.5}}).predicted == Label::patient;

  const double elapsed = seconds_since(t0);
  report(6, pass, "voting equals brute-force probability summation",
         "1000 randomized sets, 5 s two-window case, tie to patient", elapsed);
}

// ---------------------------------------------------------------------------
// criterion 7: Grad-CAM oracle
// ---------------------------------------------------------------------------
void criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::ostringstream detail;

  ModelConfig cfg;
  cfg.conv_blocks = {{1, 1, 1, 1, 1, 1}};
  cfg.dense_units = 1;
  cfg.input_rows = 4;
  cfg.input_cols = 4;
  ModelState net = init_model(cfg, 0);
  net.params["conv1.w"].v = {1.0};
  net.params["bn1.gamma"].v = {1.0};
  net.buffers["bn1.running_mean"].v = {0.0};
  net.buffers["bn1.running_var"].v = {1.0 - nn::kBnEps};
  net.params["fc1.w"].v = {16.0};
  net.params["fc2.w"].v = {1.0};

  FeatureMatrix x;
  x.layout = FeatureLayout::spec_only;
  x.values = Mat(4, 4);
  const double vals[16] = {0.5, -0.2, 1.0, 0.1, -0.7, 0.3,  0.9, -0.1,
                           0.2, 0.8,  -0.4, 0.6, 0.05, -0.9, 0.7, 0.25};
  for (int i = 0; i < 16; ++i) x.values.v[static_cast<std::size_t>(i)] = vals[i];

  const HeatMap heat = grad_cam(net, x, "block1", Label::patient);
  double worst = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double expect = std::max(vals[i], 0.0);  // max is 1.0
    worst = std::max(worst,
                     std::abs(heat.values.v[static_cast<std::size_t>(i)] - expect));
  }
  pass &= worst <= 1e-6 && !heat.all_zero;

  // Disconnected map -> flagged all-zero.
  ModelState dead = net;
  dead.params["fc1.w"].v = {0.0};
  const HeatMap zero_map = grad_cam(dead, x, "block1", Label::patient);
  pass &= zero_map.all_zero;
  for (const double v : zero_map.values.v) pass &= v == 0.0;

  // Normalization to [0,1] on a realistic model.
  const ModelConfig big = ModelConfig::default_for(80, 401);
  const ModelState model = init_model(big, 9);
  Rng rng(9);
  FeatureMatrix rx;
  rx.layout = FeatureLayout::spec_only;
  rx.values = Mat(80, 401);
  for (double& v : rx.values.v) v = rng.uniform(0.0, 1.0);
  const HeatMap hm = grad_cam(model, rx, default_target_layer(big), Label::patient);
  double peak = 0.0;
  for (const double v : hm.values.v) {
    pass &= v >= 0.0 && v <= 1.0;
    peak = std::max(peak, v);
  }
  if (!hm.all_zero) pass &= std::abs(peak - 1.0) <= 1e-12;

  const double elapsed = seconds_since(t0);
  detail << "identity-network max dev " << worst;
  report(7, pass, "Grad-CAM matches the closed-form oracle and normalization",
         detail.str(), elapsed);
}

// ---------------------------------------------------------------------------
// criterion 1 (+9 shares its artifacts): experiment 1 on the default corpus
// ---------------------------------------------------------------------------
struct Exp1Artifacts {
  std::string corpus_dir;
  std::string out_dir;
  ExperimentResult result;
  bool ok = false;
};

Exp1Artifacts criterion_1(const Scratch& scratch) {
  const auto t0 = std::chrono::steady_clock::now();
  Exp1Artifacts art;
  art.corpus_dir = scratch.dir("corpus");
  art.out_dir = scratch.dir("exp1");

  GenProfile profile;  // defaults: the 80/10/30 desk corpus
  generate_corpus(60, 60, 0, profile, art.corpus_dir);
  {
    CorpusManifest all = load_manifest(art.corpus_dir + "/manifest.csv");
    const CorpusManifest split = split_manifest(all, 80, 10, 30, 0);
    save_manifest(split, art.corpus_dir + "/manifest.csv");
  }

  RunOptions opt;
  opt.seed = 0;
  opt.panel_windows = 4;
  art.result = run_experiment(1, art.corpus_dir, art.out_dir, opt);

  const double elapsed = seconds_since(t0);
  const double acc = art.result.cm.accuracy();
  const bool pass = acc >= 0.90 && elapsed <= 900.0;
  art.ok = pass;
  std::ostringstream detail;
  detail.setf(std::ios::fixed);
  detail.precision(2);
  detail << "test acc " << 100.0 * acc << "% (tp=" << art.result.cm.tp
         << " tn=" << art.result.cm.tn << " fp=" << art.result.cm.fp
         << " fn=" << art.result.cm.fn << ")";
  report(1, pass, "experiment 1 reaches 90% test accuracy inside 15 minutes",
         detail.str(), elapsed);
  return art;
}

// ---------------------------------------------------------------------------
// criterion 9: attention near pauses
// ---------------------------------------------------------------------------
void criterion_9(const Exp1Artifacts& art) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!art.ok) {
    report(9, false, "attention concentrates near inserted pauses",
           "skipped: experiment 1 artifacts unavailable", 0.0);
    return;
  }
  const ModelState state = load_state(art.result.checkpoint_path);
  const CorpusManifest manifest = load_manifest(art.corpus_dir + "/manifest.csv");
  const NoiseBank bank = load_noise_bank(art.corpus_dir + "/noise");
  PipelineConfig cfg;
  cfg.seed = 0;

  std::map<std::string, std::vector<PauseSpan>> pauses;
  for (const auto& p : load_pauses(art.corpus_dir + "/pauses.csv")) {
    pauses[p.id].push_back(p);
  }

  const SpectroConfig sc = cfg.spectro();
  const double frame_dt = static_cast<double>(sc.hop) / sc.sample_rate;
  int assessed = 0;
  int concentrated = 0;
  for (const SpeakerRecord* rec : manifest.in_split(Split::test)) {
    if (rec->label != Label::patient) continue;
    Rng rng(eval_rng_seed(cfg, rec->id));
    const auto windows = preprocess_step(*rec, bank, cfg, Mode::eval, rng);
    for (const auto& w : windows) {
      const auto [p_patient, p_control] = predict_window(state, w.features);
      if (p_patient < p_control) continue;  // only correctly classified windows
      const HeatMap heat =
          grad_cam(state, w.features, default_target_layer(state.config), Label::patient);
      // Column attention over the spectrogram rows.
      const int frames = heat.values.cols;
      std::vector<double> column(static_cast<std::size_t>(frames), 0.0);
      for (int c = 0; c < frames; ++c) {
        double s = 0.0;
        for (int r = 0; r < heat.values.rows; ++r) s += heat.values(r, c);
        column[static_cast<std::size_t>(c)] = s / heat.values.rows;
      }
      double adj_sum = 0.0;
      int adj_n = 0;
      double all_sum = 0.0;
      for (int c = 0; c < frames; ++c) {
        const double t = w.offset_s + c * frame_dt;
        bool adjacent = false;
        for (const auto& span : pauses[w.source_id]) {
          if (t >= span.begin_s - 0.1 && t <= span.end_s + 0.1) {
            adjacent = true;
            break;
          }
        }
        all_sum += column[static_cast<std::size_t>(c)];
        if (adjacent) {
          adj_sum += column[static_cast<std::size_t>(c)];
          ++adj_n;
        }
      }
      if (adj_n == 0 || adj_n == frames) continue;  // nothing to compare against
      ++assessed;
      if (adj_sum / adj_n > all_sum / frames) ++concentrated;
    }
  }

  const double frac = assessed > 0 ? static_cast<double>(concentrated) / assessed : 0.0;
  const double elapsed = seconds_since(t0);
  const bool pass = assessed >= 10 && frac >= 0.70;
  std::ostringstream detail;
  detail.setf(std::ios::fixed);
  detail.precision(1);
  detail << 100.0 * frac << "% of " << assessed << " correct patient windows";
  report(9, pass, "attention concentrates near inserted pauses", detail.str(), elapsed);
}

// ---------------------------------------------------------------------------
// criterion 8: bias probe over three seeds
// ---------------------------------------------------------------------------
void criterion_8(const Scratch& scratch) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string corpus_dir = scratch.dir("probe_corpus");

  GenProfile profile;
  profile.duration_min = 5.0;
  profile.duration_max = 7.0;
  generate_corpus(25, 25, 100, profile, corpus_dir);
  {
    CorpusManifest all = load_manifest(corpus_dir + "/manifest.csv");
    const CorpusManifest split = split_manifest(all, 26, 4, 20, 100);
    save_manifest(split, corpus_dir + "/manifest.csv");
  }

  bool pass = true;
  std::ostringstream detail;
  detail.setf(std::ios::fixed);
  detail.precision(1);
  for (const std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
    ProbeOptions opt;
    opt.corpus_dir = corpus_dir;
    opt.work_dir = scratch.dir("probe_work_" + std::to_string(seed));
    opt.seed = seed;
    opt.hyper.max_epochs = 20;
    opt.hyper.patience = 4;
    const SpectroConfig sc = SpectroConfig::set1();
    opt.model = ModelConfig::tiny_for(sc.n_mels, stft_frames(64000, sc));
    const ProbeReport r = bias_probe(opt);
    const double drop_on = r.with_injection.drop();
    const double drop_off = r.without_injection.drop();
    pass &= drop_off > drop_on;
    pass &= drop_on <= 0.10;
    detail << "seed " << seed << ": off " << 100 * drop_off << " vs on "
           << 100 * drop_on << " pts; ";
  }

  const double elapsed = seconds_since(t0);
  pass &= elapsed <= 2700.0;
  report(8, pass, "noise injection shields against the environment confound",
         detail.str(), elapsed);
}

// ---------------------------------------------------------------------------
// criterion 10: CLI reproducibility by hashing artifacts
// ---------------------------------------------------------------------------
void criterion_10(const Scratch& scratch) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::ostringstream detail;

  auto same_bytes = [&](const std::string& a, const std::string& b) {
    const auto ba = tu::read_bytes(a);
    const auto bb = tu::read_bytes(b);
    if (ba.empty() || ba != bb) {
      pass = false;
      detail << "mismatch: " << fs::path(a).filename().string() << "; ";
    }
  };

  // gen
  const std::string ga = scratch.dir("cli/gen_a");
  const std::string gb = scratch.dir("cli/gen_b");
  const std::string gen_flags =
      " --patients 4 --controls 4 --seed 11 --duration-min 4.5 --duration-max 5.5 "
      "--train 4 --val 2 --test 2 --out ";
  pass &= run_cli("gen" + gen_flags + ga) == 0;
  pass &= run_cli("gen" + gen_flags + gb) == 0;
  for (const char* f : {"manifest.csv", "pauses.csv", "profile.txt",
                        "clips/p000.wav", "clips/c003.wav", "noise/hospital_0.wav"}) {
    same_bytes(ga + "/" + f, gb + "/" + f);
  }

  // train
  const std::string ta = scratch.dir("cli/train_a");
  const std::string tb = scratch.dir("cli/train_b");
  const std::string train_flags =
      " --exp 1 --corpus " + ga + " --seed 3 --epochs 2 --patience 2 --out ";
  pass &= run_cli("train" + train_flags + ta) == 0;
  pass &= run_cli("train" + train_flags + tb) == 0;
  for (const char* f : {"checkpoint.bin", "report.csv", "pipeline.txt"}) {
    same_bytes(ta + "/" + f, tb + "/" + f);
  }

  // eval
  const std::string ea = scratch.dir("cli/eval_a");
  const std::string eb = scratch.dir("cli/eval_b");
  const std::string eval_flags = " --checkpoint " + ta + "/checkpoint.bin --corpus " +
                                 ga + " --seed 3 --exp 1 --out ";
  pass &= run_cli("eval" + eval_flags + ea) == 0;
  pass &= run_cli("eval" + eval_flags + eb) == 0;
  for (const char* f : {"results.csv", "per_speaker.csv"}) {
    same_bytes(ea + "/" + f, eb + "/" + f);
  }

  // explain (a test-split speaker; ids are stable for seed 11)
  const CorpusManifest manifest = load_manifest(ga + "/manifest.csv");
  const std::string test_id = manifest.in_split(Split::test).front()->id;
  const std::string xa = scratch.dir("cli/explain_a");
  const std::string xb = scratch.dir("cli/explain_b");
  const std::string explain_flags = " --checkpoint " + ta + "/checkpoint.bin --corpus " +
                                    ga + " --seed 3 --window " + test_id +
                                    "_w0 --class patient --out ";
  pass &= run_cli("explain" + explain_flags + xa) == 0;
  pass &= run_cli("explain" + explain_flags + xb) == 0;
  for (const std::string& f : std::vector<std::string>{
           test_id + "_w0_original.pgm", test_id + "_w0_heat.pgm",
           test_id + "_w0_modified.pgm", test_id + "_w0_resynth.wav",
           "attention.csv"}) {
    same_bytes(xa + "/" + f, xb + "/" + f);
  }

  // resynth
  const std::string ra = scratch.dir("cli/resynth_a");
  const std::string rb = scratch.dir("cli/resynth_b");
  const std::string resynth_flags = " --checkpoint " + ta + "/checkpoint.bin --corpus " +
                                    ga + " --seed 3 --limit 2 --out ";
  pass &= run_cli("resynth" + resynth_flags + ra) == 0;
  pass &= run_cli("resynth" + resynth_flags + rb) == 0;
  same_bytes(ra + "/attention.csv", rb + "/attention.csv");
  same_bytes(ra + "/" + test_id + "_w0_resynth.wav", rb + "/" + test_id + "_w0_resynth.wav");

  // probe
  const std::string pa = scratch.dir("cli/probe_a");
  const std::string pb = scratch.dir("cli/probe_b");
  const std::string probe_flags =
      " --corpus " + ga + " --seed 3 --epochs 2 --patience 2 --tiny --out ";
  pass &= run_cli("probe" + probe_flags + pa) == 0;
  pass &= run_cli("probe" + probe_flags + pb) == 0;
  same_bytes(pa + "/probe.csv", pb + "/probe.csv");

  const double elapsed = seconds_since(t0);
  if (pass) detail << "gen/train/eval/explain/resynth/probe byte-identical";
  report(10, pass, "CLI commands are rerun-idempotent under a fixed seed",
         detail.str(), elapsed);
}

}  // namespace

int main() {
  std::printf("acceptance suite: binary %s\n", SPIRA_BIN);
  Scratch scratch("run");

  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  const Exp1Artifacts exp1 = criterion_1(scratch);
  criterion_9(exp1);
  criterion_8(scratch);
  criterion_10(scratch);

  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    std::error_code ec;
    fs::remove_all(scratch.root, ec);
  } else {
    std::printf("%d criterion(s) failed; artifacts kept under %s\n", g_failures,
                scratch.root.string().c_str());
  }
  return g_failures;
}
