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

#include "spira/eval.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "spira/export.hpp"
#include "spira/parallel.hpp"

namespace fs = std::filesystem;

namespace spira {

VoteResult vote(const std::vector<std::pair<double, double>>& window_probs) {
  if (window_probs.empty()) throw std::invalid_argument("vote: empty window list");
  VoteResult r;
  for (const auto& [p, c] : window_probs) {
    if (std::abs(p + c - 1.0) > 1e-6) {
      throw std::invalid_argument("vote: window probabilities must sum to 1");
    }
    r.sum_patient += p;
    r.sum_control += c;
  }
  r.predicted = r.sum_patient >= r.sum_control ? Label::patient : Label::control;
  return r;
}

EvalResult evaluate_with(const WindowPredictor& predictor,
                         const CorpusManifest& manifest, Split split,
                         const NoiseBank& bank, const PipelineConfig& cfg,
                         int workers) {
  const std::vector<const SpeakerRecord*> speakers = manifest.in_split(split);
  if (speakers.empty()) throw std::invalid_argument("evaluate: empty split");

  EvalResult result;
  result.speakers.resize(speakers.size());
  parallel_for(static_cast<int>(speakers.size()), workers, [&](int i) {
    const SpeakerRecord& rec = *speakers[static_cast<std::size_t>(i)];
    Rng rng(eval_rng_seed(cfg, rec.id));
    const std::vector<WindowFeatures> windows =
        preprocess_step(rec, bank, cfg, Mode::eval, rng);
    std::vector<std::pair<double, double>> probs;
    probs.reserve(windows.size());
    for (const auto& w : windows) probs.push_back(predictor(w.features));
    const VoteResult v = vote(probs);
    SpeakerResult& sr = result.speakers[static_cast<std::size_t>(i)];
    sr.id = rec.id;
    sr.truth = rec.label;
    sr.predicted = v.predicted;
    sr.sum_patient = v.sum_patient;
    sr.sum_control = v.sum_control;
    sr.windows = static_cast<int>(windows.size());
  });

  for (const auto& sr : result.speakers) {
    if (sr.truth == Label::patient) {
      (sr.predicted == Label::patient ? result.cm.tp : result.cm.fn)++;
    } else {
      (sr.predicted == Label::control ? result.cm.tn : result.cm.fp)++;
    }
  }
  return result;
}

EvalResult evaluate(const ModelState& state, const CorpusManifest& manifest,
                    Split split, const NoiseBank& bank, const PipelineConfig& cfg,
                    int workers) {
  return evaluate_with(
      [&state](const FeatureMatrix& x) { return predict_window(state, x); },
      manifest, split, bank, cfg, workers);
}

void write_per_speaker_csv(const EvalResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write per-speaker csv: " + path);
  out << "id,truth,predicted,sum_patient,sum_control,windows\n";
  char buf[64];
  for (const auto& s : result.speakers) {
    std::snprintf(buf, sizeof(buf), ",%.9g,%.9g,%d", s.sum_patient, s.sum_control,
                  s.windows);
    out << s.id << ',' << to_string(s.truth) << ',' << to_string(s.predicted) << buf
        << '\n';
  }
}

void write_results_csv(int exp_id, const ConfusionMatrix& cm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write results csv: " + path);
  out << "exp,tp,tn,fp,fn,acc_percent\n";
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%d,%ld,%ld,%ld,%ld,%.2f", exp_id, cm.tp, cm.tn,
                cm.fp, cm.fn, 100.0 * cm.accuracy());
  out << buf << '\n';
}

std::vector<WindowFeatures> preprocess_split(const CorpusManifest& manifest,
                                             Split split, const NoiseBank& bank,
                                             const PipelineConfig& cfg, Mode mode,
                                             std::uint64_t seed, int epoch,
                                             int workers) {
  const std::vector<const SpeakerRecord*> speakers = manifest.in_split(split);
  std::vector<std::vector<WindowFeatures>> per_speaker(speakers.size());
  parallel_for(static_cast<int>(speakers.size()), workers, [&](int i) {
    const SpeakerRecord& rec = *speakers[static_cast<std::size_t>(i)];
    // Per-(speaker, epoch) stream: worker count cannot change the draws.
    Rng rng(Rng::derive(seed, "pre:" + rec.id, static_cast<std::uint64_t>(epoch)));
    per_speaker[static_cast<std::size_t>(i)] =
        preprocess_step(rec, bank, cfg, mode, rng);
  });
  std::vector<WindowFeatures> all;
  for (auto& ws : per_speaker) {
    for (auto& w : ws) all.push_back(std::move(w));
  }
  return all;
}

ExperimentSpec experiment_spec(int exp_id) {
  switch (exp_id) {
    case 1: return {FeatureLayout::spec_only, 1, false, false};
    case 2: return {FeatureLayout::meta_only, 1, false, false};
    case 3: return {FeatureLayout::full, 1, false, false};
    case 5: return {FeatureLayout::spec_only, 2, true, true};
    case 4:
      throw std::invalid_argument(
          "experiment 4 (transfer learning from pretrained audio networks) is out "
          "of scope; use train --init-from to warm-start instead");
    case 6:
      throw std::invalid_argument(
          "experiment 6 is the resynthesis path; use the explain/resynth commands");
    default:
      throw std::invalid_argument("unknown experiment id: " + std::to_string(exp_id));
  }
}

namespace {

PipelineConfig pipeline_for(const ExperimentSpec& spec, std::uint64_t seed) {
  PipelineConfig cfg;
  cfg.layout = spec.layout;
  cfg.set = spec.set;
  cfg.specaugment_enabled = spec.specaugment;
  cfg.mixup_enabled = spec.mixup;
  cfg.seed = seed;
  return cfg;
}

std::pair<int, int> input_shape_for(const ExperimentSpec& spec) {
  const SpectroConfig sc = SpectroConfig::preset(spec.set);
  const int frames =
      stft_frames(static_cast<std::size_t>(kWindowSeconds * sc.sample_rate), sc);
  const int rows = spec.layout == FeatureLayout::spec_only ? sc.n_mels
                                                           : layout_rows(spec.layout);
  const int cols = spec.layout == FeatureLayout::spec_only ? frames : kMetaFrames;
  return {rows, cols};
}

}  // namespace

ExperimentResult run_experiment(int exp_id, const std::string& corpus_dir,
                                const std::string& out_dir, const RunOptions& opt) {
  const ExperimentSpec spec = experiment_spec(exp_id);
  fs::create_directories(out_dir);

  const CorpusManifest manifest =
      load_manifest((fs::path(corpus_dir) / "manifest.csv").string());
  PipelineConfig cfg = pipeline_for(spec, opt.seed);
  const NoiseBank bank = load_noise_bank((fs::path(corpus_dir) / "noise").string(),
                                         cfg.noise_patient, cfg.noise_control);

  const auto [rows, cols] = input_shape_for(spec);
  ModelConfig mc = opt.model ? *opt.model : ModelConfig::default_for(rows, cols);
  mc.input_rows = rows;
  mc.input_cols = cols;
  mc.validate();
  ModelState state = init_model(mc, opt.seed);

  TrainHyper hp = opt.hyper ? *opt.hyper : TrainHyper{};
  hp.seed = opt.seed;
  hp.mixup_enabled = spec.mixup;

  const int workers = opt.workers;
  auto data = [&](int epoch) {
    return preprocess_split(manifest, Split::train, bank, cfg, Mode::train, opt.seed,
                            epoch, workers);
  };
  auto validate = [&](const ModelState& st) {
    return evaluate(st, manifest, Split::val, bank, cfg, workers).cm.accuracy();
  };

  ExperimentResult result;
  result.exp_id = exp_id;
  result.report = train(state, data, validate, hp);
  result.eval = evaluate(state, manifest, Split::test, bank, cfg, workers);
  result.cm = result.eval.cm;

  result.checkpoint_path = (fs::path(out_dir) / "checkpoint.bin").string();
  save_state(state, result.checkpoint_path);
  write_train_report_csv(result.report, (fs::path(out_dir) / "report.csv").string());
  write_results_csv(exp_id, result.cm, (fs::path(out_dir) / "results.csv").string());
  write_per_speaker_csv(result.eval, (fs::path(out_dir) / "per_speaker.csv").string());

  // Grad-CAM panels for the first few test windows, one per speaker.
  if (opt.panel_windows > 0) {
    const fs::path panel_dir = fs::path(out_dir) / "panels";
    fs::create_directories(panel_dir);
    std::vector<AttentionRow> attention;
    int emitted = 0;
    for (const SpeakerRecord* rec : manifest.in_split(Split::test)) {
      if (emitted >= opt.panel_windows) break;
      Rng rng(eval_rng_seed(cfg, rec->id));
      PreparedWindow pw = prepare_window(*rec, bank, cfg, Mode::eval, 0, rng);
      const auto [p_patient, p_control] = predict_window(state, pw.features);
      const Label predicted = p_patient >= p_control ? Label::patient : Label::control;
      const HeatMap heat = grad_cam(state, pw.features, default_target_layer(mc),
                                    predicted);
      const std::string wid = rec->id + "_w0";
      if (cfg.layout == FeatureLayout::meta_only) {
        // No spectrogram region; panel the input image itself.
        write_pgm(pw.features.values, (panel_dir / (wid + "_original.pgm")).string());
        write_pgm_unit(heat.values, (panel_dir / (wid + "_heat.pgm")).string());
        Mat modified = pw.features.values;
        for (std::size_t i = 0; i < modified.v.size(); ++i) {
          modified.v[i] *= heat.values.v[i];
        }
        write_pgm_unit(modified, (panel_dir / (wid + "_modified.pgm")).string());
      } else {
        Mat heat_region(pw.mel.values.rows, pw.mel.values.cols);
        for (int r = 0; r < heat_region.rows; ++r) {
          for (int c = 0; c < heat_region.cols; ++c) {
            heat_region(r, c) = heat.values(r, c);
          }
        }
        export_panel(pw.mel, heat, apply_heatmap(pw.mel, heat_region),
                     (panel_dir / wid).string());
      }
      attention.push_back(attention_summary(heat, cfg.layout, wid, predicted));
      ++emitted;
    }
    write_attention_csv(attention, (fs::path(out_dir) / "attention.csv").string());
  }
  return result;
}

ProbeReport bias_probe(const ProbeOptions& opt) {
  const fs::path corpus(opt.corpus_dir);
  const CorpusManifest manifest = load_manifest((corpus / "manifest.csv").string());
  const GenProfile profile = load_profile((corpus / "profile.txt").string());

  // Counterfactual test clips: same speech, opposite noise channel.
  GenProfile swapped_profile = profile;
  swapped_profile.swap_noise_channels = !profile.swap_noise_channels;
  const fs::path swap_dir = fs::path(opt.work_dir) / "swapped";
  fs::create_directories(swap_dir / "clips");
  CorpusManifest swapped = manifest;
  // The corpus seed is recorded next to the manifest by generate_corpus.
  std::uint64_t corpus_seed = 0;
  {
    std::ifstream in((corpus / "seed.txt").string());
    if (!in || !(in >> corpus_seed)) {
      throw std::runtime_error("bias_probe: corpus is missing seed.txt (regenerate it)");
    }
  }
  for (auto& rec : swapped.records) {
    if (swapped.split.at(rec.id) != Split::test) continue;
    SpeakerClip sc = render_speaker(rec, corpus_seed, swapped_profile);
    const fs::path out = swap_dir / "clips" / (rec.id + ".wav");
    write_wav(sc.clip, out.string());
    rec.clip_path = out.string();
  }

  ProbeReport report;
  for (const bool injection : {true, false}) {
    PipelineConfig cfg = opt.pipe;
    cfg.seed = opt.seed;
    if (!injection) {
      cfg.noise_patient = 0;
      cfg.noise_control = 0;
    }
    const NoiseBank bank = load_noise_bank((corpus / "noise").string(),
                                           cfg.noise_patient, cfg.noise_control);

    const SpectroConfig sc = cfg.spectro();
    const int frames =
        stft_frames(static_cast<std::size_t>(kWindowSeconds * sc.sample_rate), sc);
    const int rows = cfg.layout == FeatureLayout::spec_only ? sc.n_mels
                                                            : layout_rows(cfg.layout);
    const int cols = cfg.layout == FeatureLayout::spec_only ? frames : kMetaFrames;
    ModelConfig mc = opt.model ? *opt.model : ModelConfig::default_for(rows, cols);
    mc.input_rows = rows;
    mc.input_cols = cols;

    ModelState state = init_model(mc, opt.seed);
    TrainHyper hp = opt.hyper;
    hp.seed = opt.seed;
    auto data = [&](int epoch) {
      return preprocess_split(manifest, Split::train, bank, cfg, Mode::train, opt.seed,
                              epoch, opt.workers);
    };
    auto validate = [&](const ModelState& st) {
      return evaluate(st, manifest, Split::val, bank, cfg, opt.workers).cm.accuracy();
    };
    train(state, data, validate, hp);

    ProbeArm arm;
    arm.injection = injection;
    arm.acc_normal =
        evaluate(state, manifest, Split::test, bank, cfg, opt.workers).cm.accuracy();
    arm.acc_swapped =
        evaluate(state, swapped, Split::test, bank, cfg, opt.workers).cm.accuracy();
    (injection ? report.with_injection : report.without_injection) = arm;
  }
  return report;
}

void write_probe_csv(const ProbeReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write probe csv: " + path);
  out << "arm,acc_normal,acc_swapped,drop\n";
  char buf[96];
  const std::pair<const char*, const ProbeArm*> arms[2] = {
      {"injection_on", &report.with_injection},
      {"injection_off", &report.without_injection}};
  for (const auto& [name, arm] : arms) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f", name, arm->acc_normal,
                  arm->acc_swapped, arm->drop());
    out << buf << '\n';
  }
}

}  // namespace spira
