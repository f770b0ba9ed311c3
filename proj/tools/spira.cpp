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

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spira/config.hpp"
#include "spira/corpus.hpp"
#include "spira/eval.hpp"
#include "spira/explain.hpp"
#include "spira/export.hpp"
#include "spira/model.hpp"
#include "spira/pipeline.hpp"

namespace fs = std::filesystem;
using namespace spira;

namespace {

// Tracks everything a command writes so a failure leaves no partial output.
class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : dir_(dir) {
    fs::create_directories(dir_);
    for (const auto& e : fs::recursive_directory_iterator(dir_)) {
      preexisting_.insert(e.path().string());
    }
  }

  const std::string& path() const { return dir_; }
  std::string file(const std::string& name) const {
    return (fs::path(dir_) / name).string();
  }
  void commit() { committed_ = true; }

  ~OutputDir() {
    if (committed_) return;
    std::error_code ec;
    std::vector<fs::path> added;
    for (const auto& e : fs::recursive_directory_iterator(dir_, ec)) {
      if (preexisting_.find(e.path().string()) == preexisting_.end()) {
        added.push_back(e.path());
      }
    }
    // Deepest first so directories empty out before removal.
    std::sort(added.begin(), added.end(), [](const fs::path& a, const fs::path& b) {
      return a.string().size() > b.string().size();
    });
    for (const auto& p : added) fs::remove(p, ec);
    if (preexisting_.empty()) fs::remove(dir_, ec);
  }

 private:
  std::string dir_;
  std::set<std::string> preexisting_;
  bool committed_ = false;
};

struct CommonOpts {
  std::string config_file;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  int workers = 1;
};

void add_common(CLI::App* cmd, CommonOpts* c) {
  cmd->add_option("--config", c->config_file, "flat key=value config file");
  cmd->add_option("--set", c->overrides, "override, key=value (repeatable)");
  cmd->add_option("--seed", c->seed, "master random seed")->capture_default_str();
  cmd->add_option("--workers", c->workers, "preprocessing worker threads")
      ->capture_default_str();
}

KeyValueConfig merge_config(const CommonOpts& c,
                            const std::vector<std::pair<std::string, std::string>>&
                                defaults = {}) {
  KeyValueConfig kv;
  for (const auto& [k, v] : defaults) kv.set(k, v);
  if (!c.config_file.empty()) {
    const KeyValueConfig file = KeyValueConfig::from_file(c.config_file);
    for (const auto& [k, v] : file.entries()) kv.set(k, v);
  }
  kv.apply_env("SPIRA_");
  kv.apply_overrides(c.overrides);
  kv.set("seed", std::to_string(c.seed));
  return kv;
}

std::string checkpoint_sibling(const std::string& checkpoint, const char* name) {
  return (fs::path(checkpoint).parent_path() / name).string();
}

PipelineConfig pipeline_from_checkpoint_dir(const CommonOpts& c,
                                            const std::string& checkpoint,
                                            KeyValueConfig* kv_out) {
  CommonOpts merged = c;
  if (merged.config_file.empty()) {
    const std::string sibling = checkpoint_sibling(checkpoint, "pipeline.txt");
    if (fs::exists(sibling)) merged.config_file = sibling;
  }
  KeyValueConfig kv = merge_config(merged);
  if (kv_out != nullptr) *kv_out = kv;
  return pipeline_config_from(kv);
}

struct WindowRef {
  std::string speaker;
  int index = 0;
};

WindowRef parse_window_id(const std::string& id) {
  const auto pos = id.rfind("_w");
  if (pos == std::string::npos || pos + 2 >= id.size()) {
    throw std::invalid_argument("window id must look like <speaker>_w<k>: '" + id + "'");
  }
  WindowRef ref;
  ref.speaker = id.substr(0, pos);
  ref.index = std::stoi(id.substr(pos + 2));
  return ref;
}

// ---- gen ----

int cmd_gen(const CommonOpts& common, const std::string& out_dir, int patients,
            int controls, int n_train, int n_val, int n_test, bool full_scale,
            double duration_min, double duration_max, double snr_db, bool no_noise,
            bool swap_noise, const std::string& profile_file) {
  OutputDir out(out_dir);

  GenProfile profile =
      profile_file.empty() ? GenProfile{} : load_profile(profile_file);
  profile.duration_min = duration_min;
  profile.duration_max = duration_max;
  profile.noise_snr_db = snr_db;
  profile.noise_enabled = !no_noise;
  profile.swap_noise_channels = swap_noise;

  if (full_scale) {
    patients = 216;
    controls = 216;
    n_train = 292;
    n_val = 32;
    n_test = 108;
  }
  const int total = patients + controls;
  if (n_train < 0) {
    // Desk-scale 80/10/30 proportions.
    n_train = total * 2 / 3;
    n_val = total / 12;
    n_test = total - n_train - n_val;
  }

  GeneratedCorpus corpus = generate_corpus(patients, controls, common.seed, profile,
                                           out.path(), common.workers);
  CorpusManifest split =
      split_manifest(corpus.manifest, n_train, n_val, n_test, common.seed);
  save_manifest(split, out.file("manifest.csv"));

  KeyValueConfig echo = merge_config(common);
  echo.set("command", "gen");
  echo.set("patients", std::to_string(patients));
  echo.set("controls", std::to_string(controls));
  echo.set("split", std::to_string(n_train) + "/" + std::to_string(n_val) + "/" +
                        std::to_string(n_test));
  echo.write(out.file("config_effective.txt"));

  std::cout << "generated " << total << " speakers (" << patients << " patients, "
            << controls << " controls) into " << out.path() << "\n"
            << "splits: train " << n_train << ", val " << n_val << ", test " << n_test
            << "\n";
  out.commit();
  return 0;
}

// ---- train ----

int cmd_train(const CommonOpts& common, int exp_id, const std::string& corpus_dir,
              const std::string& out_dir, int epochs, int batch, double lr,
              double momentum, int patience, const std::string& init_from) {
  const ExperimentSpec spec = experiment_spec(exp_id);
  OutputDir out(out_dir);

  KeyValueConfig kv = merge_config(
      common, {{"set", std::to_string(spec.set)},
               {"layout", to_string(spec.layout)},
               {"specaugment.enabled", spec.specaugment ? "1" : "0"},
               {"mixup.enabled", spec.mixup ? "1" : "0"}});
  PipelineConfig cfg = pipeline_config_from(kv);

  const CorpusManifest manifest =
      load_manifest((fs::path(corpus_dir) / "manifest.csv").string());
  const NoiseBank bank = load_noise_bank((fs::path(corpus_dir) / "noise").string(),
                                         cfg.noise_patient, cfg.noise_control);

  const SpectroConfig sc = cfg.spectro();
  const int frames =
      stft_frames(static_cast<std::size_t>(kWindowSeconds * sc.sample_rate), sc);
  const int rows =
      cfg.layout == FeatureLayout::spec_only ? sc.n_mels : layout_rows(cfg.layout);
  const int cols = cfg.layout == FeatureLayout::spec_only ? frames : kMetaFrames;

  ModelState state;
  if (!init_from.empty()) {
    state = load_state(init_from);
    if (state.config.input_rows != rows || state.config.input_cols != cols) {
      throw std::invalid_argument("--init-from checkpoint expects input " +
                                  std::to_string(state.config.input_rows) + "x" +
                                  std::to_string(state.config.input_cols) +
                                  " but this experiment needs " + std::to_string(rows) +
                                  "x" + std::to_string(cols));
    }
  } else {
    state = init_model(ModelConfig::default_for(rows, cols), common.seed);
  }

  TrainHyper hp;
  hp.lr = lr;
  hp.momentum = momentum;
  hp.batch_size = batch;
  hp.max_epochs = epochs;
  hp.patience = patience;
  hp.seed = common.seed;
  hp.mixup_enabled = cfg.mixup_enabled;
  hp.mixup = cfg.mixup;

  auto data = [&](int epoch) {
    return preprocess_split(manifest, Split::train, bank, cfg, Mode::train,
                            common.seed, epoch, common.workers);
  };
  auto validate = [&](const ModelState& st) {
    return evaluate(st, manifest, Split::val, bank, cfg, common.workers).cm.accuracy();
  };

  const TrainReport report = train(state, data, validate, hp);
  save_state(state, out.file("checkpoint.bin"));
  write_train_report_csv(report, out.file("report.csv"));
  kv.write(out.file("pipeline.txt"));

  KeyValueConfig echo = kv;
  echo.set("command", "train");
  echo.set("exp", std::to_string(exp_id));
  echo.set("train.epochs", std::to_string(epochs));
  echo.set("train.batch", std::to_string(batch));
  echo.set("train.lr", std::to_string(lr));
  echo.set("train.momentum", std::to_string(momentum));
  echo.set("train.patience", std::to_string(patience));
  echo.write(out.file("config_effective.txt"));

  std::cout << "trained experiment " << exp_id << ": best val acc "
            << report.best_val_acc << " at epoch " << report.best_epoch << " ("
            << report.curve.size() << " epochs run)\n"
            << "checkpoint: " << out.file("checkpoint.bin") << "\n";
  out.commit();
  return 0;
}

// ---- eval ----

int cmd_eval(const CommonOpts& common, const std::string& checkpoint,
             const std::string& corpus_dir, const std::string& out_dir,
             const std::string& split_name, int exp_label) {
  OutputDir out(out_dir);
  const ModelState state = load_state(checkpoint);
  KeyValueConfig kv;
  const PipelineConfig cfg = pipeline_from_checkpoint_dir(common, checkpoint, &kv);

  const CorpusManifest manifest =
      load_manifest((fs::path(corpus_dir) / "manifest.csv").string());
  const NoiseBank bank = load_noise_bank((fs::path(corpus_dir) / "noise").string(),
                                         cfg.noise_patient, cfg.noise_control);
  const EvalResult result = evaluate(state, manifest, split_from_string(split_name),
                                     bank, cfg, common.workers);

  write_results_csv(exp_label, result.cm, out.file("results.csv"));
  write_per_speaker_csv(result, out.file("per_speaker.csv"));
  KeyValueConfig echo = kv;
  echo.set("command", "eval");
  echo.set("checkpoint", checkpoint);
  echo.set("split", split_name);
  echo.write(out.file("config_effective.txt"));

  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * result.cm.accuracy());
  std::cout << "split " << split_name << ": tp=" << result.cm.tp
            << " tn=" << result.cm.tn << " fp=" << result.cm.fp
            << " fn=" << result.cm.fn << " acc=" << buf << "%\n";
  out.commit();
  return 0;
}

// ---- probe ----

int cmd_probe(const CommonOpts& common, const std::string& corpus_dir,
              const std::string& out_dir, int epochs, int batch, double lr,
              int patience, bool tiny) {
  OutputDir out(out_dir);

  ProbeOptions opt;
  opt.corpus_dir = corpus_dir;
  opt.work_dir = out.path();
  opt.seed = common.seed;
  opt.workers = common.workers;
  opt.hyper.max_epochs = epochs;
  opt.hyper.batch_size = batch;
  opt.hyper.lr = lr;
  opt.hyper.patience = patience;
  KeyValueConfig kv = merge_config(common);
  opt.pipe = pipeline_config_from(kv);
  if (tiny) {
    const SpectroConfig sc = opt.pipe.spectro();
    const int frames =
        stft_frames(static_cast<std::size_t>(kWindowSeconds * sc.sample_rate), sc);
    opt.model = ModelConfig::tiny_for(sc.n_mels, frames);
  }

  const ProbeReport report = bias_probe(opt);
  write_probe_csv(report, out.file("probe.csv"));
  KeyValueConfig echo = kv;
  echo.set("command", "probe");
  echo.write(out.file("config_effective.txt"));

  std::cout << "injection on : normal " << report.with_injection.acc_normal
            << " swapped " << report.with_injection.acc_swapped << " drop "
            << report.with_injection.drop() << "\n"
            << "injection off: normal " << report.without_injection.acc_normal
            << " swapped " << report.without_injection.acc_swapped << " drop "
            << report.without_injection.drop() << "\n";
  out.commit();
  return 0;
}

// ---- explain ----

int cmd_explain(const CommonOpts& common, const std::string& checkpoint,
                const std::string& corpus_dir, const std::string& window_id,
                const std::string& class_name, const std::string& layer,
                const std::string& out_dir) {
  OutputDir out(out_dir);
  const ModelState state = load_state(checkpoint);
  KeyValueConfig kv;
  const PipelineConfig cfg = pipeline_from_checkpoint_dir(common, checkpoint, &kv);
  const Label target = label_from_string(class_name);

  const CorpusManifest manifest =
      load_manifest((fs::path(corpus_dir) / "manifest.csv").string());
  const NoiseBank bank = load_noise_bank((fs::path(corpus_dir) / "noise").string(),
                                         cfg.noise_patient, cfg.noise_control);

  const WindowRef ref = parse_window_id(window_id);
  const SpeakerRecord* rec = manifest.find(ref.speaker);
  if (rec == nullptr) {
    throw std::runtime_error("speaker '" + ref.speaker + "' not in manifest");
  }
  Rng rng(eval_rng_seed(cfg, rec->id));
  const PreparedWindow pw =
      prepare_window(*rec, bank, cfg, Mode::eval, ref.index, rng);

  const std::string target_layer =
      layer.empty() ? default_target_layer(state.config) : layer;
  const HeatMap heat = grad_cam(state, pw.features, target_layer, target);
  const auto [p_patient, p_control] = predict_window(state, pw.features);
  const Label predicted = p_patient >= p_control ? Label::patient : Label::control;

  if (cfg.layout == FeatureLayout::meta_only) {
    write_pgm(pw.features.values, out.file(window_id + "_original.pgm"));
    write_pgm_unit(heat.values, out.file(window_id + "_heat.pgm"));
    Mat modified = pw.features.values;
    for (std::size_t i = 0; i < modified.v.size(); ++i) modified.v[i] *= heat.values.v[i];
    write_pgm_unit(modified, out.file(window_id + "_modified.pgm"));
    std::cout << "meta-only layout: panels written, no audio region to resynthesize\n";
  } else {
    Mat heat_region(pw.mel.values.rows, pw.mel.values.cols);
    for (int r = 0; r < heat_region.rows; ++r) {
      for (int c = 0; c < heat_region.cols; ++c) heat_region(r, c) = heat.values(r, c);
    }
    const MelSpectrogram modified = apply_heatmap(pw.mel, heat_region);
    export_panel(pw.mel, heat, modified, out.file(window_id));
    const AudioClip audio =
        sonify(modified, pw.spec.phase, cfg.spectro(),
               static_cast<std::int64_t>(pw.window.samples.size()));
    write_wav(audio, out.file(window_id + "_resynth.wav"));
  }

  write_attention_csv({attention_summary(heat, cfg.layout, window_id, predicted)},
                      out.file("attention.csv"));
  KeyValueConfig echo = kv;
  echo.set("command", "explain");
  echo.set("window", window_id);
  echo.set("class", class_name);
  echo.set("layer", target_layer);
  echo.write(out.file("config_effective.txt"));

  std::cout << "window " << window_id << ": p(patient)=" << p_patient
            << " predicted=" << to_string(predicted) << ", artifacts in " << out.path()
            << "\n";
  out.commit();
  return 0;
}

// ---- resynth ----

int cmd_resynth(const CommonOpts& common, const std::string& checkpoint,
                const std::string& corpus_dir, const std::string& out_dir,
                const std::string& split_name, int limit) {
  OutputDir out(out_dir);
  const ModelState state = load_state(checkpoint);
  KeyValueConfig kv;
  const PipelineConfig cfg = pipeline_from_checkpoint_dir(common, checkpoint, &kv);
  if (cfg.layout == FeatureLayout::meta_only) {
    throw std::invalid_argument("resynth needs a layout with a spectrogram region");
  }

  const CorpusManifest manifest =
      load_manifest((fs::path(corpus_dir) / "manifest.csv").string());
  const NoiseBank bank = load_noise_bank((fs::path(corpus_dir) / "noise").string(),
                                         cfg.noise_patient, cfg.noise_control);

  std::vector<AttentionRow> attention;
  int emitted = 0;
  for (const SpeakerRecord* rec : manifest.in_split(split_from_string(split_name))) {
    if (emitted >= limit) break;
    Rng rng(eval_rng_seed(cfg, rec->id));
    const PreparedWindow pw = prepare_window(*rec, bank, cfg, Mode::eval, 0, rng);
    const auto [p_patient, p_control] = predict_window(state, pw.features);
    const Label predicted = p_patient >= p_control ? Label::patient : Label::control;
    const HeatMap heat =
        grad_cam(state, pw.features, default_target_layer(state.config), predicted);
    Mat heat_region(pw.mel.values.rows, pw.mel.values.cols);
    for (int r = 0; r < heat_region.rows; ++r) {
      for (int c = 0; c < heat_region.cols; ++c) heat_region(r, c) = heat.values(r, c);
    }
    const MelSpectrogram modified = apply_heatmap(pw.mel, heat_region);
    const std::string wid = rec->id + "_w0";
    const AudioClip audio =
        sonify(modified, pw.spec.phase, cfg.spectro(),
               static_cast<std::int64_t>(pw.window.samples.size()));
    write_wav(audio, out.file(wid + "_resynth.wav"));
    attention.push_back(attention_summary(heat, cfg.layout, wid, predicted));
    ++emitted;
  }
  write_attention_csv(attention, out.file("attention.csv"));
  KeyValueConfig echo = kv;
  echo.set("command", "resynth");
  echo.write(out.file("config_effective.txt"));
  std::cout << "resynthesized " << emitted << " windows into " << out.path() << "\n";
  out.commit();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spira: respiratory-audio screening with explainable CNNs"};
  app.require_subcommand(1);

  CommonOpts common;

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic labeled corpus");
  int patients = 60, controls = 60;
  int n_train = -1, n_val = -1, n_test = -1;
  bool full_scale = false, no_noise = false, swap_noise = false;
  double duration_min = 6.0, duration_max = 9.0, snr_db = 22.0;
  std::string gen_out, profile_file;
  gen->add_option("--patients", patients)->capture_default_str();
  gen->add_option("--controls", controls)->capture_default_str();
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--train", n_train, "train split size (default: 2/3)");
  gen->add_option("--val", n_val, "val split size");
  gen->add_option("--test", n_test, "test split size");
  gen->add_flag("--full-scale", full_scale,
                "432 speakers split 292/32/108");
  gen->add_option("--duration-min", duration_min)->capture_default_str();
  gen->add_option("--duration-max", duration_max)->capture_default_str();
  gen->add_option("--noise-snr-db", snr_db)->capture_default_str();
  gen->add_flag("--no-noise", no_noise, "disable the environment noise channels");
  gen->add_flag("--swap-noise", swap_noise, "swap the per-class noise channels");
  gen->add_option("--profile", profile_file, "profile file overriding the defaults");
  add_common(gen, &common);

  // train
  auto* tr = app.add_subcommand("train", "train an experiment configuration");
  int exp_id = 1, epochs = 50, batch = 16, patience = 5;
  double lr = 0.01, momentum = 0.9;
  std::string corpus_dir, train_out, init_from;
  tr->add_option("--exp", exp_id, "experiment id (1,2,3,5)")->required();
  tr->add_option("--corpus", corpus_dir)->required();
  tr->add_option("--out", train_out)->required();
  tr->add_option("--epochs", epochs)->capture_default_str();
  tr->add_option("--batch", batch)->capture_default_str();
  tr->add_option("--lr", lr)->capture_default_str();
  tr->add_option("--momentum", momentum)->capture_default_str();
  tr->add_option("--patience", patience)->capture_default_str();
  tr->add_option("--init-from", init_from, "warm-start from a checkpoint");
  add_common(tr, &common);

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint by window voting");
  std::string ckpt, eval_corpus, eval_out, split_name = "test";
  int exp_label = 0;
  ev->add_option("--checkpoint", ckpt)->required();
  ev->add_option("--corpus", eval_corpus)->required();
  ev->add_option("--out", eval_out)->required();
  ev->add_option("--split", split_name)->capture_default_str();
  ev->add_option("--exp", exp_label, "experiment id written to results.csv");
  add_common(ev, &common);

  // probe
  auto* pr = app.add_subcommand("probe", "bias probe: injection on/off vs noise swap");
  std::string probe_corpus, probe_out;
  int probe_epochs = 20, probe_batch = 16, probe_patience = 4;
  double probe_lr = 0.01;
  bool probe_tiny = false;
  pr->add_option("--corpus", probe_corpus)->required();
  pr->add_option("--out", probe_out)->required();
  pr->add_option("--epochs", probe_epochs)->capture_default_str();
  pr->add_option("--batch", probe_batch)->capture_default_str();
  pr->add_option("--lr", probe_lr)->capture_default_str();
  pr->add_option("--patience", probe_patience)->capture_default_str();
  pr->add_flag("--tiny", probe_tiny, "use the compact probe model");
  add_common(pr, &common);

  // explain
  auto* ex = app.add_subcommand("explain", "Grad-CAM panels and resynthesis for one window");
  std::string ex_ckpt, ex_corpus, ex_out, window_id, class_name = "patient", layer;
  ex->add_option("--checkpoint", ex_ckpt)->required();
  ex->add_option("--corpus", ex_corpus)->required();
  ex->add_option("--window", window_id, "window id, <speaker>_w<k>")->required();
  ex->add_option("--class", class_name, "patient or control")->capture_default_str();
  ex->add_option("--layer", layer, "target layer (default: last conv block)");
  ex->add_option("--out", ex_out)->required();
  add_common(ex, &common);

  // resynth
  auto* rs = app.add_subcommand("resynth", "batch heat-map-masked resynthesis");
  std::string rs_ckpt, rs_corpus, rs_out, rs_split = "test";
  int rs_limit = 8;
  rs->add_option("--checkpoint", rs_ckpt)->required();
  rs->add_option("--corpus", rs_corpus)->required();
  rs->add_option("--out", rs_out)->required();
  rs->add_option("--split", rs_split)->capture_default_str();
  rs->add_option("--limit", rs_limit)->capture_default_str();
  add_common(rs, &common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      return cmd_gen(common, gen_out, patients, controls, n_train, n_val, n_test,
                     full_scale, duration_min, duration_max, snr_db, no_noise,
                     swap_noise, profile_file);
    }
    if (tr->parsed()) {
      return cmd_train(common, exp_id, corpus_dir, train_out, epochs, batch, lr,
                       momentum, patience, init_from);
    }
    if (ev->parsed()) {
      return cmd_eval(common, ckpt, eval_corpus, eval_out, split_name, exp_label);
    }
    if (pr->parsed()) {
      return cmd_probe(common, probe_corpus, probe_out, probe_epochs, probe_batch,
                       probe_lr, probe_patience, probe_tiny);
    }
    if (ex->parsed()) {
      return cmd_explain(common, ex_ckpt, ex_corpus, window_id, class_name, layer,
                         ex_out);
    }
    if (rs->parsed()) {
      return cmd_resynth(common, rs_ckpt, rs_corpus, rs_out, rs_split, rs_limit);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
