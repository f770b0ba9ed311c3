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

#include "spira/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "spira/parallel.hpp"

namespace fs = std::filesystem;

namespace spira {

std::string to_string(Label l) { return l == Label::patient ? "patient" : "control"; }
std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Label label_from_string(const std::string& s) {
  if (s == "patient") return Label::patient;
  if (s == "control") return Label::control;
  throw std::runtime_error("unknown label token: '" + s + "'");
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw std::runtime_error("unknown split token: '" + s + "'");
}

const SpeakerRecord* CorpusManifest::find(const std::string& id) const {
  for (const auto& r : records) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::vector<const SpeakerRecord*> CorpusManifest::in_split(Split s) const {
  std::vector<const SpeakerRecord*> out;
  for (const auto& r : records) {
    auto it = split.find(r.id);
    if (it != split.end() && it->second == s) out.push_back(&r);
  }
  return out;
}

void CorpusManifest::validate() const {
  std::set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.id).second) {
      throw std::runtime_error("duplicate id: '" + r.id + "'");
    }
    if (r.age < 18 || r.age > 100) {
      throw std::runtime_error("age out of range [18,100] for id '" + r.id + "'");
    }
    if (r.sex != 0 && r.sex != 1) {
      throw std::runtime_error("sex must be 0 or 1 for id '" + r.id + "'");
    }
    if (split.find(r.id) == split.end()) {
      throw std::runtime_error("record '" + r.id + "' missing a split assignment");
    }
  }
  for (const auto& [id, s] : split) {
    (void)s;
    if (ids.find(id) == ids.end()) {
      throw std::runtime_error("split entry for unknown id '" + id + "'");
    }
  }
}

void GenProfile::validate() const {
  if (!(duration_min > 0) || !(duration_max >= duration_min)) {
    throw std::invalid_argument("profile: utterance duration range must be positive");
  }
  for (const ClassProfile* cp : {&patient, &control}) {
    if (!(cp->pause_mean > 0) || !(cp->segment_mean > 0)) {
      throw std::invalid_argument("profile: pause/segment means must be positive");
    }
    if (cp->pause_sd < 0 || cp->segment_sd < 0 || cp->energy_decay < 0) {
      throw std::invalid_argument("profile: negative spread or decay");
    }
  }
  if (!(f0_male_min > 0 && f0_male_min < f0_male_max) ||
      !(f0_female_min > 0 && f0_female_min < f0_female_max)) {
    throw std::invalid_argument("profile: bad F0 ranges");
  }
  if (age_min < 18 || age_max > 100 || age_min > age_max) {
    throw std::invalid_argument("profile: age range must sit inside [18,100]");
  }
  if (sample_rate <= 0) throw std::invalid_argument("profile: bad sample rate");
  if (noise_bank_per_channel < 1 || !(noise_bank_seconds > 0)) {
    throw std::invalid_argument("profile: bad noise bank settings");
  }
}

namespace {

constexpr double kRampSeconds = 0.010;  // cosine on/off ramps on voiced segments
constexpr double kSpeechAmp = 0.55;
const double kHarmonicAmps[3] = {1.0, 0.5, 0.25};

double clipped_normal(Rng& rng, double mean, double sd, double lo) {
  // Symmetric 3-sigma clip keeps the mean where the profile says it is.
  double x = rng.normal(mean, sd);
  x = std::clamp(x, mean - 3.0 * sd, mean + 3.0 * sd);
  return std::max(x, lo);
}

void add_tone_burst(std::vector<double>& x, int sr, double t0, double dur,
                    double freq, double amp) {
  const auto begin = static_cast<std::int64_t>(t0 * sr);
  const auto len = static_cast<std::int64_t>(dur * sr);
  const auto n = static_cast<std::int64_t>(x.size());
  for (std::int64_t i = 0; i < len; ++i) {
    const std::int64_t j = begin + i;
    if (j < 0 || j >= n) continue;
    // Hann-shaped burst envelope.
    const double env = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / len);
    x[static_cast<std::size_t>(j)] +=
        amp * env * std::sin(2.0 * M_PI * freq * i / sr);
  }
}

double rms(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (const double s : x) acc += s * s;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

}  // namespace

AudioClip synth_noise_texture(Label channel, double seconds, int sample_rate,
                              Rng& rng) {
  const auto n = static_cast<std::size_t>(seconds * sample_rate);
  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.samples.assign(n, 0.0);
  auto& x = clip.samples;

  if (channel == Label::patient) {
    // Hospital ward: mains-style hum plus intermittent monitor beeps.
    const double hum_phase[3] = {rng.uniform(0, 2 * M_PI), rng.uniform(0, 2 * M_PI),
                                 rng.uniform(0, 2 * M_PI)};
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / sample_rate;
      const double wobble = 0.8 + 0.2 * std::sin(2.0 * M_PI * 0.3 * t);
      x[i] = wobble * (0.40 * std::sin(2.0 * M_PI * 100.0 * t + hum_phase[0]) +
                       0.22 * std::sin(2.0 * M_PI * 200.0 * t + hum_phase[1]) +
                       0.12 * std::sin(2.0 * M_PI * 300.0 * t + hum_phase[2]));
    }
    // Low level broadband floor.
    double lp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      lp = 0.92 * lp + 0.08 * rng.uniform(-1.0, 1.0);
      x[i] += 0.25 * lp;
    }
    double t = rng.uniform(0.2, 1.0);
    while (t < seconds) {
      const double freq = rng.uniform(900.0, 1500.0);
      add_tone_burst(x, sample_rate, t, 0.12, freq, 0.9);
      t += rng.uniform(0.8, 1.6);
    }
  } else {
    // Domestic: gated pink-ish noise bursts over a faint floor.
    double lp1 = 0.0, lp2 = 0.0;
    std::vector<double> pink(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = rng.uniform(-1.0, 1.0);
      lp1 = 0.98 * lp1 + 0.02 * w;
      lp2 = 0.80 * lp2 + 0.20 * w;
      pink[i] = 6.0 * lp1 + 1.2 * lp2 + 0.1 * w;
    }
    double t = 0.0;
    std::vector<double> gate(n, 0.12);
    while (t < seconds) {
      const double on = rng.uniform(0.4, 1.2);
      const double amp = rng.uniform(0.5, 1.0);
      const auto b = static_cast<std::size_t>(t * sample_rate);
      const auto e = std::min(n, b + static_cast<std::size_t>(on * sample_rate));
      for (std::size_t i = b; i < e; ++i) gate[i] = amp;
      t += on + rng.uniform(0.2, 0.8);
    }
    for (std::size_t i = 0; i < n; ++i) x[i] = pink[i] * gate[i];
  }

  const double r = rms(x);
  if (r > 0) {
    for (double& s : x) s /= r;  // unit RMS; callers set the level
  }
  return clip;
}

SpeakerClip render_speaker(const SpeakerRecord& rec, std::uint64_t corpus_seed,
                           const GenProfile& profile) {
  profile.validate();
  Rng speech_rng(Rng::derive(corpus_seed, "speech:" + rec.id));
  Rng noise_rng(Rng::derive(corpus_seed, "noise:" + rec.id));

  const int sr = profile.sample_rate;
  const ClassProfile& cp = profile.for_label(rec.label);
  const double target = speech_rng.uniform(profile.duration_min, profile.duration_max);
  const double f0_lo = rec.sex == 0 ? profile.f0_male_min : profile.f0_female_min;
  const double f0_hi = rec.sex == 0 ? profile.f0_male_max : profile.f0_female_max;
  const double f0_speaker = speech_rng.uniform(f0_lo, f0_hi);
  const double speaker_amp = kSpeechAmp * speech_rng.uniform(0.9, 1.1);

  // Segment plan: speech, pause, speech, ..., speech.
  struct Piece {
    bool voiced;
    double dur;
    double f0;
    double amp;
    double phase[3];
  };
  std::vector<Piece> plan;
  double total = 0.0;
  for (;;) {
    Piece seg;
    seg.voiced = true;
    seg.dur = clipped_normal(speech_rng, cp.segment_mean, cp.segment_sd, 0.15);
    seg.f0 = f0_speaker * speech_rng.uniform(0.98, 1.02);
    seg.amp = speaker_amp * speech_rng.uniform(0.85, 1.0);
    for (double& p : seg.phase) p = speech_rng.uniform(0.0, 2.0 * M_PI);
    plan.push_back(seg);
    total += seg.dur;
    if (total >= target) break;
    Piece pause{};
    pause.voiced = false;
    pause.dur = clipped_normal(speech_rng, cp.pause_mean, cp.pause_sd, 0.03);
    plan.push_back(pause);
    total += pause.dur;
  }

  SpeakerClip out;
  out.clip.sample_rate = sr;
  out.clip.source_id = rec.id;
  out.clip.samples.assign(static_cast<std::size_t>(std::llround(total * sr)), 0.0);
  auto& x = out.clip.samples;
  const auto n = static_cast<std::int64_t>(x.size());

  double t0 = 0.0;
  const auto ramp_len = static_cast<std::int64_t>(kRampSeconds * sr);
  for (const Piece& seg : plan) {
    if (!seg.voiced) {
      out.pauses.push_back({rec.id, t0, t0 + seg.dur});
      t0 += seg.dur;
      continue;
    }
    const auto begin = static_cast<std::int64_t>(std::llround(t0 * sr));
    const auto len = static_cast<std::int64_t>(std::llround(seg.dur * sr));
    for (std::int64_t i = 0; i < len; ++i) {
      const std::int64_t j = begin + i;
      if (j < 0 || j >= n) break;
      const double t = static_cast<double>(j) / sr;
      double s = 0.0;
      for (int h = 0; h < 3; ++h) {
        s += kHarmonicAmps[h] *
             std::sin(2.0 * M_PI * seg.f0 * (h + 1) * (static_cast<double>(i) / sr) +
                      seg.phase[h]);
      }
      // On/off ramps inside the voiced segment keep pauses truly silent.
      double ramp = 1.0;
      if (i < ramp_len) ramp = 0.5 - 0.5 * std::cos(M_PI * i / ramp_len);
      if (len - 1 - i < ramp_len) {
        ramp = std::min(ramp, 0.5 - 0.5 * std::cos(M_PI * (len - 1 - i) / ramp_len));
      }
      const double decay = std::exp(-cp.energy_decay * t);
      x[static_cast<std::size_t>(j)] = seg.amp * decay * ramp * s / 1.75;
    }
    t0 += seg.dur;
  }

  if (profile.noise_enabled) {
    Label channel = rec.label;
    if (profile.swap_noise_channels) {
      channel = channel == Label::patient ? Label::control : Label::patient;
    }
    AudioClip noise = synth_noise_texture(channel, total, sr, noise_rng);
    const double speech_rms = rms(x);
    const double gain = speech_rms / std::pow(10.0, profile.noise_snr_db / 20.0);
    const std::size_t m = std::min(x.size(), noise.samples.size());
    for (std::size_t i = 0; i < m; ++i) x[i] += gain * noise.samples[i];
  }

  double peak = 0.0;
  for (const double s : x) peak = std::max(peak, std::abs(s));
  if (peak > 0.98) {
    const double k = 0.95 / peak;
    for (double& s : x) s *= k;
  }
  return out;
}

GeneratedCorpus generate_corpus(int n_patients, int n_controls,
                                std::uint64_t seed, const GenProfile& profile,
                                const std::string& out_dir, int workers) {
  if (n_patients < 1 || n_controls < 1) {
    throw std::invalid_argument("generate_corpus: counts must be >= 1");
  }
  profile.validate();

  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "clips", ec);
  fs::create_directories(fs::path(out_dir) / "noise", ec);
  if (!fs::is_directory(fs::path(out_dir) / "clips")) {
    throw std::runtime_error("generate_corpus: cannot create output directory " + out_dir);
  }

  GeneratedCorpus out;
  auto make_record = [&](Label label, int k) {
    SpeakerRecord rec;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%c%03d", label == Label::patient ? 'p' : 'c', k);
    rec.id = buf;
    rec.label = label;
    Rng meta(Rng::derive(seed, "meta:" + rec.id));
    rec.age = profile.age_min +
              static_cast<int>(meta.uniform_int(profile.age_max - profile.age_min + 1));
    rec.sex = static_cast<int>(meta.uniform_int(2));
    rec.clip_path = "clips/" + rec.id + ".wav";
    return rec;
  };
  for (int k = 0; k < n_patients; ++k) out.manifest.records.push_back(make_record(Label::patient, k));
  for (int k = 0; k < n_controls; ++k) out.manifest.records.push_back(make_record(Label::control, k));
  for (const auto& r : out.manifest.records) out.manifest.split[r.id] = Split::train;

  const int n = static_cast<int>(out.manifest.records.size());
  std::vector<std::vector<PauseSpan>> pauses(static_cast<std::size_t>(n));
  parallel_for(n, workers, [&](int i) {
    const SpeakerRecord& rec = out.manifest.records[static_cast<std::size_t>(i)];
    SpeakerClip sc = render_speaker(rec, seed, profile);
    write_wav(sc.clip, (fs::path(out_dir) / rec.clip_path).string());
    pauses[static_cast<std::size_t>(i)] = std::move(sc.pauses);
  });
  for (auto& p : pauses) {
    out.pauses.insert(out.pauses.end(), p.begin(), p.end());
  }

  for (const Label channel : {Label::patient, Label::control}) {
    const std::string name = channel == Label::patient ? "hospital" : "domestic";
    for (int k = 0; k < profile.noise_bank_per_channel; ++k) {
      Rng rng(Rng::derive(seed, "bank:" + name, static_cast<std::uint64_t>(k)));
      AudioClip noise = synth_noise_texture(channel, profile.noise_bank_seconds,
                                            profile.sample_rate, rng);
      double peak = 0.0;
      for (const double s : noise.samples) peak = std::max(peak, std::abs(s));
      if (peak > 0) {
        for (double& s : noise.samples) s *= 0.9 / peak;
      }
      write_wav(noise, (fs::path(out_dir) / "noise" / (name + "_" + std::to_string(k) + ".wav")).string());
    }
  }

  save_manifest(out.manifest, (fs::path(out_dir) / "manifest.csv").string());
  save_pauses(out.pauses, (fs::path(out_dir) / "pauses.csv").string());
  save_profile(profile, (fs::path(out_dir) / "profile.txt").string());
  {
    // The corpus seed is needed later to regenerate counterfactual clips.
    std::ofstream seed_out((fs::path(out_dir) / "seed.txt").string());
    seed_out << seed << '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

CorpusManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("manifest not found: " + path);
  const fs::path base = fs::path(path).parent_path();

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty manifest: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "id,label,age,sex,path,split") {
    throw std::runtime_error("manifest header must be id,label,age,sex,path,split; got '" +
                             line + "'");
  }

  CorpusManifest m;
  std::set<std::string> seen;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 6) {
      throw std::runtime_error("manifest line " + std::to_string(lineno) +
                               ": expected 6 fields");
    }
    SpeakerRecord rec;
    rec.id = fields[0];
    if (!seen.insert(rec.id).second) {
      throw std::runtime_error("duplicate id: '" + rec.id + "'");
    }
    rec.label = label_from_string(fields[1]);
    try {
      rec.age = std::stoi(fields[2]);
    } catch (const std::exception&) {
      throw std::runtime_error("bad age '" + fields[2] + "' for id '" + rec.id + "'");
    }
    if (fields[3] == "0") {
      rec.sex = 0;
    } else if (fields[3] == "1") {
      rec.sex = 1;
    } else {
      throw std::runtime_error("unknown sex token: '" + fields[3] + "'");
    }
    fs::path clip = fields[4];
    if (clip.is_relative()) clip = base / clip;
    if (!fs::exists(clip)) {
      throw std::runtime_error("clip path does not exist for id '" + rec.id +
                               "': " + clip.string());
    }
    rec.clip_path = clip.string();
    m.split[rec.id] = split_from_string(fields[5]);
    m.records.push_back(std::move(rec));
  }
  m.validate();
  return m;
}

void save_manifest(const CorpusManifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  const fs::path base = fs::path(path).parent_path();
  out << "id,label,age,sex,path,split\n";
  for (const auto& r : m.records) {
    fs::path clip = r.clip_path;
    if (clip.is_absolute()) {
      std::error_code ec;
      const fs::path rel = fs::relative(clip, base, ec);
      if (!ec && !rel.empty()) clip = rel;
    }
    const auto it = m.split.find(r.id);
    const std::string split_tok = it != m.split.end() ? to_string(it->second) : "train";
    out << r.id << ',' << to_string(r.label) << ',' << r.age << ',' << r.sex << ','
        << clip.generic_string() << ',' << split_tok << '\n';
  }
}

CorpusManifest split_manifest(const CorpusManifest& m, int n_train, int n_val,
                              int n_test, std::uint64_t seed) {
  if (n_train < 0 || n_val < 0 || n_test < 0) {
    throw std::invalid_argument("split_manifest: negative split size");
  }
  const int total = n_train + n_val + n_test;
  if (total > static_cast<int>(m.records.size())) {
    throw std::invalid_argument("split_manifest: insufficient records (" +
                                std::to_string(m.records.size()) + " < " +
                                std::to_string(total) + ")");
  }

  std::vector<int> patient_idx, control_idx;
  for (int i = 0; i < static_cast<int>(m.records.size()); ++i) {
    (m.records[static_cast<std::size_t>(i)].label == Label::patient ? patient_idx
                                                                    : control_idx)
        .push_back(i);
  }
  Rng rng(Rng::derive(seed, "split"));
  auto shuffle = [&rng](std::vector<int>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[static_cast<std::size_t>(i)],
                v[static_cast<std::size_t>(rng.uniform_int(i + 1))]);
    }
  };
  shuffle(patient_idx);
  shuffle(control_idx);

  const double n_all = static_cast<double>(m.records.size());
  const std::size_t class_n[2] = {patient_idx.size(), control_idx.size()};
  std::size_t cursor[2] = {0, 0};
  std::vector<int>* pools[2] = {&patient_idx, &control_idx};

  CorpusManifest out;
  const int sizes[3] = {n_train, n_val, n_test};
  const Split split_ids[3] = {Split::train, Split::val, Split::test};
  std::vector<std::pair<int, Split>> chosen;  // manifest index -> split
  for (int s = 0; s < 3; ++s) {
    // Proportional class quota with largest-remainder rounding.
    const double q0 = sizes[s] * static_cast<double>(class_n[0]) / n_all;
    const double q1 = sizes[s] * static_cast<double>(class_n[1]) / n_all;
    int take0 = static_cast<int>(std::floor(q0));
    int take1 = static_cast<int>(std::floor(q1));
    double frac0 = q0 - take0;
    double frac1 = q1 - take1;
    int rem = sizes[s] - take0 - take1;
    while (rem-- > 0) {
      if (frac0 >= frac1) {
        ++take0;
        frac0 = -1.0;
      } else {
        ++take1;
        frac1 = -1.0;
      }
    }
    // Clamp against pool exhaustion, spilling into the other class.
    for (int c = 0; c < 2; ++c) {
      int& take = c == 0 ? take0 : take1;
      int& other = c == 0 ? take1 : take0;
      const int avail = static_cast<int>(class_n[c] - cursor[c]);
      if (take > avail) {
        other += take - avail;
        take = avail;
      }
    }
    for (int c = 0; c < 2; ++c) {
      const int take = c == 0 ? take0 : take1;
      for (int k = 0; k < take; ++k) {
        chosen.emplace_back((*pools[c])[cursor[c]++], split_ids[s]);
      }
    }
  }

  std::sort(chosen.begin(), chosen.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [idx, sp] : chosen) {
    const SpeakerRecord& rec = m.records[static_cast<std::size_t>(idx)];
    out.records.push_back(rec);
    out.split[rec.id] = sp;
  }
  return out;
}

std::vector<PauseSpan> load_pauses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("pauses file not found: " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<PauseSpan> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw std::runtime_error("bad pauses row: " + line);
    out.push_back({f[0], std::stod(f[1]), std::stod(f[2])});
  }
  return out;
}

void save_pauses(const std::vector<PauseSpan>& pauses, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write pauses: " + path);
  out << "id,begin_s,end_s\n";
  char buf[64];
  for (const auto& p : pauses) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f", p.id.c_str(), p.begin_s, p.end_s);
    out << buf << '\n';
  }
}

namespace {

void put(std::ostream& out, const std::string& k, double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  out << k << '=' << buf << '\n';
}

}  // namespace

void save_profile(const GenProfile& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write profile: " + path);
  put(out, "duration_min", p.duration_min);
  put(out, "duration_max", p.duration_max);
  const std::pair<const char*, const ClassProfile*> classes[2] = {
      {"patient", &p.patient}, {"control", &p.control}};
  for (const auto& [name, cp] : classes) {
    const std::string prefix = std::string(name) + ".";
    put(out, prefix + "pause_mean", cp->pause_mean);
    put(out, prefix + "pause_sd", cp->pause_sd);
    put(out, prefix + "segment_mean", cp->segment_mean);
    put(out, prefix + "segment_sd", cp->segment_sd);
    put(out, prefix + "energy_decay", cp->energy_decay);
  }
  put(out, "f0_male_min", p.f0_male_min);
  put(out, "f0_male_max", p.f0_male_max);
  put(out, "f0_female_min", p.f0_female_min);
  put(out, "f0_female_max", p.f0_female_max);
  out << "age_min=" << p.age_min << '\n';
  out << "age_max=" << p.age_max << '\n';
  put(out, "noise_snr_db", p.noise_snr_db);
  out << "noise_enabled=" << (p.noise_enabled ? 1 : 0) << '\n';
  out << "swap_noise_channels=" << (p.swap_noise_channels ? 1 : 0) << '\n';
  out << "sample_rate=" << p.sample_rate << '\n';
  out << "noise_bank_per_channel=" << p.noise_bank_per_channel << '\n';
  put(out, "noise_bank_seconds", p.noise_bank_seconds);
}

GenProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("profile not found: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("bad profile line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  GenProfile p;
  auto num = [&](const std::string& k, double dflt) {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : std::stod(it->second);
  };
  p.duration_min = num("duration_min", p.duration_min);
  p.duration_max = num("duration_max", p.duration_max);
  const std::pair<const char*, ClassProfile*> classes[2] = {{"patient", &p.patient},
                                                            {"control", &p.control}};
  for (const auto& [name, cp] : classes) {
    const std::string prefix = std::string(name) + ".";
    cp->pause_mean = num(prefix + "pause_mean", cp->pause_mean);
    cp->pause_sd = num(prefix + "pause_sd", cp->pause_sd);
    cp->segment_mean = num(prefix + "segment_mean", cp->segment_mean);
    cp->segment_sd = num(prefix + "segment_sd", cp->segment_sd);
    cp->energy_decay = num(prefix + "energy_decay", cp->energy_decay);
  }
  p.f0_male_min = num("f0_male_min", p.f0_male_min);
  p.f0_male_max = num("f0_male_max", p.f0_male_max);
  p.f0_female_min = num("f0_female_min", p.f0_female_min);
  p.f0_female_max = num("f0_female_max", p.f0_female_max);
  p.age_min = static_cast<int>(num("age_min", p.age_min));
  p.age_max = static_cast<int>(num("age_max", p.age_max));
  p.noise_snr_db = num("noise_snr_db", p.noise_snr_db);
  p.noise_enabled = num("noise_enabled", p.noise_enabled ? 1 : 0) != 0;
  p.swap_noise_channels = num("swap_noise_channels", p.swap_noise_channels ? 1 : 0) != 0;
  p.sample_rate = static_cast<int>(num("sample_rate", p.sample_rate));
  p.noise_bank_per_channel =
      static_cast<int>(num("noise_bank_per_channel", p.noise_bank_per_channel));
  p.noise_bank_seconds = num("noise_bank_seconds", p.noise_bank_seconds);
  p.validate();
  return p;
}

}  // namespace spira
