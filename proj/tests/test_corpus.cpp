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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <map>
#include <set>

#include "spira/corpus.hpp"
#include "test_util.hpp"

using namespace spira;
namespace tu = spira::testutil;

namespace {

CorpusManifest synthetic_manifest(int n_patients, int n_controls,
                                  const std::string& dir) {
  // Records only; clip paths point at one shared placeholder WAV.
  AudioClip placeholder;
  placeholder.sample_rate = 16000;
  placeholder.samples.assign(16000, 0.0);
  const std::string wav = dir + "/placeholder.wav";
  write_wav(placeholder, wav);

  CorpusManifest m;
  for (int i = 0; i < n_patients + n_controls; ++i) {
    SpeakerRecord r;
    const bool patient = i < n_patients;
    r.id = (patient ? "p" : "c") + std::to_string(i);
    r.label = patient ? Label::patient : Label::control;
    r.age = 30 + (i % 40);
    r.sex = i % 2;
    r.clip_path = wav;
    m.records.push_back(r);
    m.split[r.id] = Split::train;
  }
  return m;
}

}  // namespace

TEST_CASE("2 patients + 2 controls produce 4 unique ids and 4 WAVs") {
  tu::TempDir dir("gen");
  const GeneratedCorpus corpus = generate_corpus(2, 2, 7, GenProfile{}, dir.path());
  CHECK(corpus.manifest.records.size() == 4);
  std::set<std::string> ids;
  for (const auto& r : corpus.manifest.records) {
    ids.insert(r.id);
    CHECK(std::filesystem::exists(std::filesystem::path(dir.path()) / r.clip_path));
  }
  CHECK(ids.size() == 4);
  corpus.manifest.validate();
}

TEST_CASE("generation is deterministic to the byte") {
  tu::TempDir a("gen_a");
  tu::TempDir b("gen_b");
  generate_corpus(2, 1, 123, GenProfile{}, a.path());
  generate_corpus(2, 1, 123, GenProfile{}, b.path());
  for (const char* name : {"clips/p000.wav", "clips/p001.wav", "clips/c000.wav",
                           "noise/hospital_0.wav", "noise/domestic_3.wav"}) {
    const auto ba = tu::read_bytes(a.path() + "/" + name);
    const auto bb = tu::read_bytes(b.path() + "/" + name);
    REQUIRE(!ba.empty());
    REQUIRE(ba == bb);
  }
  // A different seed must change the audio.
  tu::TempDir c("gen_c");
  generate_corpus(2, 1, 124, GenProfile{}, c.path());
  CHECK(tu::read_bytes(a.path() + "/clips/p000.wav") !=
        tu::read_bytes(c.path() + "/clips/p000.wav"));
}

TEST_CASE("patient silence runs average near 400 ms over 100 clips") {
  // Measured with the silence-run oracle, not the generator's annotations.
  tu::TempDir dir("pause");
  GenProfile profile;
  double sum = 0.0;
  int count = 0;
  for (int k = 0; k < 100; ++k) {
    SpeakerRecord rec;
    rec.id = "p" + std::to_string(k);
    rec.label = Label::patient;
    rec.age = 50;
    rec.sex = k % 2;
    const SpeakerClip sc = render_speaker(rec, 31, profile);
    for (const double run : tu::silence_runs(sc.clip)) {
      sum += run;
      ++count;
    }
  }
  REQUIRE(count > 200);
  const double mean = sum / count;
  CHECK(std::abs(mean - 0.400) <= 0.050);
}

TEST_CASE("class-conditional pause means track the profile within 10%") {
  GenProfile profile;
  std::map<Label, std::pair<double, int>> acc;
  for (int k = 0; k < 100; ++k) {
    for (const Label label : {Label::patient, Label::control}) {
      SpeakerRecord rec;
      rec.id = (label == Label::patient ? "p" : "c") + std::to_string(k);
      rec.label = label;
      rec.age = 40;
      rec.sex = k % 2;
      const SpeakerClip sc = render_speaker(rec, 77, profile);
      // Control pauses (180 ms) need a finer minimum-run cutoff.
      for (const double run : tu::silence_runs(sc.clip, 0.1, 0.005, 0.08)) {
        acc[label].first += run;
        acc[label].second += 1;
      }
    }
  }
  const double patient_mean = acc[Label::patient].first / acc[Label::patient].second;
  const double control_mean = acc[Label::control].first / acc[Label::control].second;
  CHECK(std::abs(patient_mean - profile.patient.pause_mean) <=
        0.1 * profile.patient.pause_mean);
  CHECK(std::abs(control_mean - profile.control.pause_mean) <=
        0.1 * profile.control.pause_mean);
  // Patients also pause more often per second of audio.
  CHECK(acc[Label::patient].second > acc[Label::control].second);
}

TEST_CASE("pause annotations line up with measured silence") {
  SpeakerRecord rec{"p0", Label::patient, 44, 0, ""};
  const SpeakerClip sc = render_speaker(rec, 5, GenProfile{});
  const auto runs = tu::silence_runs(sc.clip);
  // Annotation count and oracle count agree (interior pauses only).
  CHECK(static_cast<int>(runs.size()) >= static_cast<int>(sc.pauses.size()) - 1);
  for (const auto& p : sc.pauses) {
    CHECK(p.end_s > p.begin_s);
    CHECK(p.end_s <= sc.clip.duration() + 1e-6);
  }
}

TEST_CASE("swap_noise_channels keeps speech identical") {
  SpeakerRecord rec{"p0", Label::patient, 44, 0, ""};
  GenProfile plain;
  plain.noise_enabled = false;
  GenProfile swapped = plain;
  swapped.swap_noise_channels = true;
  const SpeakerClip a = render_speaker(rec, 9, plain);
  const SpeakerClip b = render_speaker(rec, 9, swapped);
  REQUIRE(a.clip.samples.size() == b.clip.samples.size());
  for (std::size_t i = 0; i < a.clip.samples.size(); ++i) {
    REQUIRE(a.clip.samples[i] == b.clip.samples[i]);
  }
}

TEST_CASE("generator rejects bad inputs") {
  tu::TempDir dir("gen_bad");
  GenProfile zero;
  zero.duration_min = 0.0;
  zero.duration_max = 0.0;
  CHECK_THROWS_AS(generate_corpus(1, 1, 0, zero, dir.path()), std::invalid_argument);
  CHECK_THROWS_AS(generate_corpus(0, 1, 0, GenProfile{}, dir.path()),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_corpus(1, 1, 0, GenProfile{}, "/proc/nope/unwritable"),
                  std::runtime_error);
}

TEST_CASE("manifest round trip via CSV") {
  tu::TempDir dir("manifest");
  const GeneratedCorpus corpus = generate_corpus(3, 2, 11, GenProfile{}, dir.path());
  const CorpusManifest loaded = load_manifest(dir.file("manifest.csv"));
  REQUIRE(loaded.records.size() == 5);
  for (std::size_t i = 0; i < loaded.records.size(); ++i) {
    CHECK(loaded.records[i].id == corpus.manifest.records[i].id);
    CHECK(loaded.records[i].age == corpus.manifest.records[i].age);
    CHECK(std::filesystem::exists(loaded.records[i].clip_path));
  }
}

TEST_CASE("manifest loader reports specific errors") {
  tu::TempDir dir("manifest_err");
  AudioClip ok;
  ok.sample_rate = 16000;
  ok.samples.assign(100, 0.0);
  write_wav(ok, dir.file("a.wav"));

  auto write_manifest = [&](const std::string& body) {
    std::ofstream out(dir.file("m.csv"));
    out << "id,label,age,sex,path,split\n" << body;
  };

  write_manifest("s1,patient,40,0,a.wav,train\ns1,control,41,1,a.wav,train\n");
  CHECK_THROWS_WITH_AS(load_manifest(dir.file("m.csv")),
                       doctest::Contains("duplicate id: 's1'"), std::runtime_error);

  write_manifest("s1,positive,40,0,a.wav,train\n");
  CHECK_THROWS_WITH_AS(load_manifest(dir.file("m.csv")),
                       doctest::Contains("unknown label token: 'positive'"),
                       std::runtime_error);

  write_manifest("s1,patient,40,2,a.wav,train\n");
  CHECK_THROWS_WITH_AS(load_manifest(dir.file("m.csv")),
                       doctest::Contains("unknown sex token"), std::runtime_error);

  write_manifest("s1,patient,40,0,gone.wav,train\n");
  CHECK_THROWS_WITH_AS(load_manifest(dir.file("m.csv")),
                       doctest::Contains("does not exist"), std::runtime_error);

  write_manifest("s1,patient,17,0,a.wav,train\n");
  CHECK_THROWS_AS(load_manifest(dir.file("m.csv")), std::runtime_error);

  CHECK_THROWS_AS(load_manifest(dir.file("missing.csv")), std::runtime_error);
}

TEST_CASE("the full-scale 432-speaker split sizes come out exactly") {
  tu::TempDir dir("split");
  const CorpusManifest m = synthetic_manifest(216, 216, dir.path());
  const CorpusManifest out = split_manifest(m, 292, 32, 108, 3);
  CHECK(out.in_split(Split::train).size() == 292);
  CHECK(out.in_split(Split::val).size() == 32);
  CHECK(out.in_split(Split::test).size() == 108);
  out.validate();
}

TEST_CASE("split with everything in train") {
  tu::TempDir dir("split");
  const CorpusManifest m = synthetic_manifest(5, 5, dir.path());
  const CorpusManifest out = split_manifest(m, 10, 0, 0, 1);
  CHECK(out.in_split(Split::train).size() == 10);
  CHECK(out.records.size() == 10);
}

TEST_CASE("stratified split keeps classes balanced, verified by recount") {
  tu::TempDir dir("split");
  const CorpusManifest m = synthetic_manifest(20, 20, dir.path());
  const CorpusManifest out = split_manifest(m, 20, 4, 16, 1);
  // Independent recount over the emitted split.
  std::map<Split, std::map<Label, int>> counts;
  for (const auto& r : out.records) {
    counts[out.split.at(r.id)][r.label]++;
  }
  CHECK(counts[Split::train][Label::patient] == 10);
  CHECK(counts[Split::train][Label::control] == 10);
  CHECK(counts[Split::val][Label::patient] == 2);
  CHECK(counts[Split::val][Label::control] == 2);
  CHECK(counts[Split::test][Label::patient] == 8);
  CHECK(counts[Split::test][Label::control] == 8);
}

TEST_CASE("splits partition the selected ids for many shapes") {
  tu::TempDir dir("split");
  for (const auto& [np, nc, tr, va, te] :
       {std::tuple{7, 13, 10, 4, 6}, std::tuple{30, 10, 20, 10, 10},
        std::tuple{9, 9, 12, 3, 3}, std::tuple{50, 30, 56, 8, 16}}) {
    const CorpusManifest m = synthetic_manifest(np, nc, dir.path());
    const CorpusManifest out = split_manifest(m, tr, va, te, 5);
    CHECK(static_cast<int>(out.records.size()) == tr + va + te);
    std::set<std::string> seen;
    for (const auto& r : out.records) {
      REQUIRE(seen.insert(r.id).second);
      REQUIRE(out.split.count(r.id) == 1);
    }
    CHECK(static_cast<int>(out.in_split(Split::train).size()) == tr);
    CHECK(static_cast<int>(out.in_split(Split::val).size()) == va);
    CHECK(static_cast<int>(out.in_split(Split::test).size()) == te);
    // Class balance within one of proportional.
    for (const Split s : {Split::train, Split::val, Split::test}) {
      int pat = 0, tot = 0;
      for (const auto* r : out.in_split(s)) {
        tot++;
        if (r->label == Label::patient) pat++;
      }
      if (tot == 0) continue;
      const double expect = static_cast<double>(tot) * np / (np + nc);
      CHECK(std::abs(pat - expect) <= 1.0);
    }
  }
}

TEST_CASE("split_manifest rejects oversubscription") {
  tu::TempDir dir("split");
  const CorpusManifest m = synthetic_manifest(3, 3, dir.path());
  CHECK_THROWS_WITH_AS(split_manifest(m, 5, 2, 2, 0), doctest::Contains("insufficient"),
                       std::invalid_argument);
}

TEST_CASE("profile round trip preserves every field") {
  tu::TempDir dir("profile");
  GenProfile p;
  p.duration_min = 4.5;
  p.patient.pause_mean = 0.37;
  p.control.energy_decay = 0.011;
  p.noise_snr_db = 17.0;
  p.swap_noise_channels = true;
  p.noise_bank_per_channel = 2;
  save_profile(p, dir.file("p.txt"));
  const GenProfile q = load_profile(dir.file("p.txt"));
  CHECK(q.duration_min == doctest::Approx(4.5));
  CHECK(q.patient.pause_mean == doctest::Approx(0.37));
  CHECK(q.control.energy_decay == doctest::Approx(0.011));
  CHECK(q.noise_snr_db == doctest::Approx(17.0));
  CHECK(q.swap_noise_channels);
  CHECK(q.noise_bank_per_channel == 2);
}

TEST_CASE("pause annotations round trip") {
  tu::TempDir dir("pauses");
  const std::vector<PauseSpan> spans = {{"p0", 0.5, 0.9}, {"p1", 1.25, 1.75}};
  save_pauses(spans, dir.file("pauses.csv"));
  const auto back = load_pauses(dir.file("pauses.csv"));
  REQUIRE(back.size() == 2);
  CHECK(back[1].id == "p1");
  CHECK(back[1].begin_s == doctest::Approx(1.25));
}

TEST_CASE("worker count does not change generated bytes") {
  tu::TempDir a("gen_w1");
  tu::TempDir b("gen_w3");
  generate_corpus(3, 3, 51, GenProfile{}, a.path(), /*workers=*/1);
  generate_corpus(3, 3, 51, GenProfile{}, b.path(), /*workers=*/3);
  for (const char* f : {"clips/p000.wav", "clips/p002.wav", "clips/c001.wav"}) {
    REQUIRE(tu::read_bytes(a.path() + "/" + f) == tu::read_bytes(b.path() + "/" + f));
  }
}
