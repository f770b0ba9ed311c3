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

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "test_util.hpp"

namespace fs = std::filesystem;
namespace tu = spira::testutil;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(SPIRA_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("missing required flags exit with the config error code") {
  CHECK(run("gen --patients 2 --controls 2") == 2);  // no --out
  CHECK(run("definitely-not-a-command") == 2);
  CHECK(run("train --exp 1") == 2);
}

TEST_CASE("help exits zero") {
  CHECK(run("--help") == 0);
  CHECK(run("gen --help") == 0);
}

TEST_CASE("unknown config keys exit 2; missing corpus exits 1") {
  tu::TempDir out("cli_cfg");
  CHECK(run("train --exp 1 --corpus /nonexistent --out " + out.path() +
            " --set bogus.key=1") == 2);
  CHECK(run("train --exp 1 --corpus /nonexistent/corpus --out " + out.path()) == 1);
  CHECK(run("eval --checkpoint /nonexistent.bin --corpus /nonexistent --out " +
            out.path()) == 1);
}

TEST_CASE("experiment 4 is reported as out of scope with a config error") {
  tu::TempDir out("cli_exp4");
  CHECK(run("train --exp 4 --corpus /nonexistent --out " + out.path()) == 2);
  CHECK(run("train --exp 6 --corpus /nonexistent --out " + out.path()) == 2);
}

TEST_CASE("gen is idempotent: same seed, same bytes") {
  tu::TempDir a("cli_gen_a");
  tu::TempDir b("cli_gen_b");
  const std::string common = "gen --patients 2 --controls 2 --seed 5 --train 2 --val 1 --test 1 --out ";
  REQUIRE(run(common + a.path()) == 0);
  REQUIRE(run(common + b.path()) == 0);
  CHECK(tu::read_bytes(a.file("manifest.csv")) == tu::read_bytes(b.file("manifest.csv")));
  CHECK(tu::read_bytes(a.file("clips/p000.wav")) == tu::read_bytes(b.file("clips/p000.wav")));
  CHECK(tu::read_bytes(a.file("pauses.csv")) == tu::read_bytes(b.file("pauses.csv")));
}

TEST_CASE("a failing command leaves no partial outputs behind") {
  tu::TempDir parent("cli_partial");
  const std::string out = parent.file("run");
  // Fails after creating the output dir (corpus missing).
  CHECK(run("train --exp 1 --corpus /nonexistent/corpus --out " + out) == 1);
  CHECK((!fs::exists(out) || fs::is_empty(out)));
}

TEST_CASE("train --init-from warm-starts from a compatible checkpoint") {
  tu::TempDir corpus("cli_init_corpus");
  tu::TempDir first("cli_init_a");
  tu::TempDir second("cli_init_b");
  REQUIRE(run("gen --patients 2 --controls 2 --seed 9 --duration-min 4.5 "
              "--duration-max 5.5 --train 2 --val 1 --test 1 --out " +
              corpus.path()) == 0);
  REQUIRE(run("train --exp 1 --corpus " + corpus.path() +
              " --seed 9 --epochs 1 --patience 1 --out " + first.path()) == 0);
  CHECK(run("train --exp 1 --corpus " + corpus.path() +
            " --seed 10 --epochs 1 --patience 1 --init-from " +
            first.file("checkpoint.bin") + " --out " + second.path()) == 0);
  CHECK(fs::exists(second.file("checkpoint.bin")));
  // A metadata-layout experiment has a different input shape: rejected.
  tu::TempDir third("cli_init_c");
  CHECK(run("train --exp 2 --corpus " + corpus.path() +
            " --seed 9 --epochs 1 --patience 1 --init-from " +
            first.file("checkpoint.bin") + " --out " + third.path()) == 2);
}
