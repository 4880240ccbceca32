// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>

#include "common/error.hpp"
#include "doctest.h"
#include "model/network.hpp"
#include "pipeline/commands.hpp"
#include "pipeline/run_config.hpp"
#include "support.hpp"

using namespace convasr;
using pipeline::RunConfig;
using testing::TempDir;
namespace fs = std::filesystem;

namespace {

const char* kTinyTraining = R"({"batch_size": 5, "max_steps": 3, "seed": 2})";

train::EvalReport report_from(const std::vector<std::pair<std::size_t, std::size_t>>& counts) {
  train::EvalReport r;
  int i = 0;
  for (const auto& [d, n] : counts) {
    r.utterances.push_back({"u" + std::to_string(i++), n, d, {1, 2}});
  }
  r.summary = ctc::label_error_rate_from_counts(counts);
  return r;
}

}  // namespace

TEST_CASE("run config parsing") {
  TempDir dir("config");
  testing::write_text(dir / "m.csv", "a.wav,ب\n");

  SUBCASE("defaults and path resolution") {
    const auto c = RunConfig::parse(R"({"data": {"manifests": ["m.csv"]}})", dir.path());
    CHECK(c.features == dsp::FeatureConfig{});
    CHECK(c.network.num_stacks == 7);
    CHECK(c.network.dilations == std::vector<int>{1, 3, 9, 27});
    CHECK(c.training.batch_size == 18);
    REQUIRE(c.manifests.size() == 1);
    CHECK(c.manifests[0].path == dir.path() / "m.csv");
    CHECK(c.manifests[0].train_fraction == 0.9);
    CHECK(c.audio_root == dir.path() / ".");
    CHECK(c.output_dir == dir.path() / "output");
    CHECK(c.translit_table == testing::bundled_table());
    CHECK_FALSE(c.noise_dir.has_value());
    CHECK_NOTHROW(c.validate());
  }
  SUBCASE("explicit values") {
    const auto c = RunConfig::parse(R"({
      "features": {"mel_bins": 20, "fmax_hz": 6000},
      "network": {"num_stacks": 6, "residual_channels": 8},
      "training": {"learning_rate": 0.01, "augment": {"stretch": true, "stretch_range": [0.8, 1.2]}},
      "data": {"manifests": [{"path": "/abs/m.csv", "train_fraction": 0.5}], "split_seed": 9},
      "output_dir": "/tmp/x"
    })", dir.path());
    CHECK(c.features.mel_bins == 20);
    CHECK(c.features.fmax_hz == 6000);
    CHECK(c.network.num_stacks == 6);
    CHECK(c.network.residual_channels == 8);
    CHECK(c.training.learning_rate == 0.01);
    CHECK(c.training.augment.stretch);
    CHECK(c.training.augment.stretch_range == std::array<double, 2>{0.8, 1.2});
    CHECK(c.manifests[0].path == "/abs/m.csv");
    CHECK(c.manifests[0].train_fraction == 0.5);
    CHECK(c.split_seed == 9);
    CHECK(c.output_dir == "/tmp/x");
  }
  SUBCASE("to_json round trip") {
    const auto c = RunConfig::parse(R"({"network": {"num_stacks": 8}, "data": {"manifests": ["m.csv"]}})",
                                    dir.path());
    const auto again = RunConfig::parse(c.to_json(), "/elsewhere");
    CHECK(again.network == c.network);
    CHECK(again.features == c.features);
    CHECK(again.manifests[0].path == c.manifests[0].path);
    CHECK(again.output_dir == c.output_dir);
  }
  SUBCASE("errors") {
    auto fails = [&](const std::string& text) {
      CAPTURE(text);
      CHECK_THROWS_AS(RunConfig::parse(text, dir.path()), ConfigError);
    };
    fails("{");
    fails("[]");
    fails(R"({"data": {}})");
    fails(R"({"data": {"manifests": []}})");
    fails(R"({"data": {"manifests": [3]}})");
    fails(R"({"data": {"manifests": ["m.csv"]}, "training": {"max_step": 3}})");
    fails(R"({"data": {"manifests": ["m.csv"]}, "bogus": 1})");
    fails(R"({"data": {"manifests": ["m.csv"]}, "features": {"mel_bins": "forty"}})");
    fails(R"({"data": {"manifests": ["m.csv"]}, "network": "big"})");
    fails(R"({"data": {"manifests": ["m.csv"]}, "training": {"augment": {"snr_db": [1]}}})");
    fails(R"({"data": {"manifests": ["m.csv"]}, "network": {"mel_bins": 20}})");
  }
  SUBCASE("validation checks referenced paths") {
    testing::write_text(dir / "c.json", R"({"data": {"manifests": ["missing.csv"]}})");
    CHECK_THROWS_AS(RunConfig::load(dir / "c.json"), ConfigError);
    testing::write_text(dir / "c.json",
                        R"({"data": {"manifests": ["m.csv"], "audio_root": "nowhere"}})");
    CHECK_THROWS_AS(RunConfig::load(dir / "c.json"), ConfigError);
    testing::write_text(dir / "c.json", R"({"data": {"manifests": ["m.csv"]}, "network": {"num_stacks": 0}})");
    CHECK_THROWS_AS(RunConfig::load(dir / "c.json"), ConfigError);
    CHECK_THROWS_AS(RunConfig::load(dir / "absent.json"), ConfigError);
  }
  SUBCASE("output directory environment override") {
    testing::write_text(dir / "c.json", R"({"data": {"manifests": ["m.csv"]}})");
    ::setenv(pipeline::kOutputDirEnv, "/tmp/override-dir", 1);
    const auto c = RunConfig::load(dir / "c.json");
    ::unsetenv(pipeline::kOutputDirEnv);
    CHECK(c.output_dir == "/tmp/override-dir");
    CHECK(RunConfig::load(dir / "c.json").output_dir == dir.path() / "output");
  }
}

TEST_CASE("format_duration") {
  CHECK(pipeline::format_duration(0) == "0:00:00");
  CHECK(pipeline::format_duration(3.0) == "0:00:03");
  CHECK(pipeline::format_duration(59.6) == "0:01:00");
  CHECK(pipeline::format_duration(7 * 3600 + 50 * 60 + 5) == "7:50:05");
}

TEST_CASE("prepare") {
  TempDir dir("prepare");
  fs::create_directories(dir / "audio");
  dsp::write_wav(dir / "audio/one.wav", testing::silence(1.0));
  dsp::write_wav(dir / "audio/two.wav", testing::sine(300, 2.0, 0.3));

  SUBCASE("valid rows") {
    testing::write_text(dir / "m.csv", "one.wav,كتب\ntwo.wav,\"عربي كتب\"\n");
    const auto r = pipeline::prepare(dir / "m.csv", dir / "audio", testing::bundled_table(), dir / "out");
    CHECK(r.ok == 2);
    CHECK(r.failed == 0);
    CHECK(r.report.find("2 ok, 0 failed") != std::string::npos);
    CHECK(r.report.find("0:00:03") != std::string::npos);
    const auto stats = testing::read_text(dir / "out/stats.txt");
    CHECK(stats.find("total_duration 0:00:03") != std::string::npos);
    CHECK(stats.find("files 2") != std::string::npos);
    CHECK(stats.find("U+0643\tك\tk\t2") != std::string::npos);
    CHECK(stats.find("U+0020") != std::string::npos);
  }
  SUBCASE("bad rows are flagged and excluded") {
    testing::write_text(dir / "m.csv", "one.wav,كتب\nmissing.wav,كتب\ntwo.wav,كَتب\n");
    const auto r = pipeline::prepare(dir / "m.csv", dir / "audio", testing::bundled_table(), dir / "out");
    CHECK(r.ok == 1);
    CHECK(r.failed == 2);
    CHECK(r.report.find("row 2 (missing.wav)") != std::string::npos);
    CHECK(r.report.find("row 3 (two.wav)") != std::string::npos);
    CHECK(r.report.find("1 ok, 2 failed") != std::string::npos);
    CHECK(testing::read_text(dir / "out/manifest.validated.csv") == "one.wav,كتب\n");
  }
}

TEST_CASE("evaluation report formatting") {
  const auto perfect = report_from({{0, 10}, {0, 3}});
  CHECK(pipeline::format_eval_report(perfect).starts_with("LER 0.00% / Accuracy 100.00%\n"));
  const auto mixed = report_from({{2, 10}, {9, 30}});
  const auto text = pipeline::format_eval_report(mixed);
  CHECK(text.starts_with("LER 27.50% / Accuracy 72.50%\n"));
  CHECK(text == pipeline::format_eval_report(mixed));
  const translit::Alphabet ab({'a', 'b'});
  CHECK(pipeline::format_eval_csv(mixed, ab) ==
        "id,reference_length,distance,hypothesis\nu0,10,2,ab\nu1,30,9,ab\n");
  const auto kv = pipeline::format_eval_kv(mixed);
  CHECK(kv.find("ler_percent=27.5000\n") != std::string::npos);
  CHECK(kv.find("total_edits=11\n") != std::string::npos);
  CHECK(kv.find("total_reference=40\n") != std::string::npos);
}

TEST_CASE("training session, checkpoint evaluation and inference") {
  TempDir dir("session");
  const auto files = testing::write_tone_corpus(dir.path(), kTinyTraining, 0.6);
  const auto config = RunConfig::load(files.config);

  auto session = pipeline::TrainingSession::open(config, std::nullopt);
  CHECK(session->train_size() == 3);
  CHECK(session->eval_set().size() == 2);
  CHECK(session->trainer().params().config.num_stacks == 2);
  CHECK(session->trainer().params().config.alphabet_size == 40);
  for (int i = 0; i < 3; ++i) session->step();
  const auto held_out = session->evaluate_held_out();
  CHECK(held_out.utterances.size() == 2);
  session->save(dir / "out/s3.ckpt");

  SUBCASE("checkpoint evaluation matches the session") {
    const auto out = pipeline::evaluate_checkpoint(config, dir / "out/s3.ckpt", pipeline::SplitChoice::kEval);
    CHECK(out.report.summary.total_edits == held_out.summary.total_edits);
    CHECK(out.text == pipeline::format_eval_report(held_out));
    const auto train_out = pipeline::evaluate_checkpoint(config, dir / "out/s3.ckpt", pipeline::SplitChoice::kTrain);
    CHECK(train_out.report.utterances.size() == 3);
  }
  SUBCASE("resume continues the step count") {
    auto resumed = pipeline::TrainingSession::open(config, dir / "out/s3.ckpt");
    CHECK(resumed->trainer().current_step() == 3);
  }
  SUBCASE("architecture mismatch is refused") {
    auto other = config;
    other.network.num_stacks = 3;
    CHECK_THROWS_AS(pipeline::TrainingSession::open(other, dir / "out/s3.ckpt"), ConfigError);
    CHECK_THROWS_AS(pipeline::evaluate_checkpoint(other, dir / "out/s3.ckpt", pipeline::SplitChoice::kEval),
                    ConfigError);
  }
  SUBCASE("inference model") {
    const auto model = pipeline::InferenceModel::load(dir / "out/s3.ckpt");
    const auto t = model.transcribe_file(files.wavs[0]);
    const auto table = translit::TranslitTable::load(testing::bundled_table());
    CHECK(table.to_roman(t.arabic) == t.roman);
    // Resampled input goes through the same path.
    const auto silent = model.transcribe(testing::silence(0.5, 8000));
    CHECK(table.to_roman(silent.arabic) == silent.roman);
    CHECK(model.transcribe(testing::silence(0.01)).roman.empty());
  }
}

TEST_CASE("empty held-out split") {
  TempDir dir("session");
  const auto files = testing::write_tone_corpus(dir.path(), kTinyTraining, 1.0);
  const auto config = RunConfig::load(files.config);
  auto session = pipeline::TrainingSession::open(config, std::nullopt);
  CHECK(session->eval_set().empty());
  CHECK_THROWS_AS(session->evaluate_held_out(), InvalidArgument);
  session->save(dir / "out/x.ckpt");
  CHECK_THROWS_AS(pipeline::evaluate_checkpoint(config, dir / "out/x.ckpt", pipeline::SplitChoice::kEval),
                  InvalidArgument);
}
