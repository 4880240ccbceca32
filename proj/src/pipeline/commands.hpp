// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pipeline/dataset.hpp"
#include "pipeline/run_config.hpp"
#include "training/trainer.hpp"

namespace convasr::pipeline {

// ---- prepare ---------------------------------------------------------------

struct PrepareResult {
  std::size_t ok = 0;
  std::size_t failed = 0;
  double total_seconds = 0.0;  // over rows that passed
  std::string report;          // human-readable, one line per failed row plus totals
};

// Checks every row: audio decodes, transcript transliterates and encodes.
// Writes `manifest.validated.csv` (passing rows) and `stats.txt` to out_dir.
PrepareResult prepare(const fs::path& manifest, const fs::path& audio_root,
                      const fs::path& table_path, const fs::path& out_dir);

// H:MM:SS, rounded to the nearest second.
std::string format_duration(double seconds);

// ---- evaluation reports ------------------------------------------------------

// "LER 27.50% / Accuracy 72.50%" followed by a counts line.
std::string format_eval_report(const train::EvalReport& report);
// id,reference_length,distance,hypothesis
std::string format_eval_csv(const train::EvalReport& report, const translit::Alphabet& alphabet);
// key=value lines.
std::string format_eval_kv(const train::EvalReport& report);

// ---- training session ----------------------------------------------------------

// A run configuration bound to a trainer and its loaded data.
class TrainingSession {
 public:
  // With `resume`, the checkpoint must match the configured architecture and
  // features; otherwise ConfigError.
  static std::unique_ptr<TrainingSession> open(const RunConfig& config,
                                               const std::optional<fs::path>& resume);

  const RunConfig& config() const { return config_; }
  train::Trainer& trainer() { return *trainer_; }
  std::size_t train_size() const { return train_count_; }
  const std::vector<train::Utterance>& eval_set() const { return eval_; }

  train::StepResult step() { return trainer_->step(); }
  // Throws InvalidArgument when the held-out split is empty.
  train::EvalReport evaluate_held_out() const;
  void save(const fs::path& path) const;

 private:
  TrainingSession(RunConfig config, std::unique_ptr<train::Trainer> trainer)
      : config_(std::move(config)), trainer_(std::move(trainer)) {}
  RunConfig config_;
  std::unique_ptr<train::Trainer> trainer_;
  std::size_t train_count_ = 0;
  std::vector<train::Utterance> eval_;
};

// Throws ConfigError unless the checkpoint was trained with this config's
// architecture and feature front end.
void check_compatible(const RunConfig& config, const train::Checkpoint& checkpoint);

enum class SplitChoice { kTrain, kEval };

struct EvaluationOutput {
  train::EvalReport report;
  std::string text;
  std::string csv;
  std::string kv;
};

// Loads config and checkpoint, evaluates the chosen split in infer mode.
EvaluationOutput evaluate_checkpoint(const RunConfig& config, const fs::path& checkpoint,
                                     SplitChoice split);

// ---- inference -------------------------------------------------------------------

struct Transcript {
  std::string arabic;
  std::string roman;
};

class InferenceModel {
 public:
  explicit InferenceModel(train::Checkpoint checkpoint);
  static InferenceModel load(const fs::path& path);

  // read_wav -> resample -> log-mel -> infer -> greedy decode -> Arabic.
  Transcript transcribe_file(const fs::path& wav) const;
  Transcript transcribe(const dsp::AudioClip& clip) const;

 private:
  train::Checkpoint checkpoint_;
  translit::TranslitTable table_;
  translit::Alphabet alphabet_;
  mutable std::shared_ptr<dsp::LogMelExtractor> extractor_;
};

}  // namespace convasr::pipeline
