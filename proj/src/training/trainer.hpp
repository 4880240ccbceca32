// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctc/metrics.hpp"
#include "dsp/audio.hpp"
#include "dsp/log_mel.hpp"
#include "model/network.hpp"
#include "training/adam.hpp"
#include "training/checkpoint.hpp"
#include "translit/translit.hpp"

namespace convasr::train {

struct AugmentConfig {
  bool noise = false;
  bool stretch = false;
  std::array<double, 2> snr_db{5.0, 20.0};
  std::array<double, 2> stretch_range{0.9, 1.1};
};

struct TrainConfig {
  double learning_rate = 1e-3;
  long max_steps = 1000;
  std::size_t batch_size = 18;
  std::uint64_t seed = 0;
  long eval_every = 0;        // 0 disables periodic evaluation
  long checkpoint_every = 0;  // 0 writes only the final checkpoint
  AugmentConfig augment;

  void validate() const;
};

// An utterance ready for training: audio at the feature sample rate plus the
// encoded transcript.
struct Utterance {
  std::string id;
  dsp::AudioClip clip;
  std::vector<int> labels;
};

struct StepResult {
  double mean_nll = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;  // infeasible CTC length
};

struct UtteranceScore {
  std::string id;
  std::size_t reference_length = 0;
  std::size_t distance = 0;
  std::vector<int> hypothesis;
};

struct EvalReport {
  ctc::LerSummary summary;
  std::vector<UtteranceScore> utterances;
  std::size_t skipped = 0;  // too short to yield a single frame
};

// Gradients of the mean CTC loss over a batch. Utterances are processed one at
// a time (train-mode forward, loss, backward) and their gradients summed, then
// scaled by 1 / (number of feasible utterances).
struct BatchGradients {
  model::NetworkGrads grads;
  StepResult stats;
};

class Trainer {
 public:
  Trainer(const model::NetworkConfig& network, const dsp::FeatureConfig& features,
          const TrainConfig& config, const translit::TranslitTable& table);
  // Resumes from a checkpoint. The checkpoint's architecture, features and
  // seed take precedence; `config` supplies the schedule.
  Trainer(Checkpoint checkpoint, const TrainConfig& config);

  void set_training_data(std::vector<Utterance> utterances);
  void set_noise(std::vector<dsp::AudioClip> noise);

  // One optimizer step on an explicit batch. Throws InfeasibleLabel when no
  // utterance in the batch is feasible.
  StepResult train_step(std::span<const Utterance> batch);

  // One optimizer step on the next batch of a per-epoch seeded shuffle. The
  // batch sequence is a function of (seed, step).
  StepResult step();

  BatchGradients batch_gradients(std::span<const Utterance> batch);

  EvalReport evaluate(std::span<const Utterance> utterances) const;

  Checkpoint checkpoint() const;

  const model::NetworkParams& params() const { return params_; }
  model::NetworkParams& mutable_params() { return params_; }
  const AdamState& optimizer() const { return optimizer_; }
  const dsp::FeatureConfig& features() const { return features_; }
  const translit::Alphabet& alphabet() const { return alphabet_; }
  const TrainConfig& config() const { return config_; }
  long current_step() const { return step_; }
  std::size_t batches_per_epoch() const;

 private:
  dsp::AudioClip augment(const dsp::AudioClip& clip, Rng& rng) const;
  ad::Tensor2 features_for(const dsp::AudioClip& clip, dsp::LogMelExtractor& extractor) const;
  BatchGradients gradients_from_features(std::span<const ad::Tensor2* const> features,
                                         std::span<const std::vector<int>* const> labels);
  StepResult apply(BatchGradients batch);

  TrainConfig config_;
  dsp::FeatureConfig features_;
  std::vector<std::pair<char32_t, char>> translit_pairs_;
  translit::Alphabet alphabet_;
  model::NetworkParams params_;
  AdamState optimizer_;
  long step_ = 0;

  std::vector<Utterance> data_;
  std::vector<std::optional<ad::Tensor2>> feature_cache_;
  std::vector<dsp::AudioClip> noise_;
  mutable std::optional<dsp::LogMelExtractor> extractor_;
};

// Infer-mode transcription of a single clip (already at the feature rate).
std::vector<int> transcribe(const dsp::AudioClip& clip, const model::NetworkParams& params,
                            dsp::LogMelExtractor& extractor);

}  // namespace convasr::train
