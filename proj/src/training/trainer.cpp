// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include "training/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "corpus/corpus.hpp"
#include "ctc/ctc.hpp"

namespace convasr::train {

namespace {

// Stream identifiers for derive_seed.
constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kShuffleStream = 0x5348;
constexpr std::uint64_t kAugmentStream = 0x4147;

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (eval_every < 0 || checkpoint_every < 0) {
    throw ConfigError("eval_every and checkpoint_every must be >= 0");
  }
  if (static_cast<double>(seed) >= 9007199254740992.0) throw ConfigError("seed must be below 2^53");
  const auto& a = augment;
  if (!(a.stretch_range[0] > 0.0) || a.stretch_range[1] < a.stretch_range[0]) {
    throw ConfigError("stretch_range must satisfy 0 < lo <= hi");
  }
  if (a.snr_db[1] < a.snr_db[0]) throw ConfigError("snr_db range is empty");
}

Trainer::Trainer(const model::NetworkConfig& network, const dsp::FeatureConfig& features,
                 const TrainConfig& config, const translit::TranslitTable& table)
    : config_(config),
      features_(features),
      translit_pairs_(table.pairs()),
      alphabet_(translit::Alphabet::from_table(table)) {
  config_.validate();
  features_.validate();
  network.validate();
  if (network.mel_bins != features_.mel_bins) {
    throw ConfigError("network mel_bins (" + std::to_string(network.mel_bins) +
                      ") differs from feature mel_bins (" + std::to_string(features_.mel_bins) +
                      ")");
  }
  if (network.alphabet_size != alphabet_.size()) {
    throw ConfigError("network alphabet_size " + std::to_string(network.alphabet_size) +
                      " differs from the transliteration alphabet size " +
                      std::to_string(alphabet_.size()));
  }
  params_ = model::NetworkParams::create(network, derive_seed(config_.seed, kInitStream));
  optimizer_ = AdamState::for_params(params_);
}

Trainer::Trainer(Checkpoint checkpoint, const TrainConfig& config)
    : config_(config),
      features_(checkpoint.features),
      translit_pairs_(std::move(checkpoint.translit_pairs)),
      alphabet_(std::move(checkpoint.alphabet)),
      params_(std::move(checkpoint.params)),
      optimizer_(std::move(checkpoint.optimizer)),
      step_(checkpoint.step) {
  config_.seed = checkpoint.seed;
  config_.validate();
  features_.validate();
  if (params_.config.alphabet_size != alphabet_.size()) {
    throw CorruptCheckpoint("checkpoint alphabet does not match its output layer");
  }
}

void Trainer::set_training_data(std::vector<Utterance> utterances) {
  for (const auto& u : utterances) {
    if (u.clip.sample_rate_hz != features_.sample_rate_hz) {
      throw InvalidArgument("utterance '" + u.id + "' is not at the feature sample rate");
    }
  }
  data_ = std::move(utterances);
  feature_cache_.assign(data_.size(), std::nullopt);
}

void Trainer::set_noise(std::vector<dsp::AudioClip> noise) {
  for (const auto& n : noise) {
    if (n.sample_rate_hz != features_.sample_rate_hz) {
      throw InvalidArgument("noise clip is not at the feature sample rate");
    }
  }
  noise_ = std::move(noise);
}

std::size_t Trainer::batches_per_epoch() const {
  return (data_.size() + config_.batch_size - 1) / config_.batch_size;
}

dsp::AudioClip Trainer::augment(const dsp::AudioClip& clip, Rng& rng) const {
  dsp::AudioClip out = clip;
  if (config_.augment.stretch) out = dsp::random_stretch(out, config_.augment.stretch_range, rng);
  if (config_.augment.noise && !noise_.empty()) {
    const auto& noise = noise_[static_cast<std::size_t>(rng.uniform_index(noise_.size()))];
    const double snr = rng.uniform(config_.augment.snr_db[0], config_.augment.snr_db[1]);
    out = dsp::mix_noise(out, noise, snr, rng);
  }
  return out;
}

ad::Tensor2 Trainer::features_for(const dsp::AudioClip& clip,
                                  dsp::LogMelExtractor& extractor) const {
  return model::features_from_mel(extractor.compute(clip));
}

BatchGradients Trainer::gradients_from_features(std::span<const ad::Tensor2* const> features,
                                                std::span<const std::vector<int>* const> labels) {
  BatchGradients out{model::NetworkGrads::zeros(params_), {}};
  double nll_sum = 0.0;
  model::ForwardCache cache;
  for (std::size_t u = 0; u < features.size(); ++u) {
    const ad::Tensor2& x = *features[u];
    const auto& y = *labels[u];
    if (x.time < std::max<std::size_t>(2, ctc::min_frames(y))) {
      ++out.stats.skipped;
      continue;
    }
    const ad::Tensor2 logits = model::network_forward(x, params_, ad::Mode::kTrain, &cache);
    const ctc::CtcResult loss = ctc::ctc_loss(ctc::log_softmax(logits), y);
    model::network_backward(params_, cache, loss.grad_logits, out.grads);
    nll_sum += loss.nll;
    ++out.stats.used;
  }
  if (out.stats.used == 0) {
    throw InfeasibleLabel("every utterance in the batch is too short for its transcript");
  }
  out.grads.scale(1.0 / static_cast<double>(out.stats.used));
  out.stats.mean_nll = nll_sum / static_cast<double>(out.stats.used);
  return out;
}

BatchGradients Trainer::batch_gradients(std::span<const Utterance> batch) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  if (!extractor_) extractor_.emplace(features_);
  std::vector<ad::Tensor2> feats;
  feats.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Rng rng(derive_seed(config_.seed, static_cast<std::uint64_t>(step_), kAugmentStream + i));
    feats.push_back(features_for(augment(batch[i].clip, rng), *extractor_));
  }
  std::vector<const ad::Tensor2*> fp;
  std::vector<const std::vector<int>*> lp;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    fp.push_back(&feats[i]);
    lp.push_back(&batch[i].labels);
  }
  return gradients_from_features(fp, lp);
}

StepResult Trainer::apply(BatchGradients batch) {
  adam_step(params_, batch.grads, optimizer_, config_.learning_rate);
  ++step_;
  return batch.stats;
}

StepResult Trainer::train_step(std::span<const Utterance> batch) {
  return apply(batch_gradients(batch));
}

StepResult Trainer::step() {
  if (data_.empty()) throw InvalidArgument("no training data");
  if (!extractor_) extractor_.emplace(features_);
  const auto bpe = static_cast<long>(batches_per_epoch());
  const auto epoch = static_cast<std::uint64_t>(step_ / bpe);
  const auto index = static_cast<std::size_t>(step_ % bpe);
  const auto batches =
      corpus::batch_indices(data_.size(), config_.batch_size,
                            derive_seed(config_.seed, kShuffleStream, epoch));
  const auto& batch = batches[index];

  const bool augmenting = config_.augment.stretch || (config_.augment.noise && !noise_.empty());
  std::vector<ad::Tensor2> fresh;
  fresh.reserve(batch.size());
  std::vector<const ad::Tensor2*> fp;
  std::vector<const std::vector<int>*> lp;
  for (std::size_t i : batch) {
    const Utterance& u = data_[i];
    if (augmenting) {
      Rng rng(derive_seed(config_.seed, static_cast<std::uint64_t>(step_), kAugmentStream + i));
      fresh.push_back(features_for(augment(u.clip, rng), *extractor_));
      fp.push_back(&fresh.back());
    } else {
      if (!feature_cache_[i]) feature_cache_[i] = features_for(u.clip, *extractor_);
      fp.push_back(&*feature_cache_[i]);
    }
    lp.push_back(&u.labels);
  }
  return apply(gradients_from_features(fp, lp));
}

std::vector<int> transcribe(const dsp::AudioClip& clip, const model::NetworkParams& params,
                            dsp::LogMelExtractor& extractor) {
  const dsp::MelSpectrogram mel = extractor.compute(clip);
  if (mel.num_frames == 0) return {};
  return ctc::greedy_decode(ctc::log_softmax(model::network_infer(mel, params)));
}

EvalReport Trainer::evaluate(std::span<const Utterance> utterances) const {
  if (utterances.empty()) throw InvalidArgument("evaluation set is empty");
  if (!extractor_) extractor_.emplace(features_);
  EvalReport report;
  std::vector<std::pair<std::size_t, std::size_t>> counts;
  for (const auto& u : utterances) {
    if (u.labels.empty()) throw InvalidArgument("utterance '" + u.id + "' has an empty reference");
    UtteranceScore score;
    score.id = u.id;
    score.reference_length = u.labels.size();
    const auto frames = dsp::frame_count(u.clip.samples.size(), features_.window_samples(),
                                         features_.hop_samples());
    if (frames == 0) {
      ++report.skipped;
    } else {
      score.hypothesis = transcribe(u.clip, params_, *extractor_);
    }
    score.distance = ctc::edit_distance(u.labels, score.hypothesis);
    counts.emplace_back(score.distance, score.reference_length);
    report.utterances.push_back(std::move(score));
  }
  report.summary = ctc::label_error_rate_from_counts(counts);
  return report;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint c;
  c.params = params_;
  c.optimizer = optimizer_;
  c.step = step_;
  c.seed = config_.seed;
  c.features = features_;
  c.alphabet = alphabet_.symbols();
  c.translit_pairs = translit_pairs_;
  return c;
}

}  // namespace convasr::train
