// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include "pipeline/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "common/error.hpp"
#include "common/utf8.hpp"
#include "corpus/corpus.hpp"

namespace convasr::pipeline {

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

std::string format_duration(double seconds) {
  const long total = std::lround(seconds);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%ld:%02ld:%02ld", total / 3600, (total / 60) % 60, total % 60);
  return buf;
}

PrepareResult prepare(const fs::path& manifest, const fs::path& audio_root,
                      const fs::path& table_path, const fs::path& out_dir) {
  const auto table = translit::TranslitTable::load(table_path);
  const auto alphabet = translit::Alphabet::from_table(table);
  const auto entries = corpus::load_manifest(manifest);

  PrepareResult result;
  std::ostringstream report;
  std::vector<corpus::ManifestEntry> valid;
  std::map<char32_t, std::size_t> histogram;
  for (std::size_t row = 0; row < entries.size(); ++row) {
    const auto& e = entries[row];
    try {
      const dsp::AudioClip clip = dsp::read_wav(audio_root / e.audio_path);
      translit::encode_labels(table.to_roman(e.transcript), alphabet);
      result.total_seconds += clip.duration_seconds();
      for (char32_t cp : utf8::decode(e.transcript)) ++histogram[cp];
      valid.push_back(e);
      ++result.ok;
    } catch (const Error& err) {
      ++result.failed;
      report << "row " << row + 1 << " (" << e.audio_path << "): " << err.what() << '\n';
    }
  }

  std::ostringstream stats;
  stats << "files " << result.ok << '\n';
  stats << "failed " << result.failed << '\n';
  stats << "total_duration " << format_duration(result.total_seconds) << '\n';
  stats << "characters\n";
  for (const auto& [cp, count] : histogram) {
    std::string arabic;
    utf8::append(arabic, cp);
    const std::string roman = cp == U' ' ? "<space>" : table.to_roman(arabic);
    char code[16];
    std::snprintf(code, sizeof code, "U+%04X", static_cast<unsigned>(cp));
    stats << code << '\t' << (cp == U' ' ? "<space>" : arabic) << '\t' << roman << '\t' << count
          << '\n';
  }

  fs::create_directories(out_dir);
  write_file(out_dir / "manifest.validated.csv", corpus::format_manifest(valid));
  write_file(out_dir / "stats.txt", stats.str());

  report << result.ok << " ok, " << result.failed << " failed\n";
  report << "total duration " << format_duration(result.total_seconds) << '\n';
  result.report = report.str();
  return result;
}

std::string format_eval_report(const train::EvalReport& report) {
  const auto& s = report.summary;
  std::ostringstream out;
  out << "LER " << percent(s.ler_percent) << " / Accuracy " << percent(s.accuracy_percent) << '\n';
  out << "edits " << s.total_edits << " / reference symbols " << s.total_reference
      << " / utterances " << report.utterances.size() << " / too short " << report.skipped << '\n';
  return out.str();
}

std::string format_eval_csv(const train::EvalReport& report, const translit::Alphabet& alphabet) {
  std::ostringstream out;
  out << "id,reference_length,distance,hypothesis\n";
  for (const auto& u : report.utterances) {
    out << csv_field(u.id) << ',' << u.reference_length << ',' << u.distance << ','
        << csv_field(translit::decode_ids(u.hypothesis, alphabet)) << '\n';
  }
  return out.str();
}

std::string format_eval_kv(const train::EvalReport& report) {
  const auto& s = report.summary;
  char buf[64];
  std::ostringstream out;
  std::snprintf(buf, sizeof buf, "%.4f", s.ler_percent);
  out << "ler_percent=" << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.4f", s.accuracy_percent);
  out << "accuracy_percent=" << buf << '\n';
  out << "total_edits=" << s.total_edits << '\n';
  out << "total_reference=" << s.total_reference << '\n';
  out << "utterances=" << report.utterances.size() << '\n';
  out << "too_short=" << report.skipped << '\n';
  return out.str();
}

void check_compatible(const RunConfig& config, const train::Checkpoint& checkpoint) {
  model::NetworkConfig expected = config.network;
  expected.alphabet_size = checkpoint.params.config.alphabet_size;
  if (!(expected == checkpoint.params.config)) {
    throw ConfigError("checkpoint architecture does not match the configured network");
  }
  if (!(config.features == checkpoint.features)) {
    throw ConfigError("checkpoint feature settings do not match the configuration");
  }
  const auto table = translit::TranslitTable::load(config.translit_table);
  if (table.pairs() != checkpoint.translit_pairs) {
    throw ConfigError("checkpoint transliteration table differs from the configured one");
  }
}

std::unique_ptr<TrainingSession> TrainingSession::open(const RunConfig& config,
                                                       const std::optional<fs::path>& resume) {
  config.validate();
  const auto table = translit::TranslitTable::load(config.translit_table);
  const auto alphabet = translit::Alphabet::from_table(table);

  std::unique_ptr<train::Trainer> trainer;
  if (resume) {
    auto checkpoint = train::load_checkpoint(*resume);
    check_compatible(config, checkpoint);
    if (checkpoint.seed != config.training.seed) {
      throw ConfigError("checkpoint seed differs from the configured training seed");
    }
    trainer = std::make_unique<train::Trainer>(std::move(checkpoint), config.training);
  } else {
    model::NetworkConfig net = config.network;
    net.mel_bins = config.features.mel_bins;
    net.alphabet_size = alphabet.size();
    trainer = std::make_unique<train::Trainer>(net, config.features, config.training, table);
  }

  std::unique_ptr<TrainingSession> session(new TrainingSession(config, std::move(trainer)));
  const DataSplits splits = split_manifests(config);
  if (splits.train.empty()) throw ConfigError("training split is empty");
  const int rate = config.features.sample_rate_hz;
  auto train_set = load_utterances(splits.train, config.audio_root, table, alphabet, rate);
  session->train_count_ = train_set.size();
  session->trainer_->set_training_data(std::move(train_set));
  session->eval_ = load_utterances(splits.eval, config.audio_root, table, alphabet, rate);
  if (config.noise_dir) session->trainer_->set_noise(load_noise_dir(*config.noise_dir, rate));
  return session;
}

train::EvalReport TrainingSession::evaluate_held_out() const {
  if (eval_.empty()) throw InvalidArgument("held-out split is empty");
  return trainer_->evaluate(eval_);
}

void TrainingSession::save(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  train::save_checkpoint(path, trainer_->checkpoint());
}

EvaluationOutput evaluate_checkpoint(const RunConfig& config, const fs::path& checkpoint_path,
                                     SplitChoice split) {
  auto checkpoint = train::load_checkpoint(checkpoint_path);
  check_compatible(config, checkpoint);
  const auto table = translit::TranslitTable::load(config.translit_table);
  const auto alphabet = translit::Alphabet::from_table(table);
  const DataSplits splits = split_manifests(config);
  const auto& entries = split == SplitChoice::kTrain ? splits.train : splits.eval;
  if (entries.empty()) {
    throw InvalidArgument(split == SplitChoice::kTrain ? "training split is empty"
                                                       : "evaluation split is empty");
  }
  const auto utterances =
      load_utterances(entries, config.audio_root, table, alphabet, config.features.sample_rate_hz);
  const train::Trainer trainer(std::move(checkpoint), config.training);

  EvaluationOutput out;
  out.report = trainer.evaluate(utterances);
  out.text = format_eval_report(out.report);
  out.csv = format_eval_csv(out.report, alphabet);
  out.kv = format_eval_kv(out.report);
  return out;
}

InferenceModel::InferenceModel(train::Checkpoint checkpoint)
    : checkpoint_(std::move(checkpoint)),
      table_(checkpoint_.translit_pairs),
      alphabet_(checkpoint_.alphabet),
      extractor_(std::make_shared<dsp::LogMelExtractor>(checkpoint_.features)) {
  if (alphabet_.size() != checkpoint_.params.config.alphabet_size) {
    throw CorruptCheckpoint("checkpoint alphabet does not match its output layer");
  }
}

InferenceModel InferenceModel::load(const fs::path& path) {
  return InferenceModel(train::load_checkpoint(path));
}

Transcript InferenceModel::transcribe(const dsp::AudioClip& clip) const {
  const auto audio = dsp::resample(clip, checkpoint_.features.sample_rate_hz);
  const auto ids = train::transcribe(audio, checkpoint_.params, *extractor_);
  Transcript t;
  t.roman = translit::decode_ids(ids, alphabet_);
  t.arabic = table_.to_arabic(t.roman);
  return t;
}

Transcript InferenceModel::transcribe_file(const fs::path& wav) const {
  return transcribe(dsp::read_wav(wav));
}

}  // namespace convasr::pipeline
