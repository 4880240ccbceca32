// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the engine only through the C API.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "convasr/convasr.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Owns a string returned by the C API.
struct CString {
  char* p = nullptr;
  ~CString() { cvasr_free_string(p); }
  std::string str() const { return p ? p : ""; }
};

int report(cvasr_status status, const std::string& context = {}) {
  std::cerr << "error: ";
  if (!context.empty()) std::cerr << context << ": ";
  std::cerr << cvasr_last_error() << " [" << cvasr_status_name(status) << "]\n";
  return kExitFailure;
}

bool write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write " << path << '\n';
    return false;
  }
  return true;
}

// ---- prepare ----

struct PrepareArgs {
  std::string manifest, audio_root, out, table;
};

int run_prepare(const PrepareArgs& a) {
  cvasr_prepare_summary summary{};
  CString text;
  const cvasr_status s =
      cvasr_prepare(a.manifest.c_str(), a.audio_root.c_str(),
                    a.table.empty() ? nullptr : a.table.c_str(), a.out.c_str(), &summary, &text.p);
  if (s != CVASR_OK) return report(s, "prepare");
  std::cout << text.str();
  return summary.failed == 0 ? kExitOk : kExitFailure;
}

// ---- train ----

struct TrainArgs {
  std::string config, resume;
};

struct SessionCloser {
  void operator()(cvasr_session* s) const { cvasr_session_close(s); }
};

int run_train(const TrainArgs& a) {
  cvasr_session* raw = nullptr;
  cvasr_status s =
      cvasr_session_open(a.config.c_str(), a.resume.empty() ? nullptr : a.resume.c_str(), &raw);
  if (s != CVASR_OK) return report(s, "train");
  std::unique_ptr<cvasr_session, SessionCloser> session(raw);

  cvasr_session_info info{};
  if ((s = cvasr_session_info_get(session.get(), &info)) != CVASR_OK) return report(s);
  CString out_dir_c;
  if ((s = cvasr_session_output_dir(session.get(), &out_dir_c.p)) != CVASR_OK) return report(s);
  const fs::path out_dir = out_dir_c.str();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create " << out_dir << ": " << ec.message() << '\n';
    return kExitFailure;
  }

  std::cout << "param_count " << info.param_count << '\n'
            << "receptive_field " << info.receptive_field << '\n'
            << "train_utterances " << info.train_utterances << '\n'
            << "eval_utterances " << info.eval_utterances << '\n'
            << "batch_size " << info.batch_size << '\n'
            << "batches_per_epoch " << info.batches_per_epoch << '\n'
            << "start_step " << info.step << '\n'
            << "max_steps " << info.max_steps << '\n'
            << std::flush;

  const fs::path log_path = out_dir / "loss_log.csv";
  const bool append = !a.resume.empty() && fs::exists(log_path);
  std::ofstream log(log_path, append ? std::ios::app : std::ios::trunc);
  if (!log) {
    std::cerr << "error: cannot write " << log_path << '\n';
    return kExitFailure;
  }
  if (!append) log << "step,mean_nll,wall_seconds\n";

  const auto start = std::chrono::steady_clock::now();
  for (long step = info.step; step < info.max_steps;) {
    cvasr_step_result r{};
    if ((s = cvasr_session_step(session.get(), &r)) != CVASR_OK) {
      return report(s, "step " + std::to_string(step + 1));
    }
    step = r.step;
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char line[128];
    std::snprintf(line, sizeof line, "%ld,%.17g,%.3f\n", r.step, r.mean_nll, wall);
    log << line << std::flush;
    if (r.skipped > 0) {
      std::cerr << "warning: step " << r.step << " skipped " << r.skipped
                << " utterance(s) too short for their transcript\n";
    }

    if (info.checkpoint_every > 0 && step % info.checkpoint_every == 0 && step < info.max_steps) {
      const fs::path ckpt = out_dir / ("step_" + std::to_string(step) + ".ckpt");
      if ((s = cvasr_session_save(session.get(), ckpt.c_str())) != CVASR_OK) return report(s);
    }
    if (info.eval_every > 0 && step % info.eval_every == 0 && info.eval_utterances > 0) {
      CString text;
      cvasr_eval_summary e{};
      if ((s = cvasr_session_evaluate(session.get(), &e, &text.p)) != CVASR_OK) return report(s);
      std::cout << "step " << step << ": " << text.str() << std::flush;
    }
  }

  const fs::path final_path = out_dir / "final.ckpt";
  if ((s = cvasr_session_save(session.get(), final_path.c_str())) != CVASR_OK) return report(s);
  std::cout << "wrote " << final_path.string() << '\n';
  return kExitOk;
}

// ---- eval ----

struct EvalArgs {
  std::string config, checkpoint, split = "eval";
};

int run_eval(const EvalArgs& a) {
  const cvasr_split split = a.split == "train" ? CVASR_SPLIT_TRAIN : CVASR_SPLIT_EVAL;
  cvasr_eval_summary summary{};
  CString text, csv, kv;
  cvasr_status s = cvasr_evaluate(a.config.c_str(), a.checkpoint.c_str(), split, &summary,
                                  &text.p, &csv.p, &kv.p);
  if (s != CVASR_OK) return report(s, "eval");
  std::cout << text.str();

  CString out_dir_c;
  if ((s = cvasr_config_output_dir(a.config.c_str(), &out_dir_c.p)) != CVASR_OK) return report(s);
  const fs::path out_dir = out_dir_c.str();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create " << out_dir << ": " << ec.message() << '\n';
    return kExitFailure;
  }
  const std::string stem = "eval_" + a.split;
  if (!write_text(out_dir / (stem + ".csv"), csv.str())) return kExitFailure;
  if (!write_text(out_dir / (stem + ".txt"), kv.str())) return kExitFailure;
  return kExitOk;
}

// ---- transcribe ----

struct TranscribeArgs {
  std::string checkpoint;
  std::vector<std::string> wavs;
};

int run_transcribe(const TranscribeArgs& a) {
  cvasr_model* model = nullptr;
  cvasr_status s = cvasr_model_open(a.checkpoint.c_str(), &model);
  if (s != CVASR_OK) return report(s, a.checkpoint);
  int code = kExitOk;
  for (const auto& wav : a.wavs) {
    CString arabic, roman;
    s = cvasr_model_transcribe_file(model, wav.c_str(), &arabic.p, &roman.p);
    if (s != CVASR_OK) {
      report(s, wav);
      code = kExitFailure;
      continue;
    }
    std::cout << wav << '\t' << arabic.str() << '\t' << roman.str() << '\n';
  }
  cvasr_model_close(model);
  return code;
}

// ---- translit ----

struct TranslitArgs {
  std::string to, table;
};

int run_translit(const TranslitArgs& a) {
  cvasr_translit* table = nullptr;
  cvasr_status s = cvasr_translit_open(a.table.empty() ? nullptr : a.table.c_str(), &table);
  if (s != CVASR_OK) return report(s, "translit");
  const bool to_roman = a.to == "roman";
  std::string line;
  std::size_t line_no = 0;
  int code = kExitOk;
  while (std::getline(std::cin, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    CString out;
    s = to_roman ? cvasr_translit_to_roman(table, line.c_str(), &out.p)
                 : cvasr_translit_to_arabic(table, line.c_str(), &out.p);
    if (s != CVASR_OK) {
      std::size_t position = 0;
      std::uint32_t codepoint = 0;
      std::cerr << "error: line " << line_no;
      if (cvasr_last_error_location(&position, &codepoint) && s != CVASR_ERR_PARSE) {
        char cp[16];
        std::snprintf(cp, sizeof cp, "U+%04X", static_cast<unsigned>(codepoint));
        std::cerr << ", column " << position + 1 << " (" << cp << ")";
      }
      std::cerr << ": " << cvasr_last_error() << '\n';
      code = kExitFailure;
      break;
    }
    std::cout << out.str() << '\n';
  }
  cvasr_translit_close(table);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convasr: convolutional CTC speech recognition"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cvasr_version());

  PrepareArgs prepare;
  auto* p = app.add_subcommand("prepare", "validate a manifest and summarize the corpus");
  p->add_option("--manifest", prepare.manifest, "CSV manifest (audio path, transcript)")
      ->required();
  p->add_option("--audio-root", prepare.audio_root, "directory audio paths are relative to")
      ->required();
  p->add_option("--out", prepare.out, "output directory")->required();
  p->add_option("--table", prepare.table, "transliteration table (default: bundled)");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train a model");
  t->add_option("--config", train.config, "JSON run configuration")->required();
  t->add_option("--resume", train.resume, "checkpoint to continue from");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "report label error rate of a checkpoint");
  e->add_option("--config", eval.config, "JSON run configuration")->required();
  e->add_option("--checkpoint", eval.checkpoint, "checkpoint file")->required();
  e->add_option("--split", eval.split, "split to score")
      ->check(CLI::IsMember({"train", "eval"}))
      ->capture_default_str();

  TranscribeArgs transcribe;
  auto* r = app.add_subcommand("transcribe", "transcribe WAV files");
  r->add_option("--checkpoint", transcribe.checkpoint, "checkpoint file")->required();
  r->add_option("wavs", transcribe.wavs, "WAV files")->required();

  TranslitArgs translit;
  auto* x = app.add_subcommand("translit", "convert standard input between scripts");
  x->add_option("--to", translit.to, "target script")
      ->required()
      ->check(CLI::IsMember({"roman", "arabic"}));
  x->add_option("--table", translit.table, "transliteration table (default: bundled)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ok) {
    return app.exit(ok);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitUsage;
  }

  if (*p) return run_prepare(prepare);
  if (*t) return run_train(train);
  if (*e) return run_eval(eval);
  if (*r) return run_transcribe(transcribe);
  return run_translit(translit);
}
