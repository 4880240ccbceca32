// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include "convasr/convasr.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "common/error.hpp"
#include "model/network.hpp"
#include "pipeline/commands.hpp"
#include "translit/translit.hpp"

namespace cv = convasr;
namespace pl = convasr::pipeline;

struct cvasr_translit {
  cv::translit::TranslitTable table;
};

struct cvasr_session {
  std::unique_ptr<pl::TrainingSession> session;
};

struct cvasr_model {
  pl::InferenceModel model;
};

namespace {

struct LastError {
  std::string message;
  bool has_location = false;
  std::size_t position = 0;
  std::uint32_t codepoint = 0;
};

thread_local LastError g_last;

cvasr_status fail(cvasr_status status, const char* message) {
  g_last = LastError{};
  g_last.message = message;
  return status;
}

// Translates the in-flight exception into a status code.
cvasr_status translate_exception() {
  try {
    throw;
  } catch (const cv::DiacriticFound& e) {
    cvasr_status s = fail(CVASR_ERR_DIACRITIC, e.what());
    g_last.has_location = true;
    g_last.position = e.position();
    g_last.codepoint = static_cast<std::uint32_t>(e.codepoint());
    return s;
  } catch (const cv::UnmappedSymbol& e) {
    cvasr_status s = fail(CVASR_ERR_UNMAPPED_SYMBOL, e.what());
    g_last.has_location = true;
    g_last.position = e.position();
    g_last.codepoint = static_cast<std::uint32_t>(e.codepoint());
    return s;
  } catch (const cv::ParseError& e) {
    cvasr_status s = fail(CVASR_ERR_PARSE, e.what());
    g_last.has_location = e.line() != 0;
    g_last.position = e.line();
    return s;
  } catch (const cv::InvalidArgument& e) {
    return fail(CVASR_ERR_INVALID_ARGUMENT, e.what());
  } catch (const cv::ShapeError& e) {
    return fail(CVASR_ERR_SHAPE, e.what());
  } catch (const cv::IoError& e) {
    return fail(CVASR_ERR_IO, e.what());
  } catch (const cv::WavFormatError& e) {
    return fail(CVASR_ERR_WAV_FORMAT, e.what());
  } catch (const cv::UnsupportedAudio& e) {
    return fail(CVASR_ERR_UNSUPPORTED_AUDIO, e.what());
  } catch (const cv::InfeasibleLabel& e) {
    return fail(CVASR_ERR_INFEASIBLE_LABEL, e.what());
  } catch (const cv::CorruptCheckpoint& e) {
    return fail(CVASR_ERR_CORRUPT_CHECKPOINT, e.what());
  } catch (const cv::VersionMismatch& e) {
    return fail(CVASR_ERR_VERSION_MISMATCH, e.what());
  } catch (const cv::ConfigError& e) {
    return fail(CVASR_ERR_CONFIG, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(CVASR_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CVASR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CVASR_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CVASR_ERR_INTERNAL, "unknown error");
  }
}

template <typename Fn>
cvasr_status guarded(Fn&& fn) {
  g_last = LastError{};
  try {
    fn();
    return CVASR_OK;
  } catch (...) {
    return translate_exception();
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void put(char** out, const std::string& s) {
  if (out) *out = dup_string(s);
}

void require(const void* p, const char* name) {
  if (!p) throw cv::InvalidArgument(std::string(name) + " must not be null");
}

void fill(cvasr_eval_summary* out, const cv::train::EvalReport& r) {
  if (!out) return;
  out->ler_percent = r.summary.ler_percent;
  out->accuracy_percent = r.summary.accuracy_percent;
  out->total_edits = r.summary.total_edits;
  out->total_reference = r.summary.total_reference;
  out->utterances = r.utterances.size();
  out->too_short = r.skipped;
}

}  // namespace

extern "C" {

const char* cvasr_version(void) { return "0.1.0"; }

const char* cvasr_status_name(cvasr_status status) {
  switch (status) {
    case CVASR_OK: return "ok";
    case CVASR_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CVASR_ERR_SHAPE: return "shape mismatch";
    case CVASR_ERR_IO: return "i/o error";
    case CVASR_ERR_WAV_FORMAT: return "malformed wav";
    case CVASR_ERR_UNSUPPORTED_AUDIO: return "unsupported audio";
    case CVASR_ERR_PARSE: return "parse error";
    case CVASR_ERR_UNMAPPED_SYMBOL: return "unmapped symbol";
    case CVASR_ERR_DIACRITIC: return "diacritic";
    case CVASR_ERR_INFEASIBLE_LABEL: return "infeasible label";
    case CVASR_ERR_CORRUPT_CHECKPOINT: return "corrupt checkpoint";
    case CVASR_ERR_VERSION_MISMATCH: return "version mismatch";
    case CVASR_ERR_CONFIG: return "configuration error";
    case CVASR_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* cvasr_last_error(void) { return g_last.message.c_str(); }

int cvasr_last_error_location(size_t* position, uint32_t* codepoint) {
  if (!g_last.has_location) return 0;
  if (position) *position = g_last.position;
  if (codepoint) *codepoint = g_last.codepoint;
  return 1;
}

void cvasr_free_string(char* s) { std::free(s); }

const char* cvasr_default_translit_table(void) { return CONVASR_DATA_DIR "/buckwalter.tsv"; }

cvasr_status cvasr_translit_open(const char* path, cvasr_translit** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    const char* p = path ? path : cvasr_default_translit_table();
    *out = new cvasr_translit{cv::translit::TranslitTable::load(p)};
  });
}

void cvasr_translit_close(cvasr_translit* t) { delete t; }

cvasr_status cvasr_translit_to_roman(const cvasr_translit* t, const char* arabic_utf8,
                                     char** out) {
  return guarded([&] {
    require(t, "table");
    require(arabic_utf8, "text");
    require(out, "out");
    *out = dup_string(t->table.to_roman(arabic_utf8));
  });
}

cvasr_status cvasr_translit_to_arabic(const cvasr_translit* t, const char* roman, char** out) {
  return guarded([&] {
    require(t, "table");
    require(roman, "text");
    require(out, "out");
    *out = dup_string(t->table.to_arabic(roman));
  });
}

cvasr_status cvasr_prepare(const char* manifest, const char* audio_root, const char* table,
                           const char* out_dir, cvasr_prepare_summary* summary, char** report) {
  return guarded([&] {
    require(manifest, "manifest");
    require(audio_root, "audio_root");
    require(out_dir, "out_dir");
    const auto r = pl::prepare(manifest, audio_root,
                               table ? table : cvasr_default_translit_table(), out_dir);
    if (summary) *summary = cvasr_prepare_summary{r.ok, r.failed, r.total_seconds};
    put(report, r.report);
  });
}

cvasr_status cvasr_session_open(const char* config_path, const char* resume,
                                cvasr_session** out) {
  return guarded([&] {
    require(config_path, "config_path");
    require(out, "out");
    *out = nullptr;
    const auto config = pl::RunConfig::load(config_path);
    std::optional<std::filesystem::path> resume_path;
    if (resume) resume_path = resume;
    *out = new cvasr_session{pl::TrainingSession::open(config, resume_path)};
  });
}

void cvasr_session_close(cvasr_session* s) { delete s; }

cvasr_status cvasr_session_info_get(const cvasr_session* s, cvasr_session_info* info) {
  return guarded([&] {
    require(s, "session");
    require(info, "info");
    auto& trainer = s->session->trainer();
    const auto& net = trainer.params().config;
    const auto& tc = trainer.config();
    info->step = trainer.current_step();
    info->max_steps = tc.max_steps;
    info->eval_every = tc.eval_every;
    info->checkpoint_every = tc.checkpoint_every;
    info->param_count = cv::model::param_count(net);
    info->receptive_field = cv::model::receptive_field(net);
    info->train_utterances = s->session->train_size();
    info->eval_utterances = s->session->eval_set().size();
    info->batch_size = tc.batch_size;
    info->batches_per_epoch = trainer.batches_per_epoch();
  });
}

cvasr_status cvasr_session_output_dir(const cvasr_session* s, char** out) {
  return guarded([&] {
    require(s, "session");
    require(out, "out");
    *out = dup_string(s->session->config().output_dir.string());
  });
}

cvasr_status cvasr_session_step(cvasr_session* s, cvasr_step_result* result) {
  return guarded([&] {
    require(s, "session");
    const auto r = s->session->step();
    if (result) {
      result->step = s->session->trainer().current_step();
      result->mean_nll = r.mean_nll;
      result->used = r.used;
      result->skipped = r.skipped;
    }
  });
}

cvasr_status cvasr_session_evaluate(const cvasr_session* s, cvasr_eval_summary* summary,
                                    char** text) {
  return guarded([&] {
    require(s, "session");
    const auto report = s->session->evaluate_held_out();
    fill(summary, report);
    put(text, pl::format_eval_report(report));
  });
}

cvasr_status cvasr_session_save(const cvasr_session* s, const char* path) {
  return guarded([&] {
    require(s, "session");
    require(path, "path");
    s->session->save(path);
  });
}

cvasr_status cvasr_config_output_dir(const char* config_path, char** out) {
  return guarded([&] {
    require(config_path, "config_path");
    require(out, "out");
    *out = dup_string(pl::RunConfig::load(config_path).output_dir.string());
  });
}

cvasr_status cvasr_evaluate(const char* config_path, const char* checkpoint, cvasr_split split,
                            cvasr_eval_summary* summary, char** text, char** csv, char** kv) {
  return guarded([&] {
    require(config_path, "config_path");
    require(checkpoint, "checkpoint");
    if (split != CVASR_SPLIT_TRAIN && split != CVASR_SPLIT_EVAL) {
      throw cv::InvalidArgument("unknown split");
    }
    const auto config = pl::RunConfig::load(config_path);
    const auto out = pl::evaluate_checkpoint(
        config, checkpoint, split == CVASR_SPLIT_TRAIN ? pl::SplitChoice::kTrain
                                                       : pl::SplitChoice::kEval);
    fill(summary, out.report);
    put(text, out.text);
    put(csv, out.csv);
    put(kv, out.kv);
  });
}

cvasr_status cvasr_model_open(const char* checkpoint, cvasr_model** out) {
  return guarded([&] {
    require(checkpoint, "checkpoint");
    require(out, "out");
    *out = nullptr;
    *out = new cvasr_model{pl::InferenceModel::load(checkpoint)};
  });
}

void cvasr_model_close(cvasr_model* m) { delete m; }

cvasr_status cvasr_model_transcribe_file(const cvasr_model* m, const char* wav_path,
                                         char** arabic, char** roman) {
  return guarded([&] {
    require(m, "model");
    require(wav_path, "wav_path");
    const auto t = m->model.transcribe_file(wav_path);
    char* a = arabic ? dup_string(t.arabic) : nullptr;
    try {
      put(roman, t.roman);
    } catch (...) {
      std::free(a);
      throw;
    }
    if (arabic) *arabic = a;
  });
}

}  // extern "C"
