// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero when any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "buckwalter_fixture.hpp"
#include "common/error.hpp"
#include "corpus/corpus.hpp"
#include "ctc/metrics.hpp"
#include "ctc_sweep.hpp"
#include "network_probes.hpp"
#include "op_probes.hpp"
#include "oracles.hpp"
#include "pipeline/commands.hpp"
#include "support.hpp"
#include "training/checkpoint.hpp"
#include "training/trainer.hpp"

using namespace convasr;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const translit::TranslitTable& table() {
  static const auto t = translit::TranslitTable::load(testing::bundled_table());
  return t;
}

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Outcome ctc_oracle() {
  const auto r = testing::ctc_sweep(6, 4, 3, 2026);
  const bool pass = r.rejection_ok && r.instances + r.infeasible == 6 * (4 + 15 + 40) &&
                    r.max_nll_error < 1e-9 && r.max_grad_error < 1e-5;
  return {pass, fmt("%zu feasible + %zu rejected instances, max nll error %.2e, max grad error %.2e",
                    r.instances, r.infeasible, r.max_nll_error, r.max_grad_error)};
}

Outcome gradient_integrity() {
  const double ops = testing::worst_op_grad_error(31);
  model::NetworkConfig micro;
  micro.num_stacks = 1;
  micro.residual_channels = 2;
  micro.skip_channels = 2;
  micro.kernel_size = 2;
  micro.mel_bins = 3;
  micro.alphabet_size = 3;
  const double net = testing::network_grad_error(micro, 17, 8, {1, 2, 1});
  return {ops < 1e-4 && net < 1e-4,
          fmt("layer ops max rel error %.2e, micro network max rel error %.2e", ops, net)};
}

Outcome overfit() {
  const auto alphabet = translit::Alphabet::from_table(table());
  const auto corpus = testing::tone_corpus(alphabet);
  train::TrainConfig c;
  c.batch_size = 5;
  c.learning_rate = 1e-3;
  c.seed = 1;
  c.max_steps = 2000;
  train::Trainer trainer(testing::small_network(alphabet.size()), dsp::FeatureConfig{}, c, table());
  trainer.set_training_data(corpus);
  std::size_t edits = 0;
  while (trainer.current_step() < c.max_steps) {
    trainer.step();
    if (trainer.current_step() % 25 == 0) {
      edits = trainer.evaluate(corpus).summary.total_edits;
      if (edits == 0) break;
    }
  }
  return {edits == 0, fmt("training-set edits %zu after %ld steps", edits, trainer.current_step())};
}

Outcome setup_grid() {
  const auto alphabet = translit::Alphabet::from_table(table());
  const auto utt = testing::tone_corpus(alphabet).front();
  bool pass = true;
  std::string detail;
  long previous = 0;
  for (int stacks : {6, 7, 8}) {
    model::NetworkConfig net;
    net.num_stacks = stacks;
    net.alphabet_size = alphabet.size();
    train::TrainConfig c;
    c.batch_size = 1;
    train::Trainer trainer(net, dsp::FeatureConfig{}, c, table());
    const auto r = trainer.train_step(std::span(&utt, 1));
    const auto& p = trainer.params();
    bool layout = p.config.blocks_per_stack == 4 &&
                  p.blocks.size() == static_cast<std::size_t>(4 * stacks);
    for (int s = 0; s < stacks && layout; ++s) {
      std::vector<std::size_t> d;
      for (const auto& b : p.stack(s)) d.push_back(b.filter_conv.dilation);
      layout = d == std::vector<std::size_t>{1, 3, 9, 27};
    }
    const long count = model::param_count(net);
    pass = pass && layout && r.used == 1 && std::isfinite(r.mean_nll) && count > previous;
    previous = count;
    detail += fmt("%s%d stacks: %ld params", detail.empty() ? "" : ", ", stacks, count);
  }
  return {pass, detail};
}

Outcome receptive_field() {
  bool pass = true;
  std::string detail;
  for (int stacks : {1, 2}) {
    model::NetworkConfig net;
    net.num_stacks = stacks;
    net.residual_channels = 16;
    net.skip_channels = 32;
    net.alphabet_size = 5;
    const long expected = model::receptive_field(net);
    const long measured = testing::perturbation_span(net, 40 + stacks);
    pass = pass && measured == expected && expected == 1 + 40L * stacks;
    detail += fmt("%s%d stack(s): measured %ld, formula %ld", detail.empty() ? "" : ", ", stacks,
                  measured, expected);
  }
  return {pass, detail};
}

Outcome transliteration() {
  std::size_t checked = 0;
  bool pass = true;
  try {
    const auto& t = table();
    for (const auto& [a, ra] : testing::kBuckwalter) {
      for (const auto& [b, rb] : testing::kBuckwalter) {
        const std::string arabic = testing::u8(a) + testing::u8(b);
        const std::string roman = std::string(1, ra) + rb;
        pass = pass && t.to_roman(arabic) == roman && t.to_arabic(roman) == arabic &&
               t.to_arabic(t.to_roman(arabic)) == arabic && t.to_roman(t.to_arabic(roman)) == roman;
        ++checked;
      }
    }
  } catch (const Error& e) {
    return {false, std::string("exception: ") + e.what()};
  }
  return {pass, fmt("%zu symbol pairs over %zu letters, both directions", checked,
                    testing::kBuckwalter.size())};
}

Outcome metric_fidelity() {
  std::mt19937_64 g(1000);
  std::size_t disagreements = 0;
  for (int i = 0; i < 1000; ++i) {
    auto seq = [&] {
      std::vector<int> v(g() % 13);
      for (int& x : v) x = 1 + static_cast<int>(g() % 5);
      return v;
    };
    const auto a = seq(), b = seq();
    disagreements += ctc::edit_distance(a, b) != oracle::edit_distance_recursive(a, b);
  }
  // Two utterances: 2 substitutions in 10 symbols and 9 deletions in 30.
  std::vector<int> ref1(10, 1), hyp1 = ref1, ref2(30, 2);
  hyp1[0] = hyp1[5] = 3;
  const std::vector<int> hyp2(21, 2);
  const std::vector<ctc::LabelPair> fixture = {{ref1, hyp1}, {ref2, hyp2}};
  const auto s = ctc::label_error_rate(fixture);
  train::EvalReport report;
  report.summary = s;
  const std::string text = pipeline::format_eval_report(report);
  const bool pass = disagreements == 0 && s.total_edits == 11 && s.total_reference == 40 &&
                    s.ler_percent == 27.5 && text.starts_with("LER 27.50%");
  return {pass, fmt("%zu/1000 disagreements, fixture LER %.2f%% (%zu/%zu)", disagreements,
                    s.ler_percent, s.total_edits, s.total_reference)};
}

Outcome protocol() {
  auto entries = [](std::size_t n) {
    std::vector<corpus::ManifestEntry> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = {"clip" + std::to_string(i) + ".wav", "x"};
    return v;
  };
  const auto [train, eval] = corpus::split(entries(3549), {0.9, 7});
  const auto batches = corpus::make_batches(entries(5083), 18, 7);
  const bool pass = train.size() == 3195 && eval.size() == 354 && batches.size() == 283 &&
                    batches.back().size() == 7;
  return {pass, fmt("split %zu/%zu, %zu batches, last %zu", train.size(), eval.size(),
                    batches.size(), batches.back().size())};
}

Outcome determinism() {
  const auto alphabet = translit::Alphabet::from_table(table());
  const auto corpus = testing::tone_corpus(alphabet);
  train::TrainConfig c;
  c.batch_size = 2;
  c.seed = 77;
  c.augment.stretch = true;
  c.augment.noise = true;
  const auto noise = testing::render_tones("", 99);
  auto make = [&] {
    train::Trainer t(testing::small_network(alphabet.size()), dsp::FeatureConfig{}, c, table());
    t.set_training_data(corpus);
    t.set_noise({noise});
    return t;
  };
  auto run = [](train::Trainer& t, int steps) {
    std::vector<double> log;
    for (int i = 0; i < steps; ++i) log.push_back(t.step().mean_nll);
    return log;
  };

  auto straight = make();
  const auto log_a = run(straight, 10);
  auto twin = make();
  const auto log_b = run(twin, 10);

  testing::TempDir dir("acceptance");
  auto first = make();
  auto log_c = run(first, 5);
  train::save_checkpoint(dir / "half.ckpt", first.checkpoint());
  train::Trainer second(train::load_checkpoint(dir / "half.ckpt"), c);
  second.set_training_data(corpus);
  second.set_noise({noise});
  const auto rest = run(second, 5);
  log_c.insert(log_c.end(), rest.begin(), rest.end());

  const bool resumed_equal =
      train::serialize(second.checkpoint()) == train::serialize(straight.checkpoint());
  const bool pass = resumed_equal && log_a == log_c && log_a == log_b;
  return {pass, fmt("resumed checkpoint %s, resumed loss log %s, same-seed loss log %s",
                    resumed_equal ? "bit-identical" : "DIFFERS",
                    log_a == log_c ? "identical" : "DIFFERS", log_a == log_b ? "identical" : "DIFFERS")};
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"ctc-oracle-equivalence", 10, ctc_oracle},
      {"gradient-integrity", 60, gradient_integrity},
      {"overfit-capability", 600, overfit},
      {"setup-grid", 60, setup_grid},
      {"receptive-field", 30, receptive_field},
      {"transliteration-round-trip", 1, transliteration},
      {"metric-fidelity", 60, metric_fidelity},
      {"protocol-fidelity", 60, protocol},
      {"determinism-and-resume", 120, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %s: %s; %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), seconds, c.budget_seconds, in_time ? "" : " OVER TIME");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
