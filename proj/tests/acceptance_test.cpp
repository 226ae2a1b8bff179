// Copyright 2026 The adfusion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "adfusion/audio.hpp"
#include "adfusion/gated_attention.hpp"
#include "adfusion/metrics.hpp"
#include "adfusion/model.hpp"
#include "adfusion/model_check.hpp"
#include "adfusion/optim.hpp"
#include "adfusion/synthetic.hpp"
#include "adfusion/tensor_fusion.hpp"
#include "adfusion/training.hpp"

namespace fs = std::filesystem;
using namespace adfusion;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Collects failed checks for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  bool ok() const { return failures_.empty(); }
  std::string summary() const {
    std::string s;
    for (std::size_t i = 0; i < failures_.size() && i < 3; ++i) {
      s += (i ? "; " : "") + failures_[i];
    }
    if (failures_.size() > 3) s += "; ...";
    return s;
  }

 private:
  std::vector<std::string> failures_;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Tensor random_matrix(Rng& rng, std::size_t n, std::size_t d, double lo, double hi) {
  std::vector<float> v(n * d);
  for (auto& x : v) x = static_cast<float>(rng.uniform(lo, hi));
  return Tensor({n, d}, std::move(v));
}

// ---------------------------------------------------------------------------

Outcome gradient_correctness() {
  const auto start = Clock::now();
  const auto r = model::check_model_gradients(model::ModelConfig::toy(), 0, 3, 4);
  const double secs = seconds_since(start);
  return {r.max_relative_error < 1e-6 && secs < 60.0,
          "max rel err " + fmt("%.3g", r.max_relative_error) + " over " +
              std::to_string(r.entries_checked) + " params, " + fmt("%.1f", secs) + " s"};
}

Outcome shape_ledger() {
  Check c;
  model::ModelConfig cfg;
  auto m = model::MultimodalModel<float>::init(cfg, 0);
  auto sample = model::random_sample(cfg, 1, 7, 49);
  Tape tape;
  Rng rng(0);
  auto out = m.forward(tape, sample, false, rng);
  c.expect(out.z_t.shape() == Shape{128}, "z_t " + shape_str(out.z_t.shape()));
  c.expect(out.z_v && out.z_v->shape() == Shape{32}, "z_v");
  c.expect(out.z_a && out.z_a->shape() == Shape{32}, "z_a");
  c.expect(out.fused.data.shape() == Shape{129, 33, 33},
           "fused " + shape_str(out.fused.data.shape()));
  c.expect(out.logits.shape() == Shape{2}, "logits " + shape_str(out.logits.shape()));
  Tape t2;
  auto masks = attention::compute_gating_masks(t2, m.params().text_attention,
                                               sample.text_embeddings, sample.text_embeddings);
  c.expect(masks.m.shape() == Shape{7, 2}, "M " + shape_str(masks.m.shape()));

  model::ModelConfig bi;
  bi.modalities = model::ModalitySet::parse("text,acoustic");
  auto mb = model::MultimodalModel<float>::init(bi, 0);
  auto sb = model::random_sample(bi, 2, 3, 4);
  Tape t3;
  auto ob = mb.forward(t3, sb, false, rng);
  c.expect(ob.fused.data.shape() == Shape{129, 33}, "bimodal " + shape_str(ob.fused.data.shape()));
  c.expect(ob.logits.shape() == Shape{2}, "bimodal logits");

  audio::AudioClip clip;
  clip.sample_rate = 22050;
  clip.samples.resize(22050 * 2);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    clip.samples[i] = static_cast<float>(0.4 * std::sin(2 * std::numbers::pi * 330 * i / 22050.0));
  }
  const auto img = audio::build_spectrogram_image(clip, audio::FrontendConfig{});
  c.expect(img.channels.shape() == Shape{3, 224, 224},
           "spectrogram " + shape_str(img.channels.shape()));
  return {c.ok(), c.ok() ? "z_t 128, z_v/z_a 32, M Nx2, fused 129x33x33 / 129x33, "
                           "logits 2, image 3x224x224"
                         : c.summary()};
}

Outcome fusion_oracle() {
  Check c;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    double t[3], v[3], a[3];
    for (int i = 0; i < 2; ++i) {
      t[i] = rng.uniform(-2, 2);
      v[i] = rng.uniform(-2, 2);
      a[i] = rng.uniform(-2, 2);
    }
    t[2] = v[2] = a[2] = 1;
    Tape64 tape;
    auto f = fusion::tensor_fusion(
                 tape, fusion::BranchVectors<double>{Tensor64::vector({t[0], t[1]}),
                                                     Tensor64::vector({v[0], v[1]}),
                                                     Tensor64::vector({a[0], a[1]})})
                 .data;
    c.expect(f.numel() == 27, "entry count");
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        for (std::size_t k = 0; k < 3; ++k) {
          c.expect(f.at(i, j, k) == t[i] * v[j] * a[k], "entry mismatch");
        }
      }
    }
    c.expect(f.at(2, 2, 2) == 1.0, "corner");
    for (std::size_t i = 0; i < 2; ++i) c.expect(f.at(i, 2, 2) == t[i], "text slice");
    for (std::size_t j = 0; j < 2; ++j) c.expect(f.at(2, j, 2) == v[j], "image slice");
    for (std::size_t k = 0; k < 2; ++k) c.expect(f.at(2, 2, k) == a[k], "acoustic slice");
  }
  return {c.ok(), c.ok() ? "27/27 entries exact over 100 draws, corner 1, slices recovered"
                         : c.summary()};
}

Outcome attention_invariants() {
  Check c;
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const std::size_t n = 1 + rng.below(12), d = 1 + rng.below(16);
    auto params = attention::GatedAttentionParams<float>::init(d, 1 + rng.below(8), rng);
    auto z = random_matrix(rng, n, d, -3, 3);
    Tape tape;
    auto a = attention::gated_self_attention_forward(tape, params, z).attention_map;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < n; ++j) s += a.at(i, j);
      worst = std::max(worst, std::abs(s - 1));
    }
  }
  c.expect(worst <= 1e-6, "row sum error " + fmt("%.3g", worst));

  for (std::size_t n : {1u, 4u, 11u}) {
    Rng rng(n);
    auto params = attention::GatedAttentionParams<float>::init(8, 4, rng);
    Tape tape;
    auto a = attention::gated_self_attention_forward(tape, params, Tensor({n, 8})).attention_map;
    for (float v : a.data()) {
      c.expect(std::abs(v - 1.0f / n) <= 1e-7f, "zero input not uniform");
    }
  }

  std::size_t perms = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed + 5000);
    const std::size_t n = 2 + rng.below(10), d = 1 + rng.below(16);
    auto params = attention::GatedAttentionParams<float>::init(d, 1 + rng.below(8), rng);
    auto z = random_matrix(rng, n, d, -2, 2);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<float> pz(n * d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < d; ++k) pz[i * d + k] = z.at(perm[i], k);
    }
    Tape tape;
    auto h = attention::gated_self_attention_forward(tape, params, z).output_h;
    auto ph = attention::gated_self_attention_forward(tape, params, Tensor({n, d}, pz)).output_h;
    bool same = true;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < d; ++k) same = same && ph.at(i, k) == h.at(perm[i], k);
    }
    c.expect(same, "permutation seed " + std::to_string(seed));
    perms += same;
  }
  return {c.ok(), c.ok() ? "row sums within " + fmt("%.2g", worst) +
                               " over 1000 inputs, zero input uniform, " +
                               std::to_string(perms) + "/200 permutations bitwise"
                         : c.summary()};
}

Outcome dsp_oracles() {
  Check c;
  // 440 Hz: the expected band is the filter whose centre is nearest 440 Hz.
  audio::FrontendConfig cfg;
  audio::AudioClip clip;
  clip.sample_rate = 22050;
  clip.samples.resize(22050 * 3);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    clip.samples[i] = static_cast<float>(0.5 * std::sin(2 * std::numbers::pi * 440 * i / 22050.0));
  }
  const auto centers = audio::mel_center_frequencies(cfg.n_mels, 0, 11025);
  std::size_t expected = 0;
  for (std::size_t m = 1; m < centers.size(); ++m) {
    if (std::abs(centers[m] - 440) < std::abs(centers[expected] - 440)) expected = m;
  }
  const auto mel = audio::stft_log_mel(clip, cfg);
  std::size_t hits = 0, frames = 0;
  for (std::size_t t = 2; t + 2 < mel.dim(1); ++t, ++frames) {
    std::size_t arg = 0;
    for (std::size_t m = 1; m < mel.dim(0); ++m) {
      if (mel.at(m, t) > mel.at(arg, t)) arg = m;
    }
    hits += arg == expected;
  }
  c.expect(hits == frames, "440 Hz argmax " + std::to_string(hits) + "/" + std::to_string(frames));

  const auto d = audio::delta(Tensor::filled({5, 30}, 3.0f), 9);
  const auto dd = audio::delta(d, 9);
  for (float v : d.data()) c.expect(v == 0.0f, "constant delta");
  for (float v : dd.data()) c.expect(v == 0.0f, "constant delta-delta");

  std::vector<float> ramp(40);
  std::iota(ramp.begin(), ramp.end(), 0.0f);
  const auto dr = audio::delta(Tensor({1, 40}, ramp), 9);
  for (std::size_t t = 4; t < 36; ++t) {
    c.expect(std::abs(dr.at(0, t) - 1.0f) <= 1e-6f, "ramp delta");
  }

  audio::AudioClip silence;
  silence.sample_rate = 22050;
  silence.samples.assign(22050, 0.0f);
  const auto floor = audio::stft_log_mel(silence, cfg);
  for (float v : floor.data()) c.expect(v == -80.0f, "silence floor");
  return {c.ok(), c.ok() ? "440 Hz argmax at band " + std::to_string(expected) + " (" +
                               fmt("%.1f", centers[expected]) + " Hz) in " +
                               std::to_string(frames) + "/" + std::to_string(frames) +
                               " frames, deltas exact, silence at -80 dB"
                         : c.summary()};
}

Outcome protocol_constants() {
  Check c;
  optim::PlateauScheduler p;
  p.step(1.0);
  c.expect(!p.step(1.0) && !p.step(1.0), "plateau fired early");
  c.expect(p.step(1.0), "plateau did not fire at 3");
  c.expect(std::abs(p.current_lr - 1e-6) < 1e-20, "lr after plateau " + fmt("%g", p.current_lr));

  optim::EarlyStopping e;
  e.step(1.0);
  for (int i = 0; i < 5; ++i) c.expect(!e.step(1.0), "early stop fired early");
  c.expect(e.step(1.0), "early stop did not fire at 6");

  training::Dataset d(108);
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i].subject_id = std::to_string(i);
    d[i].label = static_cast<int>(i % 2);
  }
  const auto split = training::split_train_val(d, 0.65, 0);
  c.expect(split.train.size() == 70 && split.val.size() == 38,
           "split " + std::to_string(split.train.size()) + "/" + std::to_string(split.val.size()));

  synthetic::SyntheticOptions opts;
  opts.subjects = 60;
  opts.test_subjects = 20;
  const auto data = synthetic::generate(opts);
  training::TrainConfig tc;
  tc.lr = 1e-2;
  tc.max_epochs = 8;
  tc.runs = 5;
  tc.same_seed_every_run = true;
  const auto r = training::run_protocol(model::ModelConfig::toy(), tc, data.train, data.test, 1);
  for (const auto& m : r.report.metrics) {
    c.expect(metrics::format_mean_std(m.mean, m.std).ends_with("±0.00"), m.name + " std");
  }
  return {c.ok(), c.ok() ? "plateau at 3 (1e-5 -> 1e-6), early stop at 6, 108 -> 70/38, "
                           "forced-identical seeds std 0.00"
                         : c.summary()};
}

Outcome metrics_check() {
  Check c;
  const auto m = metrics::compute_metrics(metrics::ConfusionMatrix{2, 1, 1, 2});
  for (double v : {m.precision, m.recall, m.f1, m.accuracy, m.specificity}) {
    c.expect(metrics::format_mean_std(v, 0) == "66.67 ±0.00", "hand matrix");
  }
  const std::vector<int> pred{1, 1, 1, 0, 0, 1, 0, 0, 0, 0};
  const std::vector<int> truth{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  std::vector<int> sp, st;
  for (int v : pred) sp.push_back(1 - v);
  for (int v : truth) st.push_back(1 - v);
  const auto a = metrics::compute_metrics(pred, truth);
  const auto b = metrics::compute_metrics(sp, st);
  c.expect(std::abs(a.precision - 75.0) < 1e-9, "positive class is label 1");
  c.expect(std::abs(a.recall - b.specificity) < 1e-9 && std::abs(a.specificity - b.recall) < 1e-9,
           "swap does not exchange recall and specificity");
  c.expect(std::abs(b.precision - a.precision) > 1, "swap leaves precision unchanged");
  return {c.ok(), c.ok() ? "(2,1,1,2) -> 66.67 on all five; label swap exchanges roles"
                         : c.summary()};
}

Outcome synthetic_separability() {
  const auto start = Clock::now();
  synthetic::SyntheticOptions opts;  // 200 subjects, toy dims
  const auto data = synthetic::generate(opts);
  training::TrainConfig tc;
  tc.lr = 1e-2;
  tc.max_epochs = 200;
  tc.runs = 5;
  const auto r = training::run_protocol(model::ModelConfig::toy(), tc, data.train, data.test, 1);
  const double secs = seconds_since(start);
  double worst = 100;
  int max_epochs = 0;
  for (const auto& run : r.runs) {
    const auto& h = run.training.history;
    worst = std::min(worst, h[static_cast<std::size_t>(run.training.best_epoch - 1)].val_accuracy);
    max_epochs = std::max(max_epochs, static_cast<int>(h.size()));
  }
  std::cout << r.report.format_table("Transcript+Image+Acoustic");
  const bool pass = worst >= 95.0 && max_epochs <= 200 && secs < 300;
  return {pass, "min val acc " + fmt("%.2f", worst) + "% over 5 runs, <= " +
                    std::to_string(max_epochs) + " epochs, " + fmt("%.1f", secs) + " s"};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + ADFUSION_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  std::random_device rd;
  const auto root = fs::temp_directory_path() / ("adfusion-accept-" + std::to_string(rd()));
  fs::create_directories(root);
  Check c;
  const auto q = [](const fs::path& p) { return "\"" + p.string() + "\""; };
  c.expect(run_cli("synth --out " + q(root / "data") + " --subjects 60 --test-subjects 20") == 0,
           "synth failed");
  const std::string args = "train --manifest " + q(root / "data" / "manifest.csv") +
                           " --dims toy --lr 1e-2 --max-epochs 10 --runs 2 --seed 7 --threads 1";
  c.expect(run_cli(args + " --out " + q(root / "a")) == 0, "first train failed");
  c.expect(run_cli(args + " --out " + q(root / "b")) == 0, "second train failed");
  std::size_t compared = 0;
  for (const char* f : {"report.txt", "report.csv", "history.csv", "run1.tfm", "run2.tfm"}) {
    const auto a = slurp(root / "a" / f), b = slurp(root / "b" / f);
    c.expect(!a.empty() && a == b, std::string(f) + " differs");
    ++compared;
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  return {c.ok(), c.ok() ? std::to_string(compared) + " report and checkpoint files byte-identical"
                         : c.summary()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"shape ledger", shape_ledger},
      {"fusion oracle", fusion_oracle},
      {"attention invariants", attention_invariants},
      {"dsp oracles", dsp_oracles},
      {"protocol constants", protocol_constants},
      {"metrics", metrics_check},
      {"synthetic separability", synthetic_separability},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
