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

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "adfusion/audio.hpp"
#include "adfusion/gated_attention.hpp"
#include "adfusion/model.hpp"
#include "adfusion/model_check.hpp"
#include "adfusion/ops.hpp"
#include "adfusion/tensor_fusion.hpp"

namespace {

using namespace adfusion;

Tensor random_tensor(Rng& rng, Shape shape) {
  std::vector<float> v(shape_numel(shape));
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1, 1));
  return Tensor(std::move(shape), std::move(v));
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(0);
  auto a = random_tensor(rng, {n, n});
  auto b = random_tensor(rng, {n, n});
  auto tape = Tape::disabled();
  for (auto _ : state) benchmark::DoNotOptimize(ops::matmul(tape, a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128)->Arg(256);

void BM_GatedAttention(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  auto params = attention::GatedAttentionParams<float>::init(768, 64, rng);
  auto z = random_tensor(rng, {n, 768});
  for (auto _ : state) {
    auto tape = Tape::disabled();
    benchmark::DoNotOptimize(attention::gated_self_attention_forward(tape, params, z));
  }
}
BENCHMARK(BM_GatedAttention)->Arg(16)->Arg(49)->Arg(128);

void BM_GatedAttentionBackward(benchmark::State& state) {
  Rng rng(2);
  auto params = attention::GatedAttentionParams<float>::init(768, 64, rng);
  auto z = random_tensor(rng, {49, 768});
  for (auto _ : state) {
    Tape tape;
    auto h = attention::gated_self_attention_forward(tape, params, z).output_h;
    tape.backward(ops::sum(tape, h));
  }
}
BENCHMARK(BM_GatedAttentionBackward);

void BM_TensorFusion(benchmark::State& state) {
  Rng rng(3);
  fusion::BranchVectors<float> b{random_tensor(rng, {128}), random_tensor(rng, {32}),
                                 random_tensor(rng, {32})};
  for (auto _ : state) {
    auto tape = Tape::disabled();
    benchmark::DoNotOptimize(fusion::tensor_fusion(tape, b));
  }
  state.SetItemsProcessed(state.iterations() * 129 * 33 * 33);
}
BENCHMARK(BM_TensorFusion);

void BM_ToyModelStep(benchmark::State& state) {
  const auto cfg = model::ModelConfig::toy();
  auto m = model::MultimodalModel<float>::init(cfg, 0);
  const auto sample = model::random_sample(cfg, 1, 3, 4);
  Rng rng(4);
  for (auto _ : state) {
    Tape tape;
    auto out = m.forward(tape, sample, true, rng);
    tape.backward(ops::cross_entropy(tape, out.logits, 1));
  }
}
BENCHMARK(BM_ToyModelStep);

void BM_StftLogMel(benchmark::State& state) {
  audio::AudioClip clip;
  clip.sample_rate = 22050;
  clip.samples.resize(static_cast<std::size_t>(state.range(0)) * 22050);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    clip.samples[i] = static_cast<float>(0.3 * std::sin(2 * std::numbers::pi * 440 * i / 22050.0));
  }
  const audio::FrontendConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(audio::stft_log_mel(clip, cfg));
}
BENCHMARK(BM_StftLogMel)->Arg(5)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_SpectrogramImage(benchmark::State& state) {
  audio::AudioClip clip;
  clip.sample_rate = 22050;
  clip.samples.resize(30 * 22050);
  Rng rng(5);
  for (auto& s : clip.samples) s = static_cast<float>(rng.uniform(-0.5, 0.5));
  const audio::FrontendConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(audio::build_spectrogram_image(clip, cfg));
}
BENCHMARK(BM_SpectrogramImage)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
