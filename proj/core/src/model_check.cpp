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

#include "adfusion/model_check.hpp"

#include "adfusion/ops.hpp"
#include "adfusion/rng.hpp"

namespace adfusion::model {
namespace {

constexpr std::uint64_t kSampleStream = 30;

Tensor uniform_tensor(Rng& rng, Shape shape) {
  std::vector<float> v(shape_numel(shape));
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return Tensor(std::move(shape), std::move(v));
}

}  // namespace

SubjectSample random_sample(const ModelConfig& cfg, std::uint64_t seed,
                            std::size_t text_rows, std::size_t image_rows,
                            int label) {
  Rng rng = Rng::derive(seed, kSampleStream);
  SubjectSample s;
  s.subject_id = "random-" + std::to_string(seed);
  s.label = label;
  s.text_embeddings = uniform_tensor(rng, {text_rows, cfg.d_text});
  if (cfg.modalities.image) {
    s.image_embeddings = uniform_tensor(rng, {image_rows, cfg.d_image});
  }
  if (cfg.modalities.acoustic) {
    s.acoustic_features = uniform_tensor(rng, {cfg.acoustic_in});
  }
  return s;
}

GradCheckResult check_model_gradients(const ModelConfig& cfg,
                                      std::uint64_t seed,
                                      std::size_t text_rows,
                                      std::size_t image_rows, double eps) {
  cfg.validate();
  const auto model = MultimodalModel<float>::init(cfg, seed).cast<double>();
  const auto sample = random_sample(cfg, seed, text_rows, image_rows);
  std::vector<NamedParam> params;
  for (const auto& p : model.parameters()) params.push_back({p.name, p.tensor});
  Rng unused(0);
  auto loss = [&](Tape64& tape) {
    auto out = model.forward(tape, sample, false, unused);
    return ops::cross_entropy(tape, out.logits,
                              static_cast<std::size_t>(sample.label));
  };
  return grad_check(loss, std::move(params), eps);
}

}  // namespace adfusion::model
