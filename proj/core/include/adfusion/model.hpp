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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adfusion/gated_attention.hpp"
#include "adfusion/nn.hpp"
#include "adfusion/rng.hpp"
#include "adfusion/tape.hpp"
#include "adfusion/tensor.hpp"
#include "adfusion/tensor_fusion.hpp"

namespace adfusion::model {

/// Which branches feed the fusion layer. Text is mandatory.
struct ModalitySet {
  bool text = true;
  bool image = true;
  bool acoustic = true;

  /// Parses a comma list such as "text,image,acoustic" or "text,acoustic".
  static ModalitySet parse(std::string_view spec);
  std::string to_string() const;
  std::size_t count() const { return text + image + acoustic; }

  friend bool operator==(const ModalitySet&, const ModalitySet&) = default;
};

struct ModelConfig {
  ModalitySet modalities;
  std::size_t d_text = 768;
  std::size_t d_image = 768;
  std::size_t text_proj = 128;
  std::size_t image_proj = 32;
  std::size_t acoustic_in = 88;
  std::size_t acoustic_proj = 32;
  std::size_t d_g = 64;
  std::size_t head_hidden = 128;
  double dropout1 = 0.6;
  double dropout2 = 0.2;
  std::size_t n_classes = 2;

  /// Throws ConfigError on an invalid modality set or non-positive dims.
  void validate() const;
  /// (text_proj+1) x (image_proj+1) x (acoustic_proj+1), or the 2-way analog.
  Shape fused_shape() const;
  std::size_t fused_size() const { return shape_numel(fused_shape()); }

  /// Small dimensions used by gradient checks and the synthetic task.
  static ModelConfig toy();

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// One subject: label 1 = AD (positive class), 0 = non-AD.
struct SubjectSample {
  std::string subject_id;
  int label = 0;
  Tensor text_embeddings;                     // [N x d_text]
  std::optional<Tensor> image_embeddings;     // [T x d_image]
  std::optional<Tensor> acoustic_features;    // [acoustic_in]
};

template <typename T>
struct ModelParams {
  attention::GatedAttentionParams<T> text_attention;
  nn::DenseLayer<T> text_projection;
  std::optional<attention::GatedAttentionParams<T>> image_attention;
  std::optional<nn::DenseLayer<T>> image_projection;
  std::optional<nn::DenseLayer<T>> acoustic_projection;
  nn::DenseLayer<T> head_hidden;
  nn::DenseLayer<T> head_output;
};

template <typename T>
struct ModelOutput {
  BasicTensor<T> logits;  // [n_classes]
  BasicTensor<T> z_t;
  std::optional<BasicTensor<T>> z_v;
  std::optional<BasicTensor<T>> z_a;
  fusion::FusedTensor<T> fused;
};

/// positional encoding -> gated self-attention -> average pool -> dense.
template <typename T>
BasicTensor<T> text_branch(BasicTape<T>& tape, const ModelConfig& cfg,
                           const ModelParams<T>& params,
                           const BasicTensor<T>& embeddings);

/// Same pipeline as the text branch with its own parameters.
template <typename T>
BasicTensor<T> image_branch(BasicTape<T>& tape, const ModelConfig& cfg,
                            const ModelParams<T>& params,
                            const BasicTensor<T>& embeddings);

/// Single dense projection of the acoustic functionals.
template <typename T>
BasicTensor<T> acoustic_branch(BasicTape<T>& tape, const ModelConfig& cfg,
                               const ModelParams<T>& params,
                               const BasicTensor<T>& features);

/// flatten -> dropout(p1) -> dense(hidden) -> relu -> dropout(p2) -> dense.
template <typename T>
BasicTensor<T> head_forward(BasicTape<T>& tape, const ModelConfig& cfg,
                            const ModelParams<T>& params,
                            const fusion::FusedTensor<T>& fused, bool training,
                            Rng& rng);

/// argmax with ties resolved to class 0 (non-AD).
template <typename T>
int predict_class(const BasicTensor<T>& logits);

template <typename T>
class MultimodalModel {
 public:
  MultimodalModel() = default;
  MultimodalModel(ModelConfig config, ModelParams<T> params);

  /// Xavier-initialised parameters drawn from `seed`.
  static MultimodalModel init(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const ModelParams<T>& params() const { return params_; }
  ModelParams<T>& params() { return params_; }

  /// Named parameters in a fixed order; the tensors share storage with the
  /// model.
  nn::ParameterList<T> parameters() const;
  std::size_t parameter_count() const;

  ModelOutput<T> forward(BasicTape<T>& tape, const SubjectSample& sample,
                         bool training, Rng& rng) const;
  /// Eval-mode forward without recording.
  BasicTensor<T> logits(const SubjectSample& sample) const;
  int predict(const SubjectSample& sample) const;

  /// Copies of all parameter values, in `parameters()` order.
  std::vector<std::vector<T>> snapshot() const;
  void restore(const std::vector<std::vector<T>>& values);

  MultimodalModel clone() const;
  template <typename U>
  MultimodalModel<U> cast() const;

 private:
  ModelConfig config_;
  ModelParams<T> params_;
};

/// Checks sample modalities and dims against the configuration.
void validate_sample(const ModelConfig& cfg, const SubjectSample& sample);

extern template class MultimodalModel<float>;
extern template class MultimodalModel<double>;

}  // namespace adfusion::model
