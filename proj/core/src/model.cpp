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

#include "adfusion/model.hpp"

#include <sstream>
#include <utility>

#include "adfusion/error.hpp"
#include "adfusion/ops.hpp"

namespace adfusion::model {
namespace {

template <typename T>
BasicTensor<T> as(const Tensor& t) {
  if constexpr (std::is_same_v<T, float>) {
    return t;
  } else {
    return t.cast<T>();
  }
}

template <typename U, typename T>
nn::DenseLayer<U> cast_layer(const nn::DenseLayer<T>& layer) {
  return nn::DenseLayer<U>(layer.weight().template cast<U>(),
                           layer.bias().template cast<U>());
}

template <typename U, typename T>
attention::GatedAttentionParams<U> cast_attention(
    const attention::GatedAttentionParams<T>& p) {
  return {cast_layer<U>(p.fc_q), cast_layer<U>(p.fc_k), cast_layer<U>(p.fc_g)};
}

template <typename T>
BasicTensor<T> sequence_branch(BasicTape<T>& tape,
                               const attention::GatedAttentionParams<T>& attn,
                               const nn::DenseLayer<T>& projection,
                               const BasicTensor<T>& embeddings,
                               std::size_t d, const char* name) {
  if (embeddings.rank() != 2 || embeddings.dim(1) != d ||
      embeddings.dim(0) == 0) {
    throw ShapeError(std::string(name) + " branch expects [N x " +
                     std::to_string(d) + "] embeddings with N >= 1, got " +
                     shape_str(embeddings.shape()));
  }
  const auto pe = nn::positional_encoding<T>(embeddings.dim(0), d);
  auto z = ops::add(tape, embeddings, pe);
  auto trace = attention::gated_self_attention_forward(tape, attn, z);
  auto pooled = nn::average_pool(tape, trace.output_h);
  return projection.forward(tape, pooled);
}

}  // namespace

ModalitySet ModalitySet::parse(std::string_view spec) {
  ModalitySet set{false, false, false};
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t comma = spec.find(',', start);
    const auto end = comma == std::string_view::npos ? spec.size() : comma;
    const auto token = spec.substr(start, end - start);
    if (token == "text") {
      set.text = true;
    } else if (token == "image") {
      set.image = true;
    } else if (token == "acoustic") {
      set.acoustic = true;
    } else {
      throw ConfigError("unknown modality '" + std::string(token) +
                        "' (expected text, image, acoustic)");
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return set;
}

std::string ModalitySet::to_string() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(text, "text");
  add(image, "image");
  add(acoustic, "acoustic");
  return out;
}

void ModelConfig::validate() const {
  if (!modalities.text) {
    throw ConfigError("the text modality is required");
  }
  if (modalities.count() < 2) {
    throw ConfigError("at least two modalities are required, got '" +
                      modalities.to_string() + "'");
  }
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(d_text, "d_text");
  positive(text_proj, "text_proj");
  positive(d_g, "d_g");
  positive(head_hidden, "head_hidden");
  positive(n_classes, "n_classes");
  if (modalities.image) {
    positive(d_image, "d_image");
    positive(image_proj, "image_proj");
  }
  if (modalities.acoustic) {
    positive(acoustic_in, "acoustic_in");
    positive(acoustic_proj, "acoustic_proj");
  }
  for (double p : {dropout1, dropout2}) {
    if (!(p >= 0.0 && p < 1.0)) {
      throw ConfigError("dropout rates must be in [0, 1)");
    }
  }
}

Shape ModelConfig::fused_shape() const {
  Shape s{text_proj + 1};
  if (modalities.image) s.push_back(image_proj + 1);
  if (modalities.acoustic) s.push_back(acoustic_proj + 1);
  return s;
}

ModelConfig ModelConfig::toy() {
  ModelConfig cfg;
  cfg.d_text = 6;
  cfg.d_image = 5;
  cfg.text_proj = 4;
  cfg.image_proj = 3;
  cfg.acoustic_proj = 3;
  cfg.d_g = 4;
  cfg.head_hidden = 8;
  return cfg;
}

void validate_sample(const ModelConfig& cfg, const SubjectSample& sample) {
  auto fail = [&](const std::string& what) {
    throw ShapeError("subject '" + sample.subject_id + "': " + what);
  };
  if (sample.label < 0 || static_cast<std::size_t>(sample.label) >= cfg.n_classes) {
    fail("label " + std::to_string(sample.label) + " out of range");
  }
  const auto& te = sample.text_embeddings;
  if (te.rank() != 2 || te.dim(0) == 0 || te.dim(1) != cfg.d_text) {
    fail("text embeddings must be [N x " + std::to_string(cfg.d_text) +
         "], got " + shape_str(te.shape()));
  }
  if (cfg.modalities.image) {
    if (!sample.image_embeddings) fail("missing image embeddings");
    const auto& ie = *sample.image_embeddings;
    if (ie.rank() != 2 || ie.dim(0) == 0 || ie.dim(1) != cfg.d_image) {
      fail("image embeddings must be [T x " + std::to_string(cfg.d_image) +
           "], got " + shape_str(ie.shape()));
    }
  }
  if (cfg.modalities.acoustic) {
    if (!sample.acoustic_features) fail("missing acoustic features");
    if (sample.acoustic_features->shape() != Shape{cfg.acoustic_in}) {
      fail("acoustic features must have length " +
           std::to_string(cfg.acoustic_in) + ", got " +
           shape_str(sample.acoustic_features->shape()));
    }
  }
}

template <typename T>
BasicTensor<T> text_branch(BasicTape<T>& tape, const ModelConfig& cfg,
                           const ModelParams<T>& params,
                           const BasicTensor<T>& embeddings) {
  return sequence_branch(tape, params.text_attention, params.text_projection,
                         embeddings, cfg.d_text, "text");
}

template <typename T>
BasicTensor<T> image_branch(BasicTape<T>& tape, const ModelConfig& cfg,
                            const ModelParams<T>& params,
                            const BasicTensor<T>& embeddings) {
  if (!params.image_attention || !params.image_projection) {
    throw ConfigError("model has no image branch");
  }
  return sequence_branch(tape, *params.image_attention,
                         *params.image_projection, embeddings, cfg.d_image,
                         "image");
}

template <typename T>
BasicTensor<T> acoustic_branch(BasicTape<T>& tape, const ModelConfig& cfg,
                               const ModelParams<T>& params,
                               const BasicTensor<T>& features) {
  if (!params.acoustic_projection) {
    throw ConfigError("model has no acoustic branch");
  }
  if (features.shape() != Shape{cfg.acoustic_in}) {
    throw ShapeError("acoustic branch expects length " +
                     std::to_string(cfg.acoustic_in) + ", got " +
                     shape_str(features.shape()));
  }
  return params.acoustic_projection->forward(tape, features);
}

template <typename T>
BasicTensor<T> head_forward(BasicTape<T>& tape, const ModelConfig& cfg,
                            const ModelParams<T>& params,
                            const fusion::FusedTensor<T>& fused, bool training,
                            Rng& rng) {
  if (fused.data.shape() != cfg.fused_shape()) {
    throw ShapeError("head expects fused tensor " +
                     shape_str(cfg.fused_shape()) + ", got " +
                     shape_str(fused.data.shape()));
  }
  auto x = fusion::flatten(tape, fused);
  x = nn::dropout(tape, x, cfg.dropout1, training, rng);
  x = ops::relu(tape, params.head_hidden.forward(tape, x));
  x = nn::dropout(tape, x, cfg.dropout2, training, rng);
  return params.head_output.forward(tape, x);
}

template <typename T>
int predict_class(const BasicTensor<T>& logits) {
  const auto v = logits.data();
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

template <typename T>
MultimodalModel<T>::MultimodalModel(ModelConfig config, ModelParams<T> params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
}

template <typename T>
MultimodalModel<T> MultimodalModel<T>::init(const ModelConfig& cfg,
                                            std::uint64_t seed) {
  cfg.validate();
  // One stream per component so enabling a modality never shifts the
  // initial values of the others.
  ModelParams<T> p;
  Rng text_rng = Rng::derive(seed, 1);
  p.text_attention =
      attention::GatedAttentionParams<T>::init(cfg.d_text, cfg.d_g, text_rng);
  p.text_projection =
      nn::DenseLayer<T>::xavier(cfg.d_text, cfg.text_proj, text_rng);
  if (cfg.modalities.image) {
    Rng image_rng = Rng::derive(seed, 2);
    p.image_attention = attention::GatedAttentionParams<T>::init(
        cfg.d_image, cfg.d_g, image_rng);
    p.image_projection =
        nn::DenseLayer<T>::xavier(cfg.d_image, cfg.image_proj, image_rng);
  }
  if (cfg.modalities.acoustic) {
    Rng acoustic_rng = Rng::derive(seed, 3);
    p.acoustic_projection = nn::DenseLayer<T>::xavier(
        cfg.acoustic_in, cfg.acoustic_proj, acoustic_rng);
  }
  Rng head_rng = Rng::derive(seed, 4);
  p.head_hidden =
      nn::DenseLayer<T>::xavier(cfg.fused_size(), cfg.head_hidden, head_rng);
  p.head_output =
      nn::DenseLayer<T>::xavier(cfg.head_hidden, cfg.n_classes, head_rng);
  return MultimodalModel(cfg, std::move(p));
}

template <typename T>
nn::ParameterList<T> MultimodalModel<T>::parameters() const {
  nn::ParameterList<T> out;
  params_.text_attention.append_parameters("text.attention", out);
  params_.text_projection.append_parameters("text.projection", out);
  if (params_.image_attention) {
    params_.image_attention->append_parameters("image.attention", out);
  }
  if (params_.image_projection) {
    params_.image_projection->append_parameters("image.projection", out);
  }
  if (params_.acoustic_projection) {
    params_.acoustic_projection->append_parameters("acoustic.projection", out);
  }
  params_.head_hidden.append_parameters("head.hidden", out);
  params_.head_output.append_parameters("head.output", out);
  return out;
}

template <typename T>
std::size_t MultimodalModel<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.tensor.numel();
  return n;
}

template <typename T>
ModelOutput<T> MultimodalModel<T>::forward(BasicTape<T>& tape,
                                           const SubjectSample& sample,
                                           bool training, Rng& rng) const {
  validate_sample(config_, sample);
  ModelOutput<T> out;
  fusion::BranchVectors<T> branches;
  out.z_t = text_branch(tape, config_, params_, as<T>(sample.text_embeddings));
  branches.z_t = out.z_t;
  if (config_.modalities.image) {
    out.z_v = image_branch(tape, config_, params_,
                           as<T>(*sample.image_embeddings));
    branches.z_v = out.z_v;
  }
  if (config_.modalities.acoustic) {
    out.z_a = acoustic_branch(tape, config_, params_,
                              as<T>(*sample.acoustic_features));
    branches.z_a = out.z_a;
  }
  out.fused = fusion::tensor_fusion(tape, branches);
  out.logits = head_forward(tape, config_, params_, out.fused, training, rng);
  return out;
}

template <typename T>
BasicTensor<T> MultimodalModel<T>::logits(const SubjectSample& sample) const {
  auto tape = BasicTape<T>::disabled();
  Rng unused(0);
  return forward(tape, sample, false, unused).logits;
}

template <typename T>
int MultimodalModel<T>::predict(const SubjectSample& sample) const {
  return predict_class(logits(sample));
}

template <typename T>
std::vector<std::vector<T>> MultimodalModel<T>::snapshot() const {
  std::vector<std::vector<T>> out;
  for (const auto& p : parameters()) out.push_back(p.tensor.values());
  return out;
}

template <typename T>
void MultimodalModel<T>::restore(const std::vector<std::vector<T>>& values) {
  auto params = parameters();
  if (values.size() != params.size()) {
    throw ShapeError("restore: expected " + std::to_string(params.size()) +
                     " tensors, got " + std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto dst = params[i].tensor.mutable_data();
    if (values[i].size() != dst.size()) {
      throw ShapeError("restore: size mismatch for " + params[i].name);
    }
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

template <typename T>
MultimodalModel<T> MultimodalModel<T>::clone() const {
  return cast<T>();
}

template <typename T>
template <typename U>
MultimodalModel<U> MultimodalModel<T>::cast() const {
  ModelParams<U> p;
  p.text_attention = cast_attention<U>(params_.text_attention);
  p.text_projection = cast_layer<U>(params_.text_projection);
  if (params_.image_attention) {
    p.image_attention = cast_attention<U>(*params_.image_attention);
  }
  if (params_.image_projection) {
    p.image_projection = cast_layer<U>(*params_.image_projection);
  }
  if (params_.acoustic_projection) {
    p.acoustic_projection = cast_layer<U>(*params_.acoustic_projection);
  }
  p.head_hidden = cast_layer<U>(params_.head_hidden);
  p.head_output = cast_layer<U>(params_.head_output);
  return MultimodalModel<U>(config_, std::move(p));
}

#define ADFUSION_INSTANTIATE_MODEL(T)                                        \
  template BasicTensor<T> text_branch(BasicTape<T>&, const ModelConfig&,     \
                                      const ModelParams<T>&,                 \
                                      const BasicTensor<T>&);                \
  template BasicTensor<T> image_branch(BasicTape<T>&, const ModelConfig&,    \
                                       const ModelParams<T>&,                \
                                       const BasicTensor<T>&);               \
  template BasicTensor<T> acoustic_branch(BasicTape<T>&, const ModelConfig&, \
                                          const ModelParams<T>&,             \
                                          const BasicTensor<T>&);            \
  template BasicTensor<T> head_forward(                                      \
      BasicTape<T>&, const ModelConfig&, const ModelParams<T>&,              \
      const fusion::FusedTensor<T>&, bool, Rng&);                            \
  template int predict_class(const BasicTensor<T>&);                         \
  template class MultimodalModel<T>;

ADFUSION_INSTANTIATE_MODEL(float)
ADFUSION_INSTANTIATE_MODEL(double)

#undef ADFUSION_INSTANTIATE_MODEL

template MultimodalModel<double> MultimodalModel<float>::cast<double>() const;
template MultimodalModel<float> MultimodalModel<double>::cast<float>() const;
template MultimodalModel<float> MultimodalModel<float>::cast<float>() const;
template MultimodalModel<double> MultimodalModel<double>::cast<double>() const;

}  // namespace adfusion::model
