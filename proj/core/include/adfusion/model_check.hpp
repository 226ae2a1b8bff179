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

#include "adfusion/grad_check.hpp"
#include "adfusion/model.hpp"

namespace adfusion::model {

/// Joint finite-difference check of every parameter of a freshly
/// initialised model, in f64 with dropout off. The subject is random with
/// `text_rows` tokens and `image_rows` patches; the loss is cross-entropy
/// against label 1.
GradCheckResult check_model_gradients(const ModelConfig& cfg,
                                      std::uint64_t seed,
                                      std::size_t text_rows = 3,
                                      std::size_t image_rows = 4,
                                      double eps = 1e-5);

/// Random subject matching `cfg`, entries uniform in [-1, 1).
SubjectSample random_sample(const ModelConfig& cfg, std::uint64_t seed,
                            std::size_t text_rows, std::size_t image_rows,
                            int label = 1);

}  // namespace adfusion::model
