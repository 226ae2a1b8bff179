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
#include <filesystem>
#include <vector>

#include "adfusion/model.hpp"

namespace adfusion::synthetic {

/// A dataset whose label is the sign of a product of one feature from each
/// modality: label = 1 iff s_text * s_image * s_acoustic > 0. Every single
/// modality and every pair of modalities is independent of the label, so
/// only the three-way fusion terms carry signal.
///
/// The signal sits in the last embedding column of every text token and
/// image patch and in acoustic feature 0, with magnitude in
/// [signal_min, signal_max]. All other entries are uniform noise in
/// [-noise, noise]. Classes are exactly balanced.
struct SyntheticOptions {
  std::size_t subjects = 200;
  std::size_t test_subjects = 100;
  std::uint64_t seed = 0;
  std::size_t text_rows = 3;
  std::size_t image_rows = 4;
  std::size_t d_text = 6;
  std::size_t d_image = 5;
  std::size_t acoustic_features = 88;
  double signal_min = 0.5;
  double signal_max = 1.5;
  double noise = 0.1;

  void validate() const;
};

struct SyntheticDataset {
  std::vector<model::SubjectSample> train;
  std::vector<model::SubjectSample> test;
};

SyntheticDataset generate(const SyntheticOptions& opts);

/// Writes `dir/manifest.csv`, one tensor container per subject and
/// modality under `dir/emb/`, and `dir/acoustic.csv`. Returns the manifest
/// path.
std::filesystem::path write_dataset(const SyntheticDataset& data,
                                    const std::filesystem::path& dir);

}  // namespace adfusion::synthetic
