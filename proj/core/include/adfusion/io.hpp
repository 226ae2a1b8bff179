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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "adfusion/model.hpp"
#include "adfusion/tensor.hpp"

namespace adfusion::io {

// ---------------------------------------------------------------------------
// Tensor container
//
//   offset  size        field
//   0       4           magic "TNS1"
//   4       1           dtype (0 = f32, 1 = f64)
//   5       1           ndim
//   6       4 * ndim    dims, u32 little-endian
//   ...     numel * sz  payload, row-major, little-endian IEEE-754
// ---------------------------------------------------------------------------

enum class DType : std::uint8_t { kF32 = 0, kF64 = 1 };

using AnyTensor = std::variant<Tensor, Tensor64>;

void write_tensor(std::ostream& out, const Tensor& t);
void write_tensor(std::ostream& out, const Tensor64& t);
void write_tensor(const std::filesystem::path& path, const Tensor& t);
void write_tensor(const std::filesystem::path& path, const Tensor64& t);

/// Throws FormatError on bad magic, unknown dtype, or truncation.
AnyTensor read_tensor_any(std::istream& in);
AnyTensor read_tensor_any(const std::filesystem::path& path);

/// Reads either dtype and converts to f32.
Tensor read_tensor(const std::filesystem::path& path);

std::size_t container_size(const Shape& shape, DType dtype);

// ---------------------------------------------------------------------------
// Acoustic feature CSV: header row, then `id,f1,...,f88` per subject.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kAcousticFeatures = 88;

using AcousticTable = std::map<std::string, Tensor>;

/// Throws FormatError on a wrong column count (citing the expected count),
/// non-numeric cells, or duplicate ids.
AcousticTable read_acoustic_csv(const std::filesystem::path& path,
                                std::size_t features = kAcousticFeatures);
void write_acoustic_csv(const std::filesystem::path& path,
                        const AcousticTable& table);

// ---------------------------------------------------------------------------
// Manifest: UTF-8 CSV with header
//   subject_id,label,text_emb,image_emb,acoustic_row,split
// label is AD or nonAD, split is train or test. acoustic_row is
// `file.csv` (row keyed by subject_id) or `file.csv#row_id`. Relative paths
// resolve against the manifest's directory; empty cells mean "not present".
// ---------------------------------------------------------------------------

inline constexpr const char* kManifestHeader =
    "subject_id,label,text_emb,image_emb,acoustic_row,split";

enum class SplitTag { kTrain, kTest };

struct ManifestRecord {
  std::string subject_id;
  int label = 0;  // AD = 1, nonAD = 0
  std::filesystem::path text_emb;
  std::filesystem::path image_emb;
  std::filesystem::path acoustic_csv;
  std::string acoustic_key;
  SplitTag split = SplitTag::kTrain;
  std::size_t line = 0;
};

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestRecord> records;
};

/// Parses and validates. Throws FormatError naming the line for malformed
/// rows or bad labels, naming the id for duplicates, and listing subject ids
/// whose referenced files do not exist.
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestRecord>& records);

std::string label_name(int label);

/// Stand-in encoders for inputs that are not yet embeddings: a `.txt`
/// transcript in text_emb, or a rank-3 spectrogram image in image_emb.
struct ToyBackboneOptions {
  bool enabled = false;
  std::uint64_t seed = 0;
  std::size_t text_rows = 16;
  std::size_t image_rows = 49;
  std::size_t d_text = 768;
  std::size_t d_image = 768;
};

/// Materialises the manifest records of one split into model samples,
/// loading only the modalities in `modalities`.
std::vector<model::SubjectSample> load_dataset(
    const Manifest& manifest, SplitTag split,
    const model::ModalitySet& modalities,
    const ToyBackboneOptions& toy = {});

// ---------------------------------------------------------------------------
// Model checkpoint
//
//   "TFM1", u32 LE length + JSON config block, u32 LE parameter count, then
//   per parameter: u32 LE name length, name bytes, tensor container (f32).
// ---------------------------------------------------------------------------

void write_checkpoint(const std::filesystem::path& path,
                      const model::MultimodalModel<float>& model);
model::MultimodalModel<float> read_checkpoint(
    const std::filesystem::path& path);

std::string config_to_json(const model::ModelConfig& cfg);
model::ModelConfig config_from_json(const std::string& json);

}  // namespace adfusion::io
