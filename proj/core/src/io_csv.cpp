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

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "adfusion/error.hpp"
#include "adfusion/io.hpp"
#include "adfusion/toy_backbone.hpp"

namespace adfusion::io {
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_csv_line(std::string line, const fs::path& path,
                                        std::size_t line_no) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.find('"') != std::string::npos) {
    throw FormatError(path.string() + ":" + std::to_string(line_no) +
                      ": quoted CSV fields are not supported");
  }
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

float parse_float(const std::string& cell, const fs::path& path,
                  std::size_t line_no, std::size_t column) {
  float value = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw FormatError(path.string() + ":" + std::to_string(line_no) +
                      ": column " + std::to_string(column + 1) +
                      " is not numeric: '" + cell + "'");
  }
  return value;
}

std::ifstream open_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

fs::path resolve(const fs::path& base, const std::string& cell) {
  if (cell.empty()) return {};
  fs::path p(cell);
  return p.is_absolute() ? p : base / p;
}

}  // namespace

AcousticTable read_acoustic_csv(const fs::path& path, std::size_t features) {
  auto in = open_text(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError(path.string() + ": empty acoustic feature file");
  }
  const std::size_t expected = features + 1;
  const auto header = split_csv_line(line, path, 1);
  if (header.size() != expected) {
    throw FormatError(path.string() + ":1: expected an id column plus " +
                      std::to_string(features) + " feature columns, got " +
                      std::to_string(header.size() - 1));
  }
  AcousticTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line, path, line_no);
    if (cells.size() != expected) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": expected " + std::to_string(features) +
                        " feature columns, got " +
                        std::to_string(cells.size() - 1));
    }
    if (cells[0].empty()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": empty subject id");
    }
    std::vector<float> values(features);
    for (std::size_t c = 0; c < features; ++c) {
      values[c] = parse_float(cells[c + 1], path, line_no, c + 1);
    }
    if (!table.emplace(cells[0], Tensor({features}, std::move(values))).second) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": duplicate subject id '" + cells[0] + "'");
    }
  }
  return table;
}

void write_acoustic_csv(const fs::path& path, const AcousticTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  std::size_t width = table.empty() ? kAcousticFeatures
                                    : table.begin()->second.numel();
  out << "subject_id";
  for (std::size_t c = 0; c < width; ++c) out << ",f" << (c + 1);
  out << '\n';
  char buf[32];
  for (const auto& [id, vec] : table) {
    if (vec.numel() != width) {
      throw ShapeError("acoustic rows must all have " + std::to_string(width) +
                       " features");
    }
    out << id;
    for (float v : vec.data()) {
      std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
      out << ',' << buf;
    }
    out << '\n';
  }
}

std::string label_name(int label) { return label == 1 ? "AD" : "nonAD"; }

Manifest read_manifest(const fs::path& path) {
  auto in = open_text(path);
  Manifest manifest;
  manifest.base_dir = path.parent_path();
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError(path.string() + ": empty manifest");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader) {
    throw FormatError(path.string() + ":1: expected header '" +
                      std::string(kManifestHeader) + "'");
  }
  std::set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line, path, line_no);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (cells.size() != 6) {
      throw FormatError(where + ": expected 6 columns, got " +
                        std::to_string(cells.size()));
    }
    ManifestRecord rec;
    rec.line = line_no;
    rec.subject_id = cells[0];
    if (rec.subject_id.empty()) throw FormatError(where + ": empty subject_id");
    if (cells[1] == "AD") {
      rec.label = 1;
    } else if (cells[1] == "nonAD") {
      rec.label = 0;
    } else {
      throw FormatError(where + ": label must be AD or nonAD, got '" +
                        cells[1] + "'");
    }
    rec.text_emb = resolve(manifest.base_dir, cells[2]);
    rec.image_emb = resolve(manifest.base_dir, cells[3]);
    if (!cells[4].empty()) {
      const auto hash = cells[4].find('#');
      rec.acoustic_csv = resolve(manifest.base_dir, cells[4].substr(0, hash));
      rec.acoustic_key = hash == std::string::npos ? rec.subject_id
                                                   : cells[4].substr(hash + 1);
    }
    if (cells[5] == "train") {
      rec.split = SplitTag::kTrain;
    } else if (cells[5] == "test") {
      rec.split = SplitTag::kTest;
    } else {
      throw FormatError(where + ": split must be train or test, got '" +
                        cells[5] + "'");
    }
    if (!seen.insert(rec.subject_id).second) {
      throw FormatError(where + ": duplicate subject_id '" + rec.subject_id +
                        "'");
    }
    manifest.records.push_back(std::move(rec));
  }

  std::ostringstream missing;
  for (const auto& rec : manifest.records) {
    for (const auto* p : {&rec.text_emb, &rec.image_emb, &rec.acoustic_csv}) {
      if (!p->empty() && !fs::exists(*p)) {
        missing << "\n  " << rec.subject_id << ": " << p->string();
      }
    }
  }
  if (!missing.str().empty()) {
    throw FormatError(path.string() + ": referenced files do not exist:" +
                      missing.str());
  }
  return manifest;
}

void write_manifest(const fs::path& path,
                    const std::vector<ManifestRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << kManifestHeader << '\n';
  for (const auto& r : records) {
    out << r.subject_id << ',' << label_name(r.label) << ','
        << r.text_emb.generic_string() << ',' << r.image_emb.generic_string()
        << ',';
    if (!r.acoustic_csv.empty()) {
      out << r.acoustic_csv.generic_string();
      if (r.acoustic_key != r.subject_id) out << '#' << r.acoustic_key;
    }
    out << ',' << (r.split == SplitTag::kTrain ? "train" : "test") << '\n';
  }
}

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Tensor load_text(const ManifestRecord& rec, const ToyBackboneOptions& toy) {
  if (rec.text_emb.extension() == ".txt") {
    if (!toy.enabled) {
      throw ConfigError("subject '" + rec.subject_id +
                        "': text_emb is a transcript; export embeddings or "
                        "enable the toy backbone");
    }
    return model::toy_backbone(model::BackboneKind::kText, slurp(rec.text_emb),
                               toy.seed, toy.text_rows, toy.d_text);
  }
  return read_tensor(rec.text_emb);
}

Tensor load_image(const ManifestRecord& rec, const ToyBackboneOptions& toy) {
  Tensor t = read_tensor(rec.image_emb);
  if (t.rank() == 3) {
    if (!toy.enabled) {
      throw ConfigError("subject '" + rec.subject_id +
                        "': image_emb is a spectrogram image; export "
                        "embeddings or enable the toy backbone");
    }
    const auto values = t.data();
    return model::toy_backbone(
        model::BackboneKind::kImage,
        std::as_bytes(std::span<const float>(values.data(), values.size())),
        toy.seed, toy.image_rows, toy.d_image);
  }
  return t;
}

}  // namespace

std::vector<model::SubjectSample> load_dataset(
    const Manifest& manifest, SplitTag split,
    const model::ModalitySet& modalities, const ToyBackboneOptions& toy) {
  std::map<fs::path, AcousticTable> tables;
  std::vector<model::SubjectSample> out;
  for (const auto& rec : manifest.records) {
    if (rec.split != split) continue;
    const std::string where = "subject '" + rec.subject_id + "' (line " +
                              std::to_string(rec.line) + ")";
    model::SubjectSample s;
    s.subject_id = rec.subject_id;
    s.label = rec.label;
    if (rec.text_emb.empty()) throw FormatError(where + ": no text_emb");
    s.text_embeddings = load_text(rec, toy);
    if (modalities.image) {
      if (rec.image_emb.empty()) throw FormatError(where + ": no image_emb");
      s.image_embeddings = load_image(rec, toy);
    }
    if (modalities.acoustic) {
      if (rec.acoustic_csv.empty()) {
        throw FormatError(where + ": no acoustic_row");
      }
      auto it = tables.find(rec.acoustic_csv);
      if (it == tables.end()) {
        it = tables.emplace(rec.acoustic_csv, read_acoustic_csv(rec.acoustic_csv))
                 .first;
      }
      const auto row = it->second.find(rec.acoustic_key);
      if (row == it->second.end()) {
        throw FormatError(where + ": id '" + rec.acoustic_key +
                          "' missing from " + rec.acoustic_csv.string());
      }
      s.acoustic_features = row->second;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace adfusion::io
