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

#include "adfusion/synthetic.hpp"

#include <cstdio>

#include "adfusion/error.hpp"
#include "adfusion/io.hpp"
#include "adfusion/rng.hpp"

namespace adfusion::synthetic {
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kTrainStream = 21;
constexpr std::uint64_t kTestStream = 22;

Tensor noisy_sequence(Rng& rng, std::size_t rows, std::size_t width,
                      double noise, double signal) {
  std::vector<float> v(rows * width);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c + 1 < width; ++c) {
      v[r * width + c] = static_cast<float>(rng.uniform(-noise, noise));
    }
    v[r * width + width - 1] = static_cast<float>(signal);
  }
  return Tensor({rows, width}, std::move(v));
}

std::vector<model::SubjectSample> make_split(const SyntheticOptions& o,
                                             std::size_t count,
                                             std::uint64_t stream,
                                             const char* prefix) {
  Rng rng = Rng::derive(o.seed, stream);
  auto magnitude = [&] { return rng.uniform(o.signal_min, o.signal_max); };
  auto sign = [&] { return rng.bernoulli(0.5) ? 1.0 : -1.0; };

  std::vector<model::SubjectSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    model::SubjectSample s;
    char id[32];
    std::snprintf(id, sizeof id, "%s%04zu", prefix, i);
    s.subject_id = id;
    s.label = static_cast<int>(i % 2);
    const double st = sign();
    const double sv = sign();
    const double sa = s.label == 1 ? st * sv : -st * sv;

    s.text_embeddings =
        noisy_sequence(rng, o.text_rows, o.d_text, o.noise, st * magnitude());
    s.image_embeddings =
        noisy_sequence(rng, o.image_rows, o.d_image, o.noise, sv * magnitude());
    std::vector<float> f(o.acoustic_features);
    f[0] = static_cast<float>(sa * magnitude());
    for (std::size_t c = 1; c < f.size(); ++c) {
      f[c] = static_cast<float>(rng.uniform(-o.noise, o.noise));
    }
    s.acoustic_features = Tensor({o.acoustic_features}, std::move(f));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

void SyntheticOptions::validate() const {
  if (subjects < 4) throw ConfigError("synthetic set needs at least 4 subjects");
  if (text_rows == 0 || image_rows == 0) {
    throw ConfigError("sequence lengths must be positive");
  }
  if (d_text == 0 || d_image == 0 || acoustic_features == 0) {
    throw ConfigError("feature widths must be positive");
  }
  if (!(signal_min > 0 && signal_max >= signal_min)) {
    throw ConfigError("need 0 < signal_min <= signal_max");
  }
  if (noise < 0) throw ConfigError("noise must be non-negative");
}

SyntheticDataset generate(const SyntheticOptions& opts) {
  opts.validate();
  SyntheticDataset d;
  d.train = make_split(opts, opts.subjects, kTrainStream, "S");
  d.test = make_split(opts, opts.test_subjects, kTestStream, "T");
  return d;
}

fs::path write_dataset(const SyntheticDataset& data, const fs::path& dir) {
  fs::create_directories(dir / "emb");
  io::AcousticTable acoustic;
  std::vector<io::ManifestRecord> records;
  auto add = [&](const model::SubjectSample& s, io::SplitTag split) {
    io::ManifestRecord r;
    r.subject_id = s.subject_id;
    r.label = s.label;
    r.split = split;
    r.text_emb = fs::path("emb") / (s.subject_id + ".text.tns");
    io::write_tensor(dir / r.text_emb, s.text_embeddings);
    if (s.image_embeddings) {
      r.image_emb = fs::path("emb") / (s.subject_id + ".image.tns");
      io::write_tensor(dir / r.image_emb, *s.image_embeddings);
    }
    if (s.acoustic_features) {
      r.acoustic_csv = "acoustic.csv";
      r.acoustic_key = s.subject_id;
      acoustic.emplace(s.subject_id, *s.acoustic_features);
    }
    records.push_back(std::move(r));
  };
  for (const auto& s : data.train) add(s, io::SplitTag::kTrain);
  for (const auto& s : data.test) add(s, io::SplitTag::kTest);
  io::write_acoustic_csv(dir / "acoustic.csv", acoustic);
  const auto manifest = dir / "manifest.csv";
  io::write_manifest(manifest, records);
  return manifest;
}

}  // namespace adfusion::synthetic
