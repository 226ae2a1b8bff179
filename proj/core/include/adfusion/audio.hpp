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
#include <string>
#include <vector>

#include "adfusion/tensor.hpp"

namespace adfusion::audio {

struct AudioClip {
  std::vector<float> samples;  // mono, in [-1, 1]
  std::uint32_t sample_rate = 0;
};

/// RIFF/WAVE, 16-bit PCM, any channel count (averaged to mono), any sample
/// rate. Throws FormatError for unreadable, corrupt or unsupported files.
AudioClip read_wav(const std::filesystem::path& path);
/// Writes 16-bit PCM mono.
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

struct FrontendConfig {
  std::size_t n_mels = 224;
  std::size_t hop_length = 1024;
  std::size_t n_fft = 2048;
  double fmin = 0.0;
  double fmax = 0.0;  // 0 means sample_rate / 2
  std::size_t delta_width = 9;
  double top_db = 80.0;
  std::size_t target_height = 224;
  std::size_t target_width = 224;

  /// Throws ConfigError if the configuration is unusable at `sample_rate`.
  void validate(std::uint32_t sample_rate) const;
  double effective_fmax(std::uint32_t sample_rate) const {
    return fmax > 0.0 ? fmax : sample_rate / 2.0;
  }
  /// Stable hex digest of every field, recorded in feature sidecars.
  std::string hash() const;
};

/// Slaney mel scale: linear below 1 kHz, logarithmic above.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Centre frequencies (Hz) of the `n_mels` triangular filters.
std::vector<double> mel_center_frequencies(std::size_t n_mels, double fmin,
                                           double fmax);

/// [n_mels x (n_fft/2 + 1)] triangular filters with Slaney area
/// normalisation.
Tensor64 mel_filterbank(std::uint32_t sample_rate, std::size_t n_fft,
                        std::size_t n_mels, double fmin, double fmax);

/// Power spectrogram [(n_fft/2 + 1) x frames] of a centred, reflect-padded,
/// periodic-Hann-windowed STFT; frames = 1 + len / hop.
Tensor64 stft_power(const AudioClip& clip, std::size_t n_fft,
                    std::size_t hop_length);

/// Log-Mel spectrogram in dB relative to its maximum, floored at -top_db.
/// An all-zero input sits entirely at the floor. Throws ConfigError when
/// the clip is shorter than n_fft.
Tensor stft_log_mel(const AudioClip& clip, const FrontendConfig& cfg);

/// Least-squares slope over a centred window of `width` frames with edge
/// replication: sum_n n (x[t+n] - x[t-n]) / (2 sum_n n^2). Throws
/// ConfigError for even width or width < 3.
Tensor delta(const Tensor& m, std::size_t width);

/// Half-pixel-centre bilinear resize of a [h x w] channel. A same-size
/// resize returns an identical copy.
Tensor resize_bilinear(const Tensor& channel, std::size_t height,
                       std::size_t width);

/// [3 x H x W]: log-Mel (dB), delta, delta-delta.
struct SpectrogramImage {
  Tensor channels;
  std::uint32_t sample_rate = 0;
  std::size_t frames = 0;
};

SpectrogramImage build_spectrogram_image(const AudioClip& clip,
                                         const FrontendConfig& cfg);
SpectrogramImage build_spectrogram_image(const std::filesystem::path& wav,
                                         const FrontendConfig& cfg);

/// Per-channel min-max to [0, 1], then (x - 0.5) / 0.5. Constant channels
/// map to min-max value 0.
Tensor normalize_for_backbone(const Tensor& image);

}  // namespace adfusion::audio
