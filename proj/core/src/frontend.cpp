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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <sstream>

#include <fftw3.h>

#include "adfusion/audio.hpp"
#include "adfusion/error.hpp"

namespace adfusion::audio {
namespace {

constexpr double kSlaneyLinearStep = 200.0 / 3.0;  // Hz per mel below 1 kHz
constexpr double kSlaneyLogStartHz = 1000.0;
constexpr double kSlaneyLogStartMel = kSlaneyLogStartHz / kSlaneyLinearStep;
const double kSlaneyLogStep = std::log(6.4) / 27.0;

constexpr double kPowerFloor = 1e-10;

// The FFTW planner is not thread-safe; execution of an existing plan is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  /// Power |X_k|^2 for k = 0..n/2.
  void power(std::vector<double>& out) {
    fftw_execute(plan_);
    out.resize(n_ / 2 + 1);
    for (std::size_t k = 0; k <= n_ / 2; ++k) {
      out[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }
  }

 private:
  std::size_t n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

std::size_t reflect_index(std::ptrdiff_t i, std::size_t len) {
  const auto n = static_cast<std::ptrdiff_t>(len);
  if (i < 0) i = -i;
  if (i >= n) i = 2 * (n - 1) - i;
  return static_cast<std::size_t>(i);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

void FrontendConfig::validate(std::uint32_t sample_rate) const {
  if (sample_rate == 0) throw ConfigError("sample rate must be positive");
  if (n_mels == 0) throw ConfigError("n_mels must be positive");
  if (hop_length == 0) throw ConfigError("hop length must be positive");
  if (n_fft < hop_length) {
    throw ConfigError("n_fft (" + std::to_string(n_fft) +
                      ") must be at least the hop length (" +
                      std::to_string(hop_length) + ")");
  }
  if (delta_width < 3 || delta_width % 2 == 0) {
    throw ConfigError("delta width must be odd and >= 3, got " +
                      std::to_string(delta_width));
  }
  const double hi = effective_fmax(sample_rate);
  if (fmin < 0 || hi <= fmin || hi > sample_rate / 2.0) {
    throw ConfigError("need 0 <= fmin < fmax <= sample_rate / 2");
  }
  if (!(top_db > 0)) throw ConfigError("top_db must be positive");
  if (target_height == 0 || target_width == 0) {
    throw ConfigError("target size must be positive");
  }
}

std::string FrontendConfig::hash() const {
  std::ostringstream os;
  os << "n_mels=" << n_mels << ";hop=" << hop_length << ";n_fft=" << n_fft
     << ";fmin=" << fmin << ";fmax=" << fmax << ";delta=" << delta_width
     << ";top_db=" << top_db << ";size=" << target_height << "x"
     << target_width << ";window=hann;mel=slaney;resize=bilinear";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : os.str()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

double hz_to_mel(double hz) {
  if (hz < kSlaneyLogStartHz) return hz / kSlaneyLinearStep;
  return kSlaneyLogStartMel + std::log(hz / kSlaneyLogStartHz) / kSlaneyLogStep;
}

double mel_to_hz(double mel) {
  if (mel < kSlaneyLogStartMel) return mel * kSlaneyLinearStep;
  return kSlaneyLogStartHz * std::exp(kSlaneyLogStep * (mel - kSlaneyLogStartMel));
}

namespace {

// n_mels + 2 band edges, equally spaced on the mel scale.
std::vector<double> mel_edges(std::size_t n_mels, double fmin, double fmax) {
  const double lo = hz_to_mel(fmin), hi = hz_to_mel(fmax);
  const std::size_t n = n_mels + 2;
  std::vector<double> hz(n);
  for (std::size_t i = 0; i < n; ++i) {
    hz[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) /
                               static_cast<double>(n - 1));
  }
  return hz;
}

}  // namespace

std::vector<double> mel_center_frequencies(std::size_t n_mels, double fmin,
                                           double fmax) {
  auto edges = mel_edges(n_mels, fmin, fmax);
  return {edges.begin() + 1, edges.end() - 1};
}

Tensor64 mel_filterbank(std::uint32_t sample_rate, std::size_t n_fft,
                        std::size_t n_mels, double fmin, double fmax) {
  const std::size_t bins = n_fft / 2 + 1;
  const auto edges = mel_edges(n_mels, fmin, fmax);
  std::vector<double> w(n_mels * bins, 0.0);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double left = edges[m], centre = edges[m + 1], right = edges[m + 2];
    const double norm = 2.0 / (right - left);
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate /
                       static_cast<double>(n_fft);
      const double rise = (f - left) / (centre - left);
      const double fall = (right - f) / (right - centre);
      w[m * bins + k] = std::max(0.0, std::min(rise, fall)) * norm;
    }
  }
  return Tensor64({n_mels, bins}, std::move(w));
}

Tensor64 stft_power(const AudioClip& clip, std::size_t n_fft,
                    std::size_t hop_length) {
  const std::size_t len = clip.samples.size();
  if (len < n_fft) {
    throw ConfigError("clip of " + std::to_string(len) +
                      " samples is shorter than one window (" +
                      std::to_string(n_fft) + ")");
  }
  const std::size_t frames = 1 + len / hop_length;
  const std::size_t bins = n_fft / 2 + 1;
  const auto pad = static_cast<std::ptrdiff_t>(n_fft / 2);

  std::vector<double> window(n_fft);
  for (std::size_t i = 0; i < n_fft; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i /
                                     static_cast<double>(n_fft));
  }

  RealFft fft(n_fft);
  std::vector<double> spectrum;
  std::vector<double> out(bins * frames);
  for (std::size_t t = 0; t < frames; ++t) {
    const auto start = static_cast<std::ptrdiff_t>(t * hop_length) - pad;
    double* in = fft.input();
    for (std::size_t i = 0; i < n_fft; ++i) {
      const auto src = reflect_index(start + static_cast<std::ptrdiff_t>(i), len);
      in[i] = clip.samples[src] * window[i];
    }
    fft.power(spectrum);
    for (std::size_t k = 0; k < bins; ++k) out[k * frames + t] = spectrum[k];
  }
  return Tensor64({bins, frames}, std::move(out));
}

Tensor stft_log_mel(const AudioClip& clip, const FrontendConfig& cfg) {
  cfg.validate(clip.sample_rate);
  const auto power = stft_power(clip, cfg.n_fft, cfg.hop_length);
  const auto fb = mel_filterbank(clip.sample_rate, cfg.n_fft, cfg.n_mels,
                                 cfg.fmin, cfg.effective_fmax(clip.sample_rate));
  const std::size_t bins = power.dim(0), frames = power.dim(1);
  const std::size_t n_mels = cfg.n_mels;

  std::vector<double> mel(n_mels * frames, 0.0);
  const auto p = power.data();
  const auto w = fb.data();
  for (std::size_t m = 0; m < n_mels; ++m) {
    for (std::size_t k = 0; k < bins; ++k) {
      const double wk = w[m * bins + k];
      if (wk == 0.0) continue;
      for (std::size_t t = 0; t < frames; ++t) {
        mel[m * frames + t] += wk * p[k * frames + t];
      }
    }
  }

  const double peak = *std::max_element(mel.begin(), mel.end());
  std::vector<float> db(mel.size());
  if (peak <= kPowerFloor) {
    std::fill(db.begin(), db.end(), static_cast<float>(-cfg.top_db));
  } else {
    const double ref_db = 10.0 * std::log10(peak);
    for (std::size_t i = 0; i < mel.size(); ++i) {
      const double v = 10.0 * std::log10(std::max(kPowerFloor, mel[i])) - ref_db;
      db[i] = static_cast<float>(std::max(v, -cfg.top_db));
    }
  }
  return Tensor({n_mels, frames}, std::move(db));
}

Tensor delta(const Tensor& m, std::size_t width) {
  if (width < 3 || width % 2 == 0) {
    throw ConfigError("delta width must be odd and >= 3, got " +
                      std::to_string(width));
  }
  if (m.rank() != 2) throw ShapeError("delta expects [bands x frames]");
  const std::size_t bands = m.dim(0), frames = m.dim(1);
  const auto half = static_cast<std::ptrdiff_t>(width / 2);
  double denom = 0;
  for (std::ptrdiff_t n = 1; n <= half; ++n) denom += 2.0 * n * n;

  const auto x = m.data();
  std::vector<float> out(bands * frames);
  const auto last = static_cast<std::ptrdiff_t>(frames) - 1;
  for (std::size_t b = 0; b < bands; ++b) {
    const float* row = &x[b * frames];
    for (std::ptrdiff_t t = 0; t <= last; ++t) {
      double acc = 0;
      for (std::ptrdiff_t n = 1; n <= half; ++n) {
        const double ahead = row[std::min(t + n, last)];
        const double behind = row[std::max<std::ptrdiff_t>(t - n, 0)];
        acc += static_cast<double>(n) * (ahead - behind);
      }
      out[b * frames + static_cast<std::size_t>(t)] =
          static_cast<float>(acc / denom);
    }
  }
  return Tensor(m.shape(), std::move(out));
}

Tensor resize_bilinear(const Tensor& channel, std::size_t height,
                       std::size_t width) {
  if (channel.rank() != 2 || channel.numel() == 0) {
    throw ShapeError("resize expects a non-empty [h x w] channel, got " +
                     shape_str(channel.shape()));
  }
  if (height == 0 || width == 0) throw ShapeError("resize to an empty target");
  const std::size_t in_h = channel.dim(0), in_w = channel.dim(1);
  if (in_h == height && in_w == width) return channel.clone();

  struct Tap {
    std::size_t lo, hi;
    double frac;
  };
  auto taps = [](std::size_t in, std::size_t out) {
    std::vector<Tap> t(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t i = 0; i < out; ++i) {
      double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in - 1));
      const auto lo = static_cast<std::size_t>(std::floor(src));
      const std::size_t hi = std::min(lo + 1, in - 1);
      t[i] = {lo, hi, src - static_cast<double>(lo)};
    }
    return t;
  };
  const auto ty = taps(in_h, height);
  const auto tx = taps(in_w, width);
  const auto x = channel.data();
  std::vector<float> out(height * width);
  for (std::size_t i = 0; i < height; ++i) {
    const auto& a = ty[i];
    for (std::size_t j = 0; j < width; ++j) {
      const auto& b = tx[j];
      const double top = x[a.lo * in_w + b.lo] * (1.0 - b.frac) +
                         x[a.lo * in_w + b.hi] * b.frac;
      const double bottom = x[a.hi * in_w + b.lo] * (1.0 - b.frac) +
                            x[a.hi * in_w + b.hi] * b.frac;
      out[i * width + j] = static_cast<float>(top * (1.0 - a.frac) + bottom * a.frac);
    }
  }
  return Tensor({height, width}, std::move(out));
}

SpectrogramImage build_spectrogram_image(const AudioClip& clip,
                                         const FrontendConfig& cfg) {
  const auto log_mel = stft_log_mel(clip, cfg);
  const auto d1 = delta(log_mel, cfg.delta_width);
  const auto d2 = delta(d1, cfg.delta_width);
  const std::size_t h = cfg.target_height, w = cfg.target_width;
  std::vector<float> data;
  data.reserve(3 * h * w);
  for (const Tensor* ch : {&log_mel, &d1, &d2}) {
    const auto r = resize_bilinear(*ch, h, w);
    data.insert(data.end(), r.data().begin(), r.data().end());
  }
  SpectrogramImage image;
  image.channels = Tensor({3, h, w}, std::move(data));
  image.sample_rate = clip.sample_rate;
  image.frames = log_mel.dim(1);
  return image;
}

SpectrogramImage build_spectrogram_image(const std::filesystem::path& wav,
                                         const FrontendConfig& cfg) {
  return build_spectrogram_image(read_wav(wav), cfg);
}

Tensor normalize_for_backbone(const Tensor& image) {
  if (image.rank() != 3) throw ShapeError("expected [C x H x W] image");
  const std::size_t c = image.dim(0), plane = image.dim(1) * image.dim(2);
  const auto x = image.data();
  std::vector<float> out(image.numel());
  for (std::size_t ch = 0; ch < c; ++ch) {
    const float* p = &x[ch * plane];
    const auto [lo, hi] = std::minmax_element(p, p + plane);
    const double range = static_cast<double>(*hi) - *lo;
    for (std::size_t i = 0; i < plane; ++i) {
      const double unit = range > 0 ? (p[i] - *lo) / range : 0.0;
      out[ch * plane + i] = static_cast<float>((unit - 0.5) / 0.5);
    }
  }
  return Tensor(image.shape(), std::move(out));
}

}  // namespace adfusion::audio
