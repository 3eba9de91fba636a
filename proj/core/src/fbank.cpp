// Copyright 2026 The sedkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sedkit/fbank.hpp"

#include <cmath>
#include <numbers>

namespace sedkit {

namespace detail {

void fft_radix2(std::vector<double>& inter, int n) {
  if (n <= 0 || (n & (n - 1)) != 0) {
    throw ContractError("fft: size must be a power of two, got " +
                        std::to_string(n));
  }
  // Bit-reversal permutation.
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j |= bit;
    if (i < j) {
      std::swap(inter[2 * i], inter[2 * j]);
      std::swap(inter[2 * i + 1], inter[2 * j + 1]);
    }
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / len;
    const double wr = std::cos(ang), wi = std::sin(ang);
    for (int i = 0; i < n; i += len) {
      double cr = 1.0, ci = 0.0;
      for (int j = 0; j < len / 2; ++j) {
        const int a = 2 * (i + j);
        const int b = 2 * (i + j + len / 2);
        const double ur = inter[a], ui = inter[a + 1];
        const double vr = inter[b] * cr - inter[b + 1] * ci;
        const double vi = inter[b] * ci + inter[b + 1] * cr;
        inter[a] = ur + vr;
        inter[a + 1] = ui + vi;
        inter[b] = ur - vr;
        inter[b + 1] = ui - vi;
        const double ncr = cr * wr - ci * wi;
        ci = cr * wi + ci * wr;
        cr = ncr;
      }
    }
  }
}

}  // namespace detail

namespace {

double mel_scale(double hz) { return 1127.0 * std::log1p(hz / 700.0); }

void validate(const FbankConfig& cfg) {
  if (cfg.sample_rate <= 0) throw ConfigError("fbank: sample_rate must be > 0");
  if (cfg.frame_length_ms <= 0 || cfg.frame_shift_ms <= 0) {
    throw ConfigError("fbank: frame length and shift must be > 0");
  }
  if (cfg.num_bins < 1) throw ConfigError("fbank: num_bins must be >= 1");
  if (cfg.fft_size <= 0 || (cfg.fft_size & (cfg.fft_size - 1)) != 0) {
    throw ConfigError("fbank: fft_size must be a power of two");
  }
  const int frame_len =
      static_cast<int>(cfg.frame_length_ms * cfg.sample_rate / 1000.0);
  if (frame_len > cfg.fft_size) {
    throw ConfigError("fbank: frame of " + std::to_string(frame_len) +
                      " samples exceeds fft_size " +
                      std::to_string(cfg.fft_size));
  }
  const double nyquist = cfg.sample_rate / 2.0;
  if (!(cfg.low_freq_hz >= 0) || !(cfg.high_freq_hz > cfg.low_freq_hz) ||
      cfg.high_freq_hz > nyquist) {
    throw ConfigError("fbank: need 0 <= low < high <= nyquist");
  }
  if (!(cfg.energy_floor > 0)) {
    throw ConfigError("fbank: energy_floor must be > 0");
  }
}

// Triangular mel filters as (first_bin, weights) pairs over the power
// spectrum bins 0..fft/2.
struct MelBank {
  std::vector<int> first;
  std::vector<std::vector<double>> weights;
};

MelBank build_mel_bank(const FbankConfig& cfg) {
  const int num_fft_bins = cfg.fft_size / 2 + 1;
  const double bin_hz = double(cfg.sample_rate) / cfg.fft_size;
  const double mel_low = mel_scale(cfg.low_freq_hz);
  const double mel_high = mel_scale(cfg.high_freq_hz);
  const double mel_step = (mel_high - mel_low) / (cfg.num_bins + 1);

  MelBank bank;
  bank.first.resize(cfg.num_bins);
  bank.weights.resize(cfg.num_bins);
  for (int m = 0; m < cfg.num_bins; ++m) {
    const double left = mel_low + m * mel_step;
    const double center = left + mel_step;
    const double right = center + mel_step;
    int first = -1;
    std::vector<double> w;
    for (int k = 0; k < num_fft_bins; ++k) {
      const double mel_k = mel_scale(k * bin_hz);
      double weight = 0.0;
      if (mel_k > left && mel_k < right) {
        weight = mel_k <= center ? (mel_k - left) / (center - left)
                                 : (right - mel_k) / (right - center);
      }
      if (weight > 0.0) {
        if (first < 0) first = k;
        w.push_back(weight);
      } else if (first >= 0) {
        break;  // triangles are contiguous in k
      }
    }
    bank.first[m] = first < 0 ? 0 : first;
    bank.weights[m] = std::move(w);
  }
  return bank;
}

}  // namespace

int num_frames_for(int num_samples, const FbankConfig& cfg) {
  const int frame_len =
      static_cast<int>(cfg.frame_length_ms * cfg.sample_rate / 1000.0);
  const int shift =
      static_cast<int>(cfg.frame_shift_ms * cfg.sample_rate / 1000.0);
  if (num_samples < frame_len) return 0;
  return 1 + (num_samples - frame_len) / shift;
}

FeatureMatrix compute_fbank(const Waveform& wav, const FbankConfig& cfg) {
  validate(cfg);
  if (wav.sample_rate != cfg.sample_rate) {
    throw DataError("fbank: waveform rate " + std::to_string(wav.sample_rate) +
                    " vs config " + std::to_string(cfg.sample_rate));
  }
  const int frame_len =
      static_cast<int>(cfg.frame_length_ms * cfg.sample_rate / 1000.0);
  const int shift =
      static_cast<int>(cfg.frame_shift_ms * cfg.sample_rate / 1000.0);
  const int num_frames = num_frames_for(
      static_cast<int>(wav.samples.size()), cfg);

  FeatureMatrix feats;
  feats.num_frames = num_frames;
  feats.num_bins = cfg.num_bins;
  feats.data.resize(static_cast<std::size_t>(num_frames) * cfg.num_bins);
  if (num_frames == 0) return feats;

  std::vector<double> window(frame_len);
  for (int i = 0; i < frame_len; ++i) {
    window[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i /
                                       (frame_len - 1));
  }
  const MelBank bank = build_mel_bank(cfg);

  std::vector<double> frame(frame_len);
  std::vector<double> inter(2 * cfg.fft_size);
  std::vector<double> power(cfg.fft_size / 2 + 1);
  for (int t = 0; t < num_frames; ++t) {
    const float* src = wav.samples.data() + static_cast<std::size_t>(t) * shift;
    for (int i = 0; i < frame_len; ++i) frame[i] = src[i];
    // Pre-emphasis inside the frame, first sample against itself.
    for (int i = frame_len - 1; i > 0; --i) {
      frame[i] -= cfg.preemphasis * frame[i - 1];
    }
    frame[0] -= cfg.preemphasis * frame[0];

    std::fill(inter.begin(), inter.end(), 0.0);
    for (int i = 0; i < frame_len; ++i) inter[2 * i] = frame[i] * window[i];
    detail::fft_radix2(inter, cfg.fft_size);
    for (int k = 0; k <= cfg.fft_size / 2; ++k) {
      power[k] = inter[2 * k] * inter[2 * k] +
                 inter[2 * k + 1] * inter[2 * k + 1];
    }
    for (int m = 0; m < cfg.num_bins; ++m) {
      double energy = 0.0;
      const auto& w = bank.weights[m];
      const int first = bank.first[m];
      for (std::size_t j = 0; j < w.size(); ++j) {
        energy += w[j] * power[first + j];
      }
      if (energy < cfg.energy_floor) energy = cfg.energy_floor;
      feats.at(t, m) = static_cast<float>(std::log(energy));
    }
  }
  return feats;
}

}  // namespace sedkit
