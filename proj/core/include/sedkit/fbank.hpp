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

#ifndef SEDKIT_FBANK_HPP_
#define SEDKIT_FBANK_HPP_

#include <span>
#include <vector>

#include "sedkit/errors.hpp"
#include "sedkit/wav.hpp"

namespace sedkit {

struct FbankConfig {
  int sample_rate = 16000;
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  int fft_size = 512;  // power of two, >= frame length in samples
  int num_bins = 80;   // mel filters
  double low_freq_hz = 20.0;
  double high_freq_hz = 7600.0;
  double preemphasis = 0.97;
  double energy_floor = 1e-10;  // power floored before the log
};

// Log-mel features, frames-by-bins row-major.
struct FeatureMatrix {
  int num_frames = 0;
  int num_bins = 0;
  std::vector<float> data;

  float at(int t, int b) const {
    return data[static_cast<std::size_t>(t) * num_bins + b];
  }
  float& at(int t, int b) {
    return data[static_cast<std::size_t>(t) * num_bins + b];
  }
  std::span<const float> frame(int t) const {
    return {data.data() + static_cast<std::size_t>(t) * num_bins,
            static_cast<std::size_t>(num_bins)};
  }
};

// Frame count for a sample count under this config: frames fit entirely
// inside the signal, 1 + floor((len - frame_len) / shift); zero if the
// signal is shorter than one frame.
int num_frames_for(int num_samples, const FbankConfig& cfg = {});

// Hamming-windowed, pre-emphasized log-mel filterbank features.  Power
// spectra come from a radix-2 FFT of each zero-padded frame; filter outputs
// are floored at cfg.energy_floor before the natural log, so digital
// silence maps to log(energy_floor) everywhere.
FeatureMatrix compute_fbank(const Waveform& wav, const FbankConfig& cfg = {});

namespace detail {
// In-place iterative radix-2 complex FFT (interleaved re,im pairs).
// n must be a power of two.  Exposed for testing against a DFT oracle.
void fft_radix2(std::vector<double>& inter, int n);
}  // namespace detail

}  // namespace sedkit

#endif  // SEDKIT_FBANK_HPP_
