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

#ifndef SEDKIT_WAV_HPP_
#define SEDKIT_WAV_HPP_

#include <string>
#include <vector>

#include "sedkit/errors.hpp"

namespace sedkit {

struct Waveform {
  int sample_rate = 16000;
  std::vector<float> samples;  // mono, in [-1, 1)

  double seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Reads a RIFF/WAVE file.  Accepts only mono 16 kHz 16-bit PCM; anything
// else raises FormatError naming the offending field.  Truncated or
// structurally broken files raise ParseError.
Waveform load_wav(const std::string& path);

// Writes mono 16-bit PCM; samples are clamped to [-1, 1].
void save_wav(const std::string& path, const Waveform& wav);

}  // namespace sedkit

#endif  // SEDKIT_WAV_HPP_
