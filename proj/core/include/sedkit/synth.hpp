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

#ifndef SEDKIT_SYNTH_HPP_
#define SEDKIT_SYNTH_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sedkit/manifest.hpp"

namespace sedkit {

// Synthetic speech-like corpus generator.  Clips are tone-syllable
// sequences with per-speaker base pitch; each event type leaves a distinct
// acoustic footprint:
//   /p  one syllable stretched to several times its length
//   /b  an inserted >= 400 ms silence (normal gaps stay under 120 ms)
//   /r  a short fragment of a syllable repeated 2-4 times before it
//   []  a group of syllables repeated verbatim
//   /i  a low-amplitude narrowband filler burst around 1 kHz
struct SynthSpec {
  int num_clips = 100;
  double clip_seconds = 3.0;  // nominal voiced length; events extend it
  // Independent per-clip event probabilities, canonical order /p /b /r [] /i.
  std::array<double, kNumTags> event_prob = {0.3, 0.3, 0.3, 0.3, 0.3};
  int num_speakers = 0;  // 0 -> max(3, num_clips / 10)
  int sample_rate = 16000;
  std::uint64_t seed = 1234;
};

struct SynthResult {
  std::string manifest_path;
  std::vector<ClipRecord> records;  // audio paths resolved to out_dir
};

// Renders spec.num_clips wav files under out_dir/wav/ and writes
// out_dir/manifest.jsonl.  Each record's transcript carries the event
// markers, so parse_annotation_tags(transcript) reproduces its labels.
// Deterministic in spec.seed.  clip_seconds < 1 is a ConfigError;
// probabilities outside [0,1] likewise.
SynthResult synth_generate(const SynthSpec& spec, const std::string& out_dir);

}  // namespace sedkit

#endif  // SEDKIT_SYNTH_HPP_
