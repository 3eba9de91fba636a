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

#ifndef SEDKIT_MANIFEST_HPP_
#define SEDKIT_MANIFEST_HPP_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sedkit/label.hpp"

namespace sedkit {

enum class Split { kUnspecified, kTrain, kDev, kTest };

const std::string& split_name(Split s);
Split split_from_name(const std::string& name);

// One dataset clip.  audio paths that are relative in the manifest are
// resolved against the manifest's directory at load time.
struct ClipRecord {
  std::string id;
  std::string audio;
  std::string speaker;
  LabelVector labels{};  // canonical order /p /b /r [] /i
  std::optional<std::string> transcript;
  Split split = Split::kUnspecified;
};

// Scans a transcript for inline event markers and returns the multi-hot
// label vector: "/p" "/b" "/r" "/i" tokens and any "[...]" bracketed span.
LabelVector parse_annotation_tags(const std::string& transcript);

struct LoadedManifest {
  std::vector<ClipRecord> records;
  // Human-readable notes: label/transcript disagreements etc.  Loading only
  // fails on structural problems, never on warnings.
  std::vector<std::string> warnings;
};

// Reads a JSONL manifest (one clip object per line).  Malformed JSON or a
// missing required field raises ParseError naming the 1-based line.
// Duplicate ids raise DataError.
LoadedManifest load_manifest(const std::string& path);

// Writes one clip per line in field order id, audio, speaker, labels,
// transcript (when present), split (when specified).
void save_manifest(const std::vector<ClipRecord>& records,
                   const std::string& path);

struct SplitFractions {
  double train = 0.614;
  double dev = 0.10;
  double test = 0.286;
};

// Speaker-disjoint split: speakers are shuffled by seed, target speaker
// counts come from largest-remainder apportionment of the fractions, and
// every clip follows its speaker.  Fewer than three speakers is a
// ConfigError.  Fractions must be positive and sum to 1 within 1e-6.
std::array<std::vector<ClipRecord>, 3> split_by_speaker(
    const std::vector<ClipRecord>& records, const SplitFractions& fractions,
    std::uint64_t seed);

}  // namespace sedkit

#endif  // SEDKIT_MANIFEST_HPP_
