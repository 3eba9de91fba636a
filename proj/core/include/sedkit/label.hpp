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

#ifndef SEDKIT_LABEL_HPP_
#define SEDKIT_LABEL_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sedkit/errors.hpp"

namespace sedkit {

// The five clip-level stuttering event types.  Every label vector, loss
// weight vector, metric table and classifier head in the toolkit uses this
// order; nothing may reorder it.
enum class StutterTag : std::uint8_t {
  kProlongation = 0,  // "/p"
  kBlock = 1,         // "/b"
  kSoundRep = 2,      // "/r"
  kWordRep = 3,       // "[]"
  kInterjection = 4,  // "/i"
};

inline constexpr int kNumTags = 5;

inline constexpr std::array<StutterTag, kNumTags> kAllTags = {
    StutterTag::kProlongation, StutterTag::kBlock, StutterTag::kSoundRep,
    StutterTag::kWordRep, StutterTag::kInterjection};

// Display / manifest spelling of a tag: "/p", "/b", "/r", "[]", "/i".
const std::string& tag_name(StutterTag tag);

// Inverse of tag_name; throws ParseError on unknown spelling.
StutterTag tag_from_name(const std::string& name);

// Multi-hot clip label in canonical order.
using LabelVector = std::array<std::uint8_t, kNumTags>;

// A task subset is an ordered selection of tags; canonical order is
// preserved regardless of how the subset was written.
using TaskSubset = std::vector<StutterTag>;

// Parses a subset descriptor: "five" (all tags), "three" (/p, [], /i) or
// "single:<tag>" ("single:/b").  Throws ConfigError on anything else.
TaskSubset parse_task_subset(const std::string& descriptor);

// Descriptor round-trip for reports and checkpoints ("five", "three",
// "single:/b", or a comma list like "/p,/b" for ad-hoc subsets).
std::string task_subset_name(const TaskSubset& subset);

// Restricts a full label vector to a subset, in subset order.
std::vector<std::uint8_t> restrict_labels(const LabelVector& labels,
                                          const TaskSubset& subset);

}  // namespace sedkit

#endif  // SEDKIT_LABEL_HPP_
