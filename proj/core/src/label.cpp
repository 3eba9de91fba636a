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

#include "sedkit/label.hpp"

#include <algorithm>

namespace sedkit {

namespace {
const std::array<std::string, kNumTags> kTagNames = {"/p", "/b", "/r", "[]",
                                                     "/i"};
}  // namespace

const std::string& tag_name(StutterTag tag) {
  return kTagNames[static_cast<int>(tag)];
}

StutterTag tag_from_name(const std::string& name) {
  for (int i = 0; i < kNumTags; ++i) {
    if (kTagNames[i] == name) return static_cast<StutterTag>(i);
  }
  throw ParseError("unknown stutter tag \"" + name +
                   "\" (expected one of /p /b /r [] /i)");
}

TaskSubset parse_task_subset(const std::string& descriptor) {
  if (descriptor == "five") {
    return TaskSubset(kAllTags.begin(), kAllTags.end());
  }
  if (descriptor == "three") {
    return {StutterTag::kProlongation, StutterTag::kWordRep,
            StutterTag::kInterjection};
  }
  if (descriptor.rfind("single:", 0) == 0) {
    std::string name = descriptor.substr(7);
    try {
      return {tag_from_name(name)};
    } catch (const ParseError&) {
      throw ConfigError("bad task subset \"" + descriptor +
                        "\": unknown tag \"" + name + "\"");
    }
  }
  // Comma list of tag names, e.g. "/p,/b".
  TaskSubset subset;
  std::string rest = descriptor;
  while (!rest.empty()) {
    auto comma = rest.find(',');
    std::string piece = rest.substr(0, comma);
    rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
    try {
      subset.push_back(tag_from_name(piece));
    } catch (const ParseError&) {
      throw ConfigError("bad task subset \"" + descriptor + "\"");
    }
  }
  if (subset.empty()) throw ConfigError("empty task subset");
  // Canonical order, no duplicates.
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  return subset;
}

std::string task_subset_name(const TaskSubset& subset) {
  if (subset.size() == kNumTags) return "five";
  if (subset == TaskSubset{StutterTag::kProlongation, StutterTag::kWordRep,
                           StutterTag::kInterjection}) {
    return "three";
  }
  if (subset.size() == 1) return "single:" + tag_name(subset[0]);
  std::string out;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (i) out += ',';
    out += tag_name(subset[i]);
  }
  return out;
}

std::vector<std::uint8_t> restrict_labels(const LabelVector& labels,
                                          const TaskSubset& subset) {
  std::vector<std::uint8_t> out;
  out.reserve(subset.size());
  for (StutterTag tag : subset) out.push_back(labels[static_cast<int>(tag)]);
  return out;
}

}  // namespace sedkit
