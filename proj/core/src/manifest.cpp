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

#include "sedkit/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sedkit {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {
const std::array<std::string, 4> kSplitNames = {"unspecified", "train", "dev",
                                                "test"};
}

const std::string& split_name(Split s) {
  return kSplitNames[static_cast<int>(s)];
}

Split split_from_name(const std::string& name) {
  for (int i = 0; i < 4; ++i) {
    if (kSplitNames[i] == name) return static_cast<Split>(i);
  }
  throw ParseError("unknown split \"" + name + "\"");
}

LabelVector parse_annotation_tags(const std::string& transcript) {
  LabelVector labels{};
  auto mark = [&](StutterTag tag) { labels[static_cast<int>(tag)] = 1; };
  if (transcript.find("/p") != std::string::npos) {
    mark(StutterTag::kProlongation);
  }
  if (transcript.find("/b") != std::string::npos) mark(StutterTag::kBlock);
  if (transcript.find("/r") != std::string::npos) mark(StutterTag::kSoundRep);
  if (transcript.find("/i") != std::string::npos) {
    mark(StutterTag::kInterjection);
  }
  const auto open = transcript.find('[');
  if (open != std::string::npos &&
      transcript.find(']', open + 1) != std::string::npos) {
    mark(StutterTag::kWordRep);
  }
  return labels;
}

LoadedManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("manifest: cannot open " + path);
  const fs::path base = fs::path(path).parent_path();

  LoadedManifest out;
  std::set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    auto context = [&](const std::string& what) {
      return ParseError("manifest line " + std::to_string(line_no) + ": " +
                        what);
    };
    if (!obj.is_object()) throw context("expected a JSON object");
    ClipRecord rec;
    try {
      rec.id = obj.at("id").get<std::string>();
      rec.audio = obj.at("audio").get<std::string>();
      rec.speaker = obj.at("speaker").get<std::string>();
      const auto& labels = obj.at("labels");
      if (!labels.is_array() || labels.size() != kNumTags) {
        throw context("labels must be an array of " +
                      std::to_string(kNumTags) + " values");
      }
      for (int i = 0; i < kNumTags; ++i) {
        const int v = labels[i].get<int>();
        if (v != 0 && v != 1) throw context("labels must be 0 or 1");
        rec.labels[i] = static_cast<std::uint8_t>(v);
      }
      if (obj.contains("transcript")) {
        rec.transcript = obj.at("transcript").get<std::string>();
      }
      if (obj.contains("split")) {
        rec.split = split_from_name(obj.at("split").get<std::string>());
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw context(e.what());
    }
    if (!seen_ids.insert(rec.id).second) {
      throw DataError("manifest line " + std::to_string(line_no) +
                      ": duplicate id \"" + rec.id + "\"");
    }
    if (fs::path(rec.audio).is_relative() && !base.empty()) {
      rec.audio = (base / rec.audio).string();
    }
    if (rec.transcript) {
      const LabelVector from_text = parse_annotation_tags(*rec.transcript);
      if (from_text != rec.labels) {
        out.warnings.push_back("manifest line " + std::to_string(line_no) +
                               " (" + rec.id +
                               "): transcript tags disagree with labels");
      }
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

void save_manifest(const std::vector<ClipRecord>& records,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("manifest: cannot write " + path);
  for (const auto& rec : records) {
    ordered_json obj;
    obj["id"] = rec.id;
    obj["audio"] = rec.audio;
    obj["speaker"] = rec.speaker;
    obj["labels"] = std::vector<int>(rec.labels.begin(), rec.labels.end());
    if (rec.transcript) obj["transcript"] = *rec.transcript;
    if (rec.split != Split::kUnspecified) obj["split"] = split_name(rec.split);
    out << obj.dump() << '\n';
  }
  if (!out) throw DataError("manifest: write failed for " + path);
}

std::array<std::vector<ClipRecord>, 3> split_by_speaker(
    const std::vector<ClipRecord>& records, const SplitFractions& fractions,
    std::uint64_t seed) {
  const double sum = fractions.train + fractions.dev + fractions.test;
  if (!(fractions.train > 0) || !(fractions.dev > 0) ||
      !(fractions.test > 0) || std::abs(sum - 1.0) > 1e-6) {
    throw ConfigError("split fractions must be positive and sum to 1");
  }
  if (records.empty()) throw DataError("split: no records");

  std::vector<std::string> speakers;
  for (const auto& rec : records) speakers.push_back(rec.speaker);
  std::sort(speakers.begin(), speakers.end());
  speakers.erase(std::unique(speakers.begin(), speakers.end()),
                 speakers.end());
  const int s = static_cast<int>(speakers.size());
  if (s < 3) {
    throw ConfigError("split: need at least 3 speakers, got " +
                      std::to_string(s));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(speakers.begin(), speakers.end(), rng);

  // Largest-remainder apportionment of speaker counts.
  const std::array<double, 3> frac = {fractions.train, fractions.dev,
                                      fractions.test};
  std::array<int, 3> target;
  std::array<double, 3> remainder;
  int assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = frac[i] * s;
    target[i] = static_cast<int>(std::floor(exact));
    remainder[i] = exact - target[i];
    assigned += target[i];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
    return a < b;
  });
  for (int extra = 0; extra < s - assigned; ++extra) {
    target[order[extra % 3]] += 1;
  }
  // Guarantee non-empty splits (possible at small speaker counts).
  for (int i = 0; i < 3; ++i) {
    while (target[i] == 0) {
      const int biggest = static_cast<int>(
          std::max_element(target.begin(), target.end()) - target.begin());
      target[biggest] -= 1;
      target[i] += 1;
    }
  }

  std::array<std::set<std::string>, 3> groups;
  int idx = 0;
  for (int part = 0; part < 3; ++part) {
    for (int j = 0; j < target[part]; ++j) groups[part].insert(speakers[idx++]);
  }

  std::array<std::vector<ClipRecord>, 3> out;
  const std::array<Split, 3> marks = {Split::kTrain, Split::kDev,
                                      Split::kTest};
  for (const auto& rec : records) {
    for (int part = 0; part < 3; ++part) {
      if (groups[part].count(rec.speaker)) {
        out[part].push_back(rec);
        out[part].back().split = marks[part];
        break;
      }
    }
  }
  return out;
}

}  // namespace sedkit
