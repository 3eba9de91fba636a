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

#include "sedkit/specaugment.hpp"

#include <algorithm>

namespace sedkit {

namespace {

void validate(const AugmentPolicy& p) {
  if (p.num_freq_masks < 0 || p.num_time_masks < 0) {
    throw ConfigError("spec_augment: mask counts must be >= 0");
  }
  if (p.max_freq_width < 0 || p.max_time_width < 0) {
    throw ConfigError("spec_augment: mask widths must be >= 0");
  }
}

}  // namespace

void spec_augment(FeatureMatrix& features, const AugmentPolicy& policy,
                  std::mt19937& rng, AugmentTrace* trace) {
  validate(policy);
  if (trace != nullptr) {
    trace->masks.clear();
    trace->fill_value = 0.0f;
  }
  if (!policy.enabled || features.num_frames == 0 || features.num_bins == 0) {
    return;
  }

  float fill = 0.0f;
  if (!policy.zero_fill) {
    // Utterance mean over the unmasked input.
    double sum = 0.0;
    for (float v : features.data) sum += v;
    fill = static_cast<float>(sum / features.data.size());
  }
  if (trace != nullptr) trace->fill_value = fill;

  auto draw = [&rng](int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  for (int i = 0; i < policy.num_freq_masks; ++i) {
    const int max_w = std::min(policy.max_freq_width, features.num_bins);
    const int w = draw(0, max_w);
    const int start = draw(0, features.num_bins - w);
    if (trace != nullptr) trace->masks.push_back({true, start, w});
    if (w == 0) continue;
    for (int t = 0; t < features.num_frames; ++t) {
      for (int b = start; b < start + w; ++b) features.at(t, b) = fill;
    }
  }
  for (int i = 0; i < policy.num_time_masks; ++i) {
    const int max_w = std::min(policy.max_time_width, features.num_frames);
    const int w = draw(0, max_w);
    const int start = draw(0, features.num_frames - w);
    if (trace != nullptr) trace->masks.push_back({false, start, w});
    if (w == 0) continue;
    for (int t = start; t < start + w; ++t) {
      for (int b = 0; b < features.num_bins; ++b) features.at(t, b) = fill;
    }
  }
}

}  // namespace sedkit
