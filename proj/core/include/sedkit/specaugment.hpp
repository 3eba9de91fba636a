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

#ifndef SEDKIT_SPECAUGMENT_HPP_
#define SEDKIT_SPECAUGMENT_HPP_

#include <random>
#include <vector>

#include "sedkit/fbank.hpp"

namespace sedkit {

// Training-time masking policy applied to log-mel features.
struct AugmentPolicy {
  bool enabled = true;
  int num_freq_masks = 2;
  int max_freq_width = 10;  // F: width drawn uniformly from [0, F]
  int num_time_masks = 2;
  int max_time_width = 50;  // T_w: width drawn uniformly from [0, T_w]
  bool zero_fill = false;   // fill with 0 instead of the utterance mean
};

// One applied mask, for inspection and tests.
struct MaskSpan {
  bool on_freq_axis = false;  // otherwise time axis
  int start = 0;
  int width = 0;
};

struct AugmentTrace {
  std::vector<MaskSpan> masks;
  float fill_value = 0.0f;
};

// Masks features in place.  Fill value is the per-utterance mean of the
// input (computed before any masking) unless policy.zero_fill.  Mask widths
// are clamped to the axis extent; width draws of zero leave cells untouched.
// Unmasked cells are never modified.
void spec_augment(FeatureMatrix& features, const AugmentPolicy& policy,
                  std::mt19937& rng, AugmentTrace* trace = nullptr);

}  // namespace sedkit

#endif  // SEDKIT_SPECAUGMENT_HPP_
