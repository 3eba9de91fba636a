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

#ifndef SEDKIT_TRAINER_HPP_
#define SEDKIT_TRAINER_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sedkit/checkpoint.hpp"
#include "sedkit/losses.hpp"
#include "sedkit/manifest.hpp"
#include "sedkit/metrics.hpp"
#include "sedkit/model.hpp"

namespace sedkit {

enum class LossKind { kBce, kWeightedBce, kFocal };

const std::string& loss_kind_name(LossKind k);
LossKind loss_kind_from_name(const std::string& name);

struct TrainConfig {
  double lr = 1e-4;
  int batch_size = 16;
  int max_epochs = 100;
  int patience = 10;           // early stop: epochs since best >= patience
  LossKind loss = LossKind::kWeightedBce;
  double focal_gamma = 2.0;
  std::optional<double> focal_alpha;  // nullopt: alpha_t = 1 on both classes
  bool focal_class_weights = false;   // focal also scaled by class weights
  bool pair_softmax = false;          // two-logit heads trained as softmax pairs
  std::uint64_t seed = 94711;

  void validate() const;
};

std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& text);

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::vector<double> dev_f1;  // per active task
  double dev_f1_final = 0.0;
};

struct History {
  TaskSubset tasks;  // names the dev_f1 columns
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // 1-based; 0 before any epoch completes
  double best_dev_f1_final = 0.0;
};

// Early stopping rule: stop once the epochs elapsed since the best dev
// F1-final (strict improvement) reach the patience.
bool should_stop(const History& history, int patience);

std::string history_to_jsonl(const History& history);

// Applies a "five" / "three" / "single:<tag>" task descriptor to a model
// config: restricts the heads and returns the adjusted copy.
ModelConfig build_task_config(const ModelConfig& base,
                              const std::string& descriptor);

struct TrainOptions {
  std::ostream* log = nullptr;          // per-epoch progress lines
  std::optional<std::string> out_dir;   // best.ckpt + history.jsonl live here
  std::optional<Checkpoint> init;       // resume weights/optimizer state
};

struct TrainResult {
  Checkpoint best;      // weights from the best dev epoch
  History history;
  int epochs_run = 0;
};

// Mini-batch Adam training driven by per-epoch dev-set F1-final.  Shuffles
// with a seeded RNG; per-clip stochastic state (dropout, masking) derives
// from (seed, epoch, clip index), so a run is reproducible end to end.
// Features are extracted once per clip and cached in memory.  A non-finite
// training loss raises NumericAbort.  Empty train or dev sets raise
// DataError.
TrainResult train(const ModelConfig& model_cfg,
                  const std::vector<ClipRecord>& train_set,
                  const std::vector<ClipRecord>& dev_set,
                  const TrainConfig& train_cfg,
                  const TrainOptions& options = {});

}  // namespace sedkit

#endif  // SEDKIT_TRAINER_HPP_
