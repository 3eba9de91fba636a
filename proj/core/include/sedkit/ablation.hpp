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

#ifndef SEDKIT_ABLATION_HPP_
#define SEDKIT_ABLATION_HPP_

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sedkit/manifest.hpp"
#include "sedkit/model.hpp"
#include "sedkit/trainer.hpp"

namespace sedkit {

// Grid axes.  Strategies are task-subset descriptors ("five", "three",
// "single:/b", ...).  bilstm entries encode depth and directionality:
// "bilstm-1".."bilstm-3" or "lstm-2" for the unidirectional control.
struct AblationGrid {
  std::vector<int> conformer_layers;     // e.g. 3 6 12 15
  std::vector<std::string> bilstm;       // e.g. bilstm-2 lstm-2
  std::vector<std::string> strategies;   // e.g. five three single:/b
};

struct AblationCell {
  int conformer_layers = 0;
  std::string bilstm;
  std::string strategy;
  std::uint64_t seed = 0;                // derived, see cell_seed
  std::vector<std::optional<double>> test_f1;  // canonical order; nullopt = ---
  double test_f1_final = 0.0;
  int best_epoch = 0;
  std::string error;    // non-empty: the cell failed and was skipped
  int error_code = 0;   // process exit code its failure maps to
};

// Stable per-cell seed: FNV-1a of the cell descriptor folded with the
// global seed, so adding or reordering cells never changes another cell's
// run.
std::uint64_t cell_seed(std::uint64_t global_seed, int layers,
                        const std::string& bilstm,
                        const std::string& strategy);

struct AblationResult {
  std::vector<AblationCell> cells;
};

// Trains one model per grid cell and scores it on the test set.  Tasks
// outside a cell's subset report "---" (nullopt).  A failing cell is
// recorded (error text + exit code) and skipped; later cells still run.
// Deterministic for a fixed grid, data and seed.
AblationResult run_ablation(const ModelConfig& base_model,
                            const TrainConfig& base_train,
                            const AblationGrid& grid,
                            const std::vector<ClipRecord>& train_set,
                            const std::vector<ClipRecord>& dev_set,
                            const std::vector<ClipRecord>& test_set,
                            std::uint64_t global_seed,
                            std::ostream* log = nullptr);

// Fixed-width table: one row per cell, one column per canonical task plus
// the final mean; absent tasks render as "---".
std::string render_ablation_table(const AblationResult& result);
std::string ablation_to_jsonl(const AblationResult& result);

// Parses "bilstm-2" / "lstm-1" into (layers, bidirectional); ConfigError
// otherwise.
void parse_bilstm_axis(const std::string& text, int* layers,
                       bool* bidirectional);

}  // namespace sedkit

#endif  // SEDKIT_ABLATION_HPP_
