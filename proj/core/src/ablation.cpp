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

#include "sedkit/ablation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sedkit/metrics.hpp"

namespace sedkit {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const std::string& text) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t global_seed, int layers,
                        const std::string& bilstm,
                        const std::string& strategy) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  h = fnv1a(h, std::to_string(layers));
  h = fnv1a(h, "|");
  h = fnv1a(h, bilstm);
  h = fnv1a(h, "|");
  h = fnv1a(h, strategy);
  return h ^ global_seed;
}

void parse_bilstm_axis(const std::string& text, int* layers,
                       bool* bidirectional) {
  std::string prefix;
  if (text.rfind("bilstm-", 0) == 0) {
    prefix = "bilstm-";
    *bidirectional = true;
  } else if (text.rfind("lstm-", 0) == 0) {
    prefix = "lstm-";
    *bidirectional = false;
  } else {
    throw ConfigError("bilstm axis \"" + text +
                      "\": expected bilstm-<n> or lstm-<n>");
  }
  const std::string digits = text.substr(prefix.size());
  if (digits.empty() ||
      !std::all_of(digits.begin(), digits.end(),
                   [](unsigned char c) { return std::isdigit(c); })) {
    throw ConfigError("bilstm axis \"" + text + "\": bad layer count");
  }
  *layers = std::stoi(digits);
  if (*layers < 0 || *layers > 8) {
    throw ConfigError("bilstm axis \"" + text +
                      "\": layer count out of range [0,8]");
  }
}

AblationResult run_ablation(const ModelConfig& base_model,
                            const TrainConfig& base_train,
                            const AblationGrid& grid,
                            const std::vector<ClipRecord>& train_set,
                            const std::vector<ClipRecord>& dev_set,
                            const std::vector<ClipRecord>& test_set,
                            std::uint64_t global_seed, std::ostream* log) {
  if (grid.conformer_layers.empty() || grid.bilstm.empty() ||
      grid.strategies.empty()) {
    throw ConfigError("ablation: every grid axis needs at least one value");
  }
  if (test_set.empty()) throw DataError("ablation: empty test set");

  AblationResult result;
  for (int layers : grid.conformer_layers) {
    for (const std::string& bilstm : grid.bilstm) {
      for (const std::string& strategy : grid.strategies) {
        AblationCell cell;
        cell.conformer_layers = layers;
        cell.bilstm = bilstm;
        cell.strategy = strategy;
        cell.seed = cell_seed(global_seed, layers, bilstm, strategy);

        TrainConfig tcfg = base_train;
        tcfg.seed = cell.seed;
        if (log != nullptr) {
          *log << "ablation cell: layers=" << layers << " " << bilstm << " "
               << strategy << " seed=" << cell.seed << '\n';
        }
        cell.test_f1.assign(kNumTags, std::nullopt);
        try {
          ModelConfig cfg = build_task_config(base_model, strategy);
          cfg.num_blocks = layers;
          parse_bilstm_axis(bilstm, &cfg.lstm_layers,
                            &cfg.lstm_bidirectional);
          cfg.validate();
          TrainOptions topts;
          topts.log = log;
          TrainResult trained = train(cfg, train_set, dev_set, tcfg, topts);
          ModelT<float> best = model_from_checkpoint<float>(trained.best);
          EvalReport report = evaluate(best, test_set);
          for (std::size_t i = 0; i < report.tasks.size(); ++i) {
            cell.test_f1[static_cast<int>(report.tasks[i])] =
                report.scores[i].f1;
          }
          cell.test_f1_final = report.f1_final;
          cell.best_epoch = trained.history.best_epoch;
        } catch (const NumericAbort& e) {
          cell.error = e.what();
          cell.error_code = 3;
        } catch (const Error& e) {
          cell.error = e.what();
          cell.error_code = 2;
        }
        if (!cell.error.empty() && log != nullptr) {
          *log << "ablation cell failed: " << cell.error << '\n';
        }
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

std::string render_ablation_table(const AblationResult& result) {
  std::ostringstream os;
  os << std::left << std::setw(8) << "layers" << std::setw(10) << "bilstm"
     << std::setw(12) << "strategy";
  for (StutterTag tag : kAllTags) {
    os << std::right << std::setw(8) << tag_name(tag);
  }
  os << std::right << std::setw(8) << "final" << std::setw(7) << "epoch"
     << '\n';
  for (const AblationCell& cell : result.cells) {
    os << std::left << std::setw(8) << cell.conformer_layers << std::setw(10)
       << cell.bilstm << std::setw(12) << cell.strategy;
    for (int t = 0; t < kNumTags; ++t) {
      if (cell.test_f1[t]) {
        os << std::right << std::setw(8) << std::fixed << std::setprecision(2)
           << *cell.test_f1[t] * 100.0;
      } else {
        os << std::right << std::setw(8) << "---";
      }
    }
    if (cell.error.empty()) {
      os << std::right << std::setw(8) << std::fixed << std::setprecision(2)
         << cell.test_f1_final * 100.0 << std::setw(7) << cell.best_epoch;
    } else {
      os << std::right << std::setw(8) << "fail" << std::setw(7) << "-";
    }
    os << '\n';
  }
  return os.str();
}

std::string ablation_to_jsonl(const AblationResult& result) {
  std::ostringstream os;
  for (const AblationCell& cell : result.cells) {
    nlohmann::ordered_json j;
    j["conformer_layers"] = cell.conformer_layers;
    j["bilstm"] = cell.bilstm;
    j["strategy"] = cell.strategy;
    j["seed"] = cell.seed;
    nlohmann::ordered_json f1;
    for (int t = 0; t < kNumTags; ++t) {
      const std::string key = tag_name(kAllTags[t]);
      if (cell.test_f1[t]) {
        f1[key] = *cell.test_f1[t];
      } else {
        f1[key] = nullptr;
      }
    }
    j["test_f1"] = f1;
    j["test_f1_final"] = cell.test_f1_final;
    j["best_epoch"] = cell.best_epoch;
    if (!cell.error.empty()) j["error"] = cell.error;
    os << j.dump() << '\n';
  }
  return os.str();
}

}  // namespace sedkit
