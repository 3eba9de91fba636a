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

#include "sedkit/trainer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sedkit/fbank.hpp"
#include "sedkit/wav.hpp"

namespace sedkit {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Stochastic state for one (epoch, item) visit, independent of batch
// boundaries and iteration order.
std::uint32_t item_seed(std::uint64_t seed, int epoch, std::size_t item) {
  const std::uint64_t mixed =
      splitmix64(seed) ^
      splitmix64((std::uint64_t(epoch) << 32) | std::uint64_t(item));
  return static_cast<std::uint32_t>(splitmix64(mixed));
}

const std::array<std::string, 3> kLossNames = {"bce", "weighted_bce", "focal"};

}  // namespace

const std::string& loss_kind_name(LossKind k) {
  return kLossNames[static_cast<int>(k)];
}

LossKind loss_kind_from_name(const std::string& name) {
  for (int i = 0; i < 3; ++i) {
    if (kLossNames[i] == name) return static_cast<LossKind>(i);
  }
  throw ConfigError("unknown loss \"" + name + "\"");
}

void TrainConfig::validate() const {
  if (!(lr >= 0)) throw ConfigError("train: lr must be >= 0");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("train: patience must be >= 1");
  if (focal_gamma < 0) throw ConfigError("train: focal_gamma must be >= 0");
  if (focal_alpha && !(*focal_alpha > 0.0 && *focal_alpha <= 1.0)) {
    throw ConfigError("train: focal_alpha must be in (0,1]");
  }
  if (pair_softmax && loss == LossKind::kFocal) {
    throw ConfigError("train: pair_softmax cannot combine with focal loss");
  }
}

std::string train_config_to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["lr"] = cfg.lr;
  j["batch_size"] = cfg.batch_size;
  j["max_epochs"] = cfg.max_epochs;
  j["patience"] = cfg.patience;
  j["loss"] = loss_kind_name(cfg.loss);
  j["focal_gamma"] = cfg.focal_gamma;
  if (cfg.focal_alpha) {
    j["focal_alpha"] = *cfg.focal_alpha;
  } else {
    j["focal_alpha"] = nullptr;
  }
  j["focal_class_weights"] = cfg.focal_class_weights;
  j["pair_softmax"] = cfg.pair_softmax;
  j["seed"] = cfg.seed;
  return j.dump();
}

TrainConfig train_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("train config: ") + e.what());
  }
  TrainConfig cfg;
  try {
    cfg.lr = j.value("lr", cfg.lr);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.max_epochs = j.value("max_epochs", cfg.max_epochs);
    cfg.patience = j.value("patience", cfg.patience);
    if (j.contains("loss")) {
      cfg.loss = loss_kind_from_name(j["loss"].get<std::string>());
    }
    cfg.focal_gamma = j.value("focal_gamma", cfg.focal_gamma);
    if (j.contains("focal_alpha") && !j["focal_alpha"].is_null()) {
      cfg.focal_alpha = j["focal_alpha"].get<double>();
    }
    cfg.focal_class_weights =
        j.value("focal_class_weights", cfg.focal_class_weights);
    cfg.pair_softmax = j.value("pair_softmax", cfg.pair_softmax);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("train config: ") + e.what());
  }
  return cfg;
}

bool should_stop(const History& history, int patience) {
  if (history.best_epoch == 0 || history.epochs.empty()) return false;
  return history.epochs.back().epoch - history.best_epoch >= patience;
}

std::string history_to_jsonl(const History& history) {
  std::ostringstream os;
  for (const EpochStats& e : history.epochs) {
    nlohmann::ordered_json j;
    j["epoch"] = e.epoch;
    j["train_loss"] = e.train_loss;
    nlohmann::ordered_json f1;
    for (std::size_t k = 0; k < e.dev_f1.size(); ++k) {
      const std::string key = k < history.tasks.size()
                                  ? tag_name(history.tasks[k])
                                  : std::to_string(k);
      f1[key] = e.dev_f1[k];
    }
    j["dev_f1"] = f1;
    j["dev_f1_final"] = e.dev_f1_final;
    os << j.dump() << '\n';
  }
  nlohmann::ordered_json tail;
  tail["best_epoch"] = history.best_epoch;
  tail["best_dev_f1_final"] = history.best_dev_f1_final;
  os << tail.dump() << '\n';
  return os.str();
}

ModelConfig build_task_config(const ModelConfig& base,
                              const std::string& descriptor) {
  ModelConfig cfg = base;
  cfg.tasks = parse_task_subset(descriptor);
  return cfg;
}

std::vector<double> class_weights(const std::vector<ClipRecord>& records,
                                  const TaskSubset& subset,
                                  std::vector<std::string>* warnings) {
  if (records.empty()) throw DataError("class_weights: no records");
  std::vector<double> out;
  out.reserve(subset.size());
  for (StutterTag tag : subset) {
    long pos = 0;
    for (const auto& rec : records) {
      if (rec.labels[static_cast<int>(tag)]) ++pos;
    }
    const long neg = static_cast<long>(records.size()) - pos;
    if (pos == 0) {
      if (warnings != nullptr) {
        warnings->push_back("class_weights: task " + tag_name(tag) +
                            " has no positive examples; weight clamped to 50");
      }
      out.push_back(50.0);
    } else {
      out.push_back(std::clamp(double(neg) / double(pos), 1.0, 50.0));
    }
  }
  return out;
}

namespace {

AdamSnapshot snapshot_adam(const AdamT<float>& opt,
                           const ParamStoreT<float>& params) {
  AdamSnapshot snap;
  snap.config = opt.config();
  snap.steps = opt.steps();
  const auto& m = opt.first_moments();
  const auto& v = opt.second_moments();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& shape = params.tensor(i).shape();
    snap.m.push_back({params.name(i), shape, m[i]});
    snap.v.push_back({params.name(i), shape, v[i]});
  }
  return snap;
}

void restore_adam(AdamT<float>& opt, const ParamStoreT<float>& params,
                  const AdamSnapshot& snap) {
  std::vector<std::vector<float>> m(params.size()), v(params.size());
  auto fill = [&](const std::vector<NamedArray>& src,
                  std::vector<std::vector<float>>& dst, const char* which) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const std::string& name = params.name(i);
      bool found = false;
      for (const auto& arr : src) {
        if (arr.name == name) {
          if (arr.data.size() != params.tensor(i).size()) {
            throw FormatError("checkpoint: optimizer " + std::string(which) +
                              " size mismatch for " + name);
          }
          dst[i] = arr.data;
          found = true;
          break;
        }
      }
      if (!found) {
        throw FormatError("checkpoint: optimizer " + std::string(which) +
                          " missing " + name);
      }
    }
  };
  fill(snap.m, m, "m");
  fill(snap.v, v, "v");
  opt.restore(snap.steps, std::move(m), std::move(v));
}

}  // namespace

TrainResult train(const ModelConfig& model_cfg,
                  const std::vector<ClipRecord>& train_set,
                  const std::vector<ClipRecord>& dev_set,
                  const TrainConfig& train_cfg, const TrainOptions& options) {
  model_cfg.validate();
  train_cfg.validate();
  if (train_set.empty()) throw DataError("train: empty training set");
  if (dev_set.empty()) throw DataError("train: empty dev set");
  if (train_cfg.pair_softmax && model_cfg.head_mode != HeadMode::kTwoLogit) {
    throw ConfigError("train: pair_softmax needs two-logit heads");
  }

  // Class weights for the weighted objectives.
  std::vector<float> weights;
  const bool weighted =
      train_cfg.loss == LossKind::kWeightedBce ||
      (train_cfg.loss == LossKind::kFocal && train_cfg.focal_class_weights);
  if (weighted) {
    std::vector<std::string> warnings;
    for (double w : class_weights(train_set, model_cfg.tasks, &warnings)) {
      weights.push_back(static_cast<float>(w));
    }
    if (options.log != nullptr) {
      for (const auto& w : warnings) *options.log << w << '\n';
    }
  }

  ModelT<float> model = [&] {
    if (options.init) {
      if (model_config_to_json(options.init->model) !=
          model_config_to_json(model_cfg)) {
        throw ConfigError("train: init checkpoint config differs from the "
                          "requested model config");
      }
      return model_from_checkpoint<float>(*options.init);
    }
    return ModelT<float>(model_cfg, train_cfg.seed);
  }();

  AdamConfig adam_cfg;
  adam_cfg.lr = train_cfg.lr;
  AdamT<float> opt(adam_cfg);
  if (options.init && options.init->adam) {
    restore_adam(opt, model.params(), *options.init->adam);
  }

  // Features once per clip, cached.
  auto features_of = [&](const ClipRecord& rec) {
    Waveform wav = load_wav(rec.audio);
    return compute_fbank(wav, model_cfg.frontend);
  };
  std::vector<FeatureMatrix> train_feats, dev_feats;
  train_feats.reserve(train_set.size());
  for (const auto& rec : train_set) train_feats.push_back(features_of(rec));
  dev_feats.reserve(dev_set.size());
  for (const auto& rec : dev_set) dev_feats.push_back(features_of(rec));

  std::vector<std::vector<std::uint8_t>> train_labels;
  train_labels.reserve(train_set.size());
  for (const auto& rec : train_set) {
    train_labels.push_back(restrict_labels(rec.labels, model_cfg.tasks));
  }

  const int num_tasks = static_cast<int>(model_cfg.tasks.size());
  const int per = model_cfg.logits_per_task();

  auto compute_loss = [&](OpContextT<float>& ctx, TensorT<float> logits,
                          const std::vector<std::uint8_t>& labels) {
    LossBatchT<float> batch;
    batch.logits = reshape(ctx, logits, {1, num_tasks * per});
    batch.mode = model_cfg.head_mode;
    batch.labels = labels;
    if (weighted) batch.pos_weight = weights;
    switch (train_cfg.loss) {
      case LossKind::kBce:
      case LossKind::kWeightedBce:
        if (train_cfg.pair_softmax) return pair_softmax_loss(ctx, batch);
        return bce_with_logits(ctx, batch);
      case LossKind::kFocal:
        return focal_loss(ctx, batch,
                          static_cast<float>(train_cfg.focal_gamma),
                          train_cfg.focal_alpha
                              ? std::optional<float>(static_cast<float>(
                                    *train_cfg.focal_alpha))
                              : std::nullopt);
    }
    throw ContractError("train: bad loss kind");
  };

  TrainResult result;
  History& history = result.history;
  history.tasks = model_cfg.tasks;

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= train_cfg.max_epochs; ++epoch) {
    std::mt19937_64 shuffle_rng(splitmix64(train_cfg.seed) ^
                                splitmix64(0xe90cull + epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (std::size_t start = 0; start < order.size();
         start += train_cfg.batch_size) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(train_cfg.batch_size));
      model.params().zero_grad_all();
      for (std::size_t pos = start; pos < end; ++pos) {
        const std::size_t item = order[pos];
        TapeT<float> tape;
        OpContextT<float> ctx;
        ctx.tape = &tape;
        ctx.training = true;
        ctx.rng.seed(item_seed(train_cfg.seed, epoch, item));
        TensorT<float> logits = model.forward(train_feats[item], ctx);
        TensorT<float> loss = compute_loss(ctx, logits, train_labels[item]);
        const float value = loss.item();
        if (!std::isfinite(value)) {
          throw NumericAbort("train: non-finite loss at epoch " +
                             std::to_string(epoch) + ", clip " +
                             train_set[item].id);
        }
        backward(tape, loss);
        loss_sum += value;
        ++loss_count;
      }
      // Mean over the actual batch before stepping.
      const float inv = 1.0f / static_cast<float>(end - start);
      auto& params = model.params();
      for (std::size_t i = 0; i < params.size(); ++i) {
        for (float& g : params.tensor(i).grad()) g *= inv;
      }
      opt.step(params);
    }

    // Dev pass over cached features.
    std::size_t cursor = 0;
    EvalReport dev = evaluate_predictions(
        dev_set, model_cfg.tasks, [&](const ClipRecord& rec) {
          OpContextT<float> ctx;
          TensorT<float> logits = model.forward(dev_feats[cursor++], ctx);
          if (!all_finite(logits)) {
            throw NumericAbort("train: non-finite logits on dev clip " +
                               rec.id);
          }
          return predict_labels(
              logits_from_tensor(logits, model_cfg.head_mode));
        });

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_count ? loss_sum / double(loss_count) : 0.0;
    for (const TaskScore& s : dev.scores) stats.dev_f1.push_back(s.f1);
    stats.dev_f1_final = dev.f1_final;
    history.epochs.push_back(stats);
    result.epochs_run = epoch;

    const bool improved = history.best_epoch == 0 ||
                          stats.dev_f1_final > history.best_dev_f1_final;
    if (improved) {
      history.best_epoch = epoch;
      history.best_dev_f1_final = stats.dev_f1_final;
      result.best = checkpoint_from_model(model);
      result.best.epoch = epoch;
      result.best.best_dev_f1_final = stats.dev_f1_final;
      result.best.adam = snapshot_adam(opt, model.params());
    }
    if (options.log != nullptr) {
      std::ostringstream line;
      line << "epoch " << epoch << "  train_loss " << std::fixed
           << std::setprecision(4) << stats.train_loss << "  dev_f1_final "
           << stats.dev_f1_final << "  best " << history.best_epoch;
      *options.log << line.str() << '\n';
    }
    if (should_stop(history, train_cfg.patience)) break;
  }

  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    const auto dir = std::filesystem::path(*options.out_dir);
    save_checkpoint(result.best, (dir / "best.ckpt").string());
    std::ofstream hist(dir / "history.jsonl");
    if (!hist) throw DataError("train: cannot write history in " +
                               *options.out_dir);
    hist << history_to_jsonl(history);
  }
  return result;
}

}  // namespace sedkit
