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

#include <nlohmann/json.hpp>

#include "sedkit/model.hpp"

namespace sedkit {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {
const std::array<std::string, 2> kHeadModeNames = {"two_logit", "one_logit"};
const std::array<std::string, 2> kPoolingNames = {"mean", "last"};
const std::array<std::string, kNumTags> kTagKeys = {"p", "b", "r", "wr", "i"};
}  // namespace

const std::string& head_mode_name(HeadMode m) {
  return kHeadModeNames[static_cast<int>(m)];
}

HeadMode head_mode_from_name(const std::string& name) {
  for (int i = 0; i < 2; ++i) {
    if (kHeadModeNames[i] == name) return static_cast<HeadMode>(i);
  }
  throw ConfigError("unknown head mode \"" + name + "\"");
}

const std::string& pooling_name(Pooling p) {
  return kPoolingNames[static_cast<int>(p)];
}

Pooling pooling_from_name(const std::string& name) {
  for (int i = 0; i < 2; ++i) {
    if (kPoolingNames[i] == name) return static_cast<Pooling>(i);
  }
  throw ConfigError("unknown pooling \"" + name + "\"");
}

const std::string& tag_key(StutterTag tag) {
  return kTagKeys[static_cast<int>(tag)];
}

void ModelConfig::validate() const {
  if (frontend.num_bins < 7) {
    throw ConfigError("model: frontend.num_bins must be >= 7 for subsampling");
  }
  if (d_model < 1) throw ConfigError("model: d_model must be >= 1");
  if (num_blocks < 0) throw ConfigError("model: num_blocks must be >= 0");
  if (num_heads < 1 || d_model % num_heads != 0) {
    throw ConfigError("model: d_model " + std::to_string(d_model) +
                      " must divide into " + std::to_string(num_heads) +
                      " heads");
  }
  if (ff_expansion < 1) throw ConfigError("model: ff_expansion must be >= 1");
  if (conv_kernel < 1 || conv_kernel % 2 == 0) {
    throw ConfigError("model: conv_kernel must be odd and >= 1, got " +
                      std::to_string(conv_kernel));
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError("model: dropout must be in [0,1)");
  }
  if (lstm_layers < 0) throw ConfigError("model: lstm_layers must be >= 0");
  if (lstm_layers > 0 && lstm_hidden < 1) {
    throw ConfigError("model: lstm_hidden must be >= 1");
  }
  if (proj_dim < 1) throw ConfigError("model: proj_dim must be >= 1");
  if (tasks.empty()) throw ConfigError("model: task subset is empty");
  std::array<bool, kNumTags> seen{};
  for (StutterTag tag : tasks) {
    if (seen[static_cast<int>(tag)]) {
      throw ConfigError("model: duplicate task " + tag_name(tag));
    }
    seen[static_cast<int>(tag)] = true;
  }
}

namespace {

ordered_json fbank_to_json(const FbankConfig& f) {
  ordered_json j;
  j["sample_rate"] = f.sample_rate;
  j["frame_length_ms"] = f.frame_length_ms;
  j["frame_shift_ms"] = f.frame_shift_ms;
  j["fft_size"] = f.fft_size;
  j["num_bins"] = f.num_bins;
  j["low_freq_hz"] = f.low_freq_hz;
  j["high_freq_hz"] = f.high_freq_hz;
  j["preemphasis"] = f.preemphasis;
  j["energy_floor"] = f.energy_floor;
  return j;
}

FbankConfig fbank_from_json(const json& j) {
  FbankConfig f;
  f.sample_rate = j.value("sample_rate", f.sample_rate);
  f.frame_length_ms = j.value("frame_length_ms", f.frame_length_ms);
  f.frame_shift_ms = j.value("frame_shift_ms", f.frame_shift_ms);
  f.fft_size = j.value("fft_size", f.fft_size);
  f.num_bins = j.value("num_bins", f.num_bins);
  f.low_freq_hz = j.value("low_freq_hz", f.low_freq_hz);
  f.high_freq_hz = j.value("high_freq_hz", f.high_freq_hz);
  f.preemphasis = j.value("preemphasis", f.preemphasis);
  f.energy_floor = j.value("energy_floor", f.energy_floor);
  return f;
}

ordered_json augment_to_json(const AugmentPolicy& a) {
  ordered_json j;
  j["enabled"] = a.enabled;
  j["num_freq_masks"] = a.num_freq_masks;
  j["max_freq_width"] = a.max_freq_width;
  j["num_time_masks"] = a.num_time_masks;
  j["max_time_width"] = a.max_time_width;
  j["zero_fill"] = a.zero_fill;
  return j;
}

AugmentPolicy augment_from_json(const json& j) {
  AugmentPolicy a;
  a.enabled = j.value("enabled", a.enabled);
  a.num_freq_masks = j.value("num_freq_masks", a.num_freq_masks);
  a.max_freq_width = j.value("max_freq_width", a.max_freq_width);
  a.num_time_masks = j.value("num_time_masks", a.num_time_masks);
  a.max_time_width = j.value("max_time_width", a.max_time_width);
  a.zero_fill = j.value("zero_fill", a.zero_fill);
  return a;
}

}  // namespace

std::string model_config_to_json(const ModelConfig& cfg) {
  ordered_json j;
  j["frontend"] = fbank_to_json(cfg.frontend);
  j["augment"] = augment_to_json(cfg.augment);
  j["d_model"] = cfg.d_model;
  j["num_blocks"] = cfg.num_blocks;
  j["num_heads"] = cfg.num_heads;
  j["ff_expansion"] = cfg.ff_expansion;
  j["conv_kernel"] = cfg.conv_kernel;
  j["dropout"] = cfg.dropout;
  j["lstm_layers"] = cfg.lstm_layers;
  j["lstm_hidden"] = cfg.lstm_hidden;
  j["lstm_bidirectional"] = cfg.lstm_bidirectional;
  j["proj_dim"] = cfg.proj_dim;
  j["pooling"] = pooling_name(cfg.pooling);
  j["head_mode"] = head_mode_name(cfg.head_mode);
  std::vector<std::string> tags;
  for (StutterTag tag : cfg.tasks) tags.push_back(tag_name(tag));
  j["tasks"] = tags;
  return j.dump();
}

ModelConfig model_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  ModelConfig cfg;
  try {
    if (j.contains("frontend")) cfg.frontend = fbank_from_json(j["frontend"]);
    if (j.contains("augment")) cfg.augment = augment_from_json(j["augment"]);
    cfg.d_model = j.value("d_model", cfg.d_model);
    cfg.num_blocks = j.value("num_blocks", cfg.num_blocks);
    cfg.num_heads = j.value("num_heads", cfg.num_heads);
    cfg.ff_expansion = j.value("ff_expansion", cfg.ff_expansion);
    cfg.conv_kernel = j.value("conv_kernel", cfg.conv_kernel);
    cfg.dropout = j.value("dropout", cfg.dropout);
    cfg.lstm_layers = j.value("lstm_layers", cfg.lstm_layers);
    cfg.lstm_hidden = j.value("lstm_hidden", cfg.lstm_hidden);
    cfg.lstm_bidirectional =
        j.value("lstm_bidirectional", cfg.lstm_bidirectional);
    cfg.proj_dim = j.value("proj_dim", cfg.proj_dim);
    if (j.contains("pooling")) {
      cfg.pooling = pooling_from_name(j["pooling"].get<std::string>());
    }
    if (j.contains("head_mode")) {
      cfg.head_mode = head_mode_from_name(j["head_mode"].get<std::string>());
    }
    if (j.contains("tasks")) {
      cfg.tasks.clear();
      for (const auto& name : j["tasks"]) {
        cfg.tasks.push_back(tag_from_name(name.get<std::string>()));
      }
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  return cfg;
}

std::vector<std::pair<std::string, std::vector<int>>> parameter_spec(
    const ModelConfig& cfg) {
  cfg.validate();
  const int d = cfg.d_model;
  const int f1 = conv_out_len(cfg.frontend.num_bins, 3, 2, 0);
  const int f2 = conv_out_len(f1, 3, 2, 0);
  std::vector<std::pair<std::string, std::vector<int>>> spec;

  spec.push_back({"subsample.conv1.weight", {d, 1, 3, 3}});
  spec.push_back({"subsample.conv1.bias", {d}});
  spec.push_back({"subsample.conv2.weight", {d, d, 3, 3}});
  spec.push_back({"subsample.conv2.bias", {d}});
  spec.push_back({"subsample.proj.weight", {d * f2, d}});
  spec.push_back({"subsample.proj.bias", {d}});

  for (int i = 0; i < cfg.num_blocks; ++i) {
    const std::string b = "block" + std::to_string(i) + ".";
    for (const char* ffn : {"ffn1", "ffn2"}) {
      spec.push_back({b + ffn + ".norm.gamma", {d}});
      spec.push_back({b + ffn + ".norm.beta", {d}});
      spec.push_back({b + ffn + ".w1", {d, cfg.ff_expansion * d}});
      spec.push_back({b + ffn + ".b1", {cfg.ff_expansion * d}});
      spec.push_back({b + ffn + ".w2", {cfg.ff_expansion * d, d}});
      spec.push_back({b + ffn + ".b2", {d}});
    }
    spec.push_back({b + "attn.norm.gamma", {d}});
    spec.push_back({b + "attn.norm.beta", {d}});
    for (const char* proj : {"q", "k", "v", "out"}) {
      spec.push_back({b + "attn." + proj + ".weight", {d, d}});
      spec.push_back({b + "attn." + proj + ".bias", {d}});
    }
    spec.push_back({b + "conv.norm.gamma", {d}});
    spec.push_back({b + "conv.norm.beta", {d}});
    spec.push_back({b + "conv.pw1.weight", {d, 2 * d}});
    spec.push_back({b + "conv.pw1.bias", {2 * d}});
    spec.push_back({b + "conv.dw.weight", {d, cfg.conv_kernel}});
    spec.push_back({b + "conv.dw.bias", {d}});
    spec.push_back({b + "conv.mid_norm.gamma", {d}});
    spec.push_back({b + "conv.mid_norm.beta", {d}});
    spec.push_back({b + "conv.pw2.weight", {d, d}});
    spec.push_back({b + "conv.pw2.bias", {d}});
    spec.push_back({b + "final_norm.gamma", {d}});
    spec.push_back({b + "final_norm.beta", {d}});
  }

  const int h = cfg.lstm_hidden;
  for (int l = 0; l < cfg.lstm_layers; ++l) {
    const std::string b = "lstm" + std::to_string(l) + ".";
    const int in = l == 0 ? d : cfg.lstm_output_dim();
    spec.push_back({b + "fwd.wx", {in, 4 * h}});
    spec.push_back({b + "fwd.wh", {h, 4 * h}});
    spec.push_back({b + "fwd.bias", {4 * h}});
    if (cfg.lstm_bidirectional) {
      spec.push_back({b + "bwd.wx", {in, 4 * h}});
      spec.push_back({b + "bwd.wh", {h, 4 * h}});
      spec.push_back({b + "bwd.bias", {4 * h}});
    }
  }

  spec.push_back({"proj.weight", {cfg.lstm_output_dim(), cfg.proj_dim}});
  spec.push_back({"proj.bias", {cfg.proj_dim}});

  const int logits = cfg.logits_per_task();
  for (StutterTag tag : cfg.tasks) {
    const std::string b = "head." + tag_key(tag) + ".";
    spec.push_back({b + "weight", {cfg.proj_dim, logits}});
    spec.push_back({b + "bias", {logits}});
  }
  return spec;
}

std::int64_t count_parameters(const ModelConfig& cfg) {
  std::int64_t total = 0;
  for (const auto& [name, shape] : parameter_spec(cfg)) {
    std::int64_t n = 1;
    for (int e : shape) n *= e;
    total += n;
  }
  return total;
}

}  // namespace sedkit
