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
//
// Checkpoint container.  Little-endian binary layout:
//   magic "SEDK" | u32 version | u32 json_len | config JSON (UTF-8)
//   then per tensor record:
//   u32 name_len | name | u8 rank | u32 extent per axis | f32 data row-major
// Optimizer moments ride along as records named "optim.m/<param>" and
// "optim.v/<param>"; their presence is declared in the JSON header.

#ifndef SEDKIT_CHECKPOINT_HPP_
#define SEDKIT_CHECKPOINT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sedkit/adam.hpp"
#include "sedkit/model.hpp"

namespace sedkit {

struct NamedArray {
  std::string name;
  std::vector<int> shape;
  std::vector<float> data;
};

struct AdamSnapshot {
  AdamConfig config;
  std::int64_t steps = 0;
  std::vector<NamedArray> m, v;  // parallel to params, same names
};

struct Checkpoint {
  std::uint32_t version = 1;
  ModelConfig model;
  int epoch = 0;                  // epoch the weights were taken from, 1-based
  double best_dev_f1_final = 0.0;
  std::vector<NamedArray> params;
  std::optional<AdamSnapshot> adam;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

// Raises ParseError on truncation, FormatError on bad magic or an
// unsupported version.
Checkpoint load_checkpoint(const std::string& path);

template <typename Real>
Checkpoint checkpoint_from_model(const ModelT<Real>& model) {
  Checkpoint ckpt;
  ckpt.model = model.config();
  for (auto& [name, pair] : model.export_arrays()) {
    ckpt.params.push_back({name, pair.first, std::move(pair.second)});
  }
  return ckpt;
}

template <typename Real>
ModelT<Real> model_from_checkpoint(const Checkpoint& ckpt) {
  std::vector<std::pair<std::string,
                        std::pair<std::vector<int>, std::vector<float>>>>
      arrays;
  arrays.reserve(ckpt.params.size());
  for (const auto& arr : ckpt.params) {
    arrays.push_back({arr.name, {arr.shape, arr.data}});
  }
  return ModelT<Real>(ckpt.model, arrays);
}

}  // namespace sedkit

#endif  // SEDKIT_CHECKPOINT_HPP_
