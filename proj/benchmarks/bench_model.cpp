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

#include <random>

#include <benchmark/benchmark.h>

#include "sedkit/losses.hpp"
#include "sedkit/model.hpp"

namespace {

sedkit::ModelConfig tiny_config() {
  sedkit::ModelConfig cfg;
  cfg.d_model = 64;
  cfg.num_blocks = 2;
  cfg.num_heads = 4;
  cfg.ff_expansion = 2;
  cfg.conv_kernel = 7;
  cfg.dropout = 0.1;
  cfg.lstm_layers = 1;
  cfg.lstm_hidden = 32;
  cfg.proj_dim = 32;
  return cfg;
}

sedkit::FeatureMatrix random_features(int frames, int bins) {
  sedkit::FeatureMatrix feats;
  feats.num_frames = frames;
  feats.num_bins = bins;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> dist(-4.0f, 4.0f);
  feats.data.resize(static_cast<std::size_t>(frames) * bins);
  for (auto& v : feats.data) v = dist(rng);
  return feats;
}

void BM_TinyModelForward(benchmark::State& state) {
  sedkit::Model model(tiny_config(), 17);
  const auto feats =
      random_features(static_cast<int>(state.range(0)), 80);
  for (auto _ : state) {
    sedkit::OpContext ctx;
    auto logits = model.forward(feats, ctx);
    benchmark::DoNotOptimize(logits.values().data());
  }
}
BENCHMARK(BM_TinyModelForward)->Arg(98)->Arg(198);

void BM_TinyModelTrainStep(benchmark::State& state) {
  sedkit::Model model(tiny_config(), 17);
  const auto feats = random_features(98, 80);
  std::vector<std::uint8_t> labels = {1, 0, 1, 0, 0};
  for (auto _ : state) {
    sedkit::Tape tape;
    sedkit::OpContext ctx;
    ctx.tape = &tape;
    ctx.training = true;
    auto logits = model.forward(feats, ctx);
    sedkit::LossBatch batch;
    batch.logits = sedkit::reshape(ctx, logits, {1, 10});
    batch.labels = labels;
    auto loss = sedkit::bce_with_logits(ctx, batch);
    sedkit::backward(tape, loss);
    model.params().zero_grad_all();
    benchmark::DoNotOptimize(loss.item());
  }
}
BENCHMARK(BM_TinyModelTrainStep);

}  // namespace
