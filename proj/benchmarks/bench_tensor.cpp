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
#include "sedkit/tensor.hpp"

namespace {

using sedkit::OpContext;
using sedkit::Tape;
using sedkit::Tensor;

Tensor random_tensor(std::vector<int> shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return Tensor::uniform(std::move(shape), -1.0f, 1.0f, rng);
}

void BM_MatmulForward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto a = random_tensor({n, n}, 1);
  auto b = random_tensor({n, n}, 2);
  OpContext ctx;
  for (auto _ : state) {
    auto c = sedkit::matmul(ctx, a, b);
    benchmark::DoNotOptimize(c.values().data());
  }
  state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}
BENCHMARK(BM_MatmulForward)->Arg(64)->Arg(128)->Arg(256);

void BM_MatmulTrain(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto a = random_tensor({n, n}, 1);
  auto b = random_tensor({n, n}, 2);
  a.set_requires_grad(true);
  b.set_requires_grad(true);
  for (auto _ : state) {
    Tape tape;
    OpContext ctx;
    ctx.tape = &tape;
    ctx.training = true;
    auto loss = sedkit::mean_all(ctx, sedkit::matmul(ctx, a, b));
    sedkit::backward(tape, loss);
    a.zero_grad();
    b.zero_grad();
    benchmark::DoNotOptimize(loss.item());
  }
}
BENCHMARK(BM_MatmulTrain)->Arg(64)->Arg(128);

void BM_BceLoss(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  sedkit::LossBatch batch;
  batch.logits = random_tensor({n, 10}, 7);
  batch.mode = sedkit::HeadMode::kTwoLogit;
  std::mt19937_64 rng(9);
  for (int i = 0; i < n * 5; ++i) {
    batch.labels.push_back(static_cast<std::uint8_t>(rng() & 1));
  }
  OpContext ctx;
  for (auto _ : state) {
    auto loss = sedkit::bce_with_logits(ctx, batch);
    benchmark::DoNotOptimize(loss.item());
  }
}
BENCHMARK(BM_BceLoss)->Arg(16)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
