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

#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "sedkit/fbank.hpp"
#include "sedkit/specaugment.hpp"

namespace {

sedkit::Waveform noise_clip(double seconds) {
  sedkit::Waveform wav;
  wav.sample_rate = 16000;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<float> dist(-0.5f, 0.5f);
  wav.samples.resize(static_cast<std::size_t>(seconds * wav.sample_rate));
  for (auto& s : wav.samples) s = dist(rng);
  return wav;
}

void BM_Fbank(benchmark::State& state) {
  const auto wav = noise_clip(static_cast<double>(state.range(0)));
  sedkit::FbankConfig cfg;
  for (auto _ : state) {
    auto feats = sedkit::compute_fbank(wav, cfg);
    benchmark::DoNotOptimize(feats.data.data());
  }
}
BENCHMARK(BM_Fbank)->Arg(1)->Arg(3)->Arg(10);

void BM_SpecAugment(benchmark::State& state) {
  const auto wav = noise_clip(3.0);
  sedkit::FbankConfig cfg;
  const auto feats = sedkit::compute_fbank(wav, cfg);
  sedkit::AugmentPolicy policy;
  policy.enabled = true;
  std::mt19937 rng(5);
  for (auto _ : state) {
    auto local = feats;
    sedkit::AugmentTrace trace;
    sedkit::spec_augment(local, policy, rng, &trace);
    benchmark::DoNotOptimize(local.data.data());
    benchmark::DoNotOptimize(&trace);
  }
}
BENCHMARK(BM_SpecAugment);

}  // namespace
