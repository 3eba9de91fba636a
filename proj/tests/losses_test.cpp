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

// Loss tests: scalar-loop oracles in textbook (unstable) form, the ln 2
// anchors, the focal-to-BCE reduction, weighting semantics, analytic
// gradients against central differences, and class-weight computation.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "sedkit/losses.hpp"

namespace {

using sedkit::HeadMode;
using sedkit::StutterTag;
using TensorD = sedkit::TensorT<double>;
using TapeD = sedkit::TapeT<double>;
using CtxD = sedkit::OpContextT<double>;
using BatchD = sedkit::LossBatchT<double>;

double sigmoid(double p) { return 1.0 / (1.0 + std::exp(-p)); }

// Textbook BCE, numerically naive on purpose: an independent oracle for
// moderate logits.
double naive_bce(double p, double y) {
  const double s = sigmoid(p);
  return -(y * std::log(s) + (1.0 - y) * std::log(1.0 - s));
}

double naive_focal(double p, bool positive, double gamma, double a) {
  const double s = sigmoid(p);
  const double pt = positive ? s : 1.0 - s;
  return -a * std::pow(1.0 - pt, gamma) * std::log(pt);
}

BatchD random_batch(int n, int k, HeadMode mode, unsigned seed,
                    double logit_range = 6.0) {
  std::mt19937 rng(seed);
  const int cols = mode == HeadMode::kTwoLogit ? 2 * k : k;
  BatchD batch;
  batch.mode = mode;
  batch.logits = TensorD::uniform({n, cols}, -logit_range, logit_range, rng);
  batch.labels.resize(static_cast<std::size_t>(n) * k);
  std::bernoulli_distribution coin(0.5);
  for (auto& y : batch.labels) y = coin(rng) ? 1 : 0;
  return batch;
}

double oracle_bce(const BatchD& batch) {
  const int n = batch.logits.extent(0);
  const int k = static_cast<int>(batch.labels.size()) / n;
  const bool two = batch.mode == HeadMode::kTwoLogit;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < k; ++t) {
      const double y = batch.labels[static_cast<std::size_t>(i) * k + t];
      const double w =
          batch.pos_weight.empty() || y == 0.0 ? 1.0 : batch.pos_weight[t];
      if (two) {
        const double p0 = batch.logits.values()[i * 2 * k + 2 * t];
        const double p1 = batch.logits.values()[i * 2 * k + 2 * t + 1];
        total += w * (naive_bce(p0, 1.0 - y) + naive_bce(p1, y));
      } else {
        total += w * naive_bce(batch.logits.values()[i * k + t], y);
      }
    }
  }
  return total / (static_cast<double>(n) * k * (two ? 2 : 1));
}

// Central-difference check over a loss functional of the logits tensor.
template <typename Fn>
double loss_grad_err(BatchD& batch, Fn&& loss_of) {
  batch.logits.set_requires_grad(true);
  TapeD tape;
  CtxD ctx{&tape};
  TensorD loss = loss_of(ctx, batch);
  sedkit::backward(tape, loss);

  double worst = 0.0;
  auto vals = batch.logits.values();
  auto grads = batch.logits.grad();
  const double h = 1e-5;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double saved = vals[i];
    CtxD fwd;
    vals[i] = saved + h;
    const double up = loss_of(fwd, batch).item();
    vals[i] = saved - h;
    const double dn = loss_of(fwd, batch).item();
    vals[i] = saved;
    const double numeric = (up - dn) / (2.0 * h);
    const double err = std::abs(grads[i] - numeric) /
                       std::max({std::abs(grads[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace

// ---------------------------------------------------------------------------
// BCE.

TEST_CASE("bce matches the scalar oracle in both head modes") {
  for (unsigned seed = 0; seed < 50; ++seed) {
    BatchD one = random_batch(5, 3, HeadMode::kOneLogit, 100 + seed);
    CtxD ctx;
    CHECK(sedkit::bce_with_logits(ctx, one).item() ==
          doctest::Approx(oracle_bce(one)).epsilon(1e-9));

    BatchD two = random_batch(4, 5, HeadMode::kTwoLogit, 200 + seed);
    CHECK(sedkit::bce_with_logits(ctx, two).item() ==
          doctest::Approx(oracle_bce(two)).epsilon(1e-9));
  }
}

TEST_CASE("all-zero logits give exactly ln 2") {
  CtxD ctx;
  BatchD two;
  two.mode = HeadMode::kTwoLogit;
  two.logits = TensorD::full({3, 10}, 0.0);
  two.labels.assign(15, 0);
  two.labels[4] = 1;
  two.labels[11] = 1;
  CHECK(std::abs(sedkit::bce_with_logits(ctx, two).item() - std::log(2.0)) <
        1e-12);

  BatchD one;
  one.mode = HeadMode::kOneLogit;
  one.logits = TensorD::full({3, 5}, 0.0);
  one.labels.assign(15, 1);
  CHECK(std::abs(sedkit::bce_with_logits(ctx, one).item() - std::log(2.0)) <
        1e-12);
}

TEST_CASE("bce stays finite at extreme logits") {
  CtxD ctx;
  BatchD b;
  b.mode = HeadMode::kOneLogit;
  b.logits = TensorD({1, 2}, {2000.0, -2000.0});
  b.labels = {0, 1};
  const double loss = sedkit::bce_with_logits(ctx, b).item();
  CHECK(std::isfinite(loss));
  CHECK(loss == doctest::Approx(2000.0).epsilon(1e-9));  // mean of 2000+2000
}

TEST_CASE("pos_weight scales positive entries only") {
  CtxD ctx;
  BatchD b;
  b.mode = HeadMode::kOneLogit;
  b.logits = TensorD({1, 2}, {0.7, -1.3});
  b.labels = {1, 0};
  b.pos_weight = {3.0, 3.0};
  const double want = (3.0 * naive_bce(0.7, 1.0) + naive_bce(-1.3, 0.0)) / 2.0;
  CHECK(sedkit::bce_with_logits(ctx, b).item() ==
        doctest::Approx(want).epsilon(1e-12));

  // Two-logit: the weight covers both expanded entries of a positive pair.
  BatchD t;
  t.mode = HeadMode::kTwoLogit;
  t.logits = TensorD({1, 4}, {0.2, 0.9, -0.4, 0.3});
  t.labels = {1, 0};
  t.pos_weight = {2.0, 2.0};
  const double want2 = (2.0 * (naive_bce(0.2, 0.0) + naive_bce(0.9, 1.0)) +
                        naive_bce(-0.4, 1.0) + naive_bce(0.3, 0.0)) /
                       4.0;
  CHECK(sedkit::bce_with_logits(ctx, t).item() ==
        doctest::Approx(want2).epsilon(1e-12));
}

TEST_CASE("gradcheck: bce in both modes, with and without weights") {
  BatchD one = random_batch(4, 3, HeadMode::kOneLogit, 11);
  CHECK(loss_grad_err(one, [](CtxD& c, const BatchD& b) {
          return sedkit::bce_with_logits(c, b);
        }) < 1e-3);

  BatchD two = random_batch(3, 4, HeadMode::kTwoLogit, 12);
  two.pos_weight = {1.0, 2.5, 4.0, 1.5};
  CHECK(loss_grad_err(two, [](CtxD& c, const BatchD& b) {
          return sedkit::bce_with_logits(c, b);
        }) < 1e-3);
}

// ---------------------------------------------------------------------------
// Focal.

TEST_CASE("focal with gamma 0 and no alpha equals bce exactly") {
  CtxD ctx;
  for (unsigned seed = 0; seed < 20; ++seed) {
    BatchD b = random_batch(4, 5, seed % 2 ? HeadMode::kTwoLogit
                                           : HeadMode::kOneLogit,
                            300 + seed);
    const double bce = sedkit::bce_with_logits(ctx, b).item();
    const double focal =
        sedkit::focal_loss<double>(ctx, b, 0.0, std::nullopt).item();
    CHECK(std::abs(bce - focal) < 1e-12);
  }
}

TEST_CASE("focal matches the textbook formula with gamma and alpha") {
  CtxD ctx;
  BatchD b = random_batch(6, 3, HeadMode::kOneLogit, 400);
  const double gamma = 2.0, alpha = 0.25;
  double want = 0.0;
  for (int i = 0; i < 6; ++i) {
    for (int t = 0; t < 3; ++t) {
      const bool y = b.labels[static_cast<std::size_t>(i) * 3 + t] != 0;
      want += naive_focal(b.logits.values()[i * 3 + t], y, gamma,
                          y ? alpha : 1.0 - alpha);
    }
  }
  want /= 18.0;
  CHECK(sedkit::focal_loss<double>(ctx, b, gamma, alpha).item() ==
        doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("focal two-logit entries follow their own expanded targets") {
  CtxD ctx;
  BatchD b;
  b.mode = HeadMode::kTwoLogit;
  b.logits = TensorD({1, 2}, {0.8, -0.6});
  b.labels = {1};  // positive pair: entry 0 target 0, entry 1 target 1
  const double gamma = 1.5, alpha = 0.3;
  // Entry 0's own target is "absent" = 0, so its alpha_t is 1 - alpha... as
  // seen from its expanded label (0 at entry 0 means "not its class").
  const double want = (naive_focal(0.8, false, gamma, 1.0 - alpha) +
                       naive_focal(-0.6, true, gamma, alpha)) /
                      2.0;
  CHECK(sedkit::focal_loss<double>(ctx, b, gamma, alpha).item() ==
        doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("focal validates gamma and alpha") {
  CtxD ctx;
  BatchD b = random_batch(2, 2, HeadMode::kOneLogit, 1);
  CHECK_THROWS_AS(sedkit::focal_loss<double>(ctx, b, -1.0, std::nullopt),
                  sedkit::ConfigError);
  CHECK_THROWS_AS(sedkit::focal_loss<double>(ctx, b, 2.0, 0.0), sedkit::ConfigError);
  CHECK_THROWS_AS(sedkit::focal_loss<double>(ctx, b, 2.0, 1.5), sedkit::ConfigError);
}

TEST_CASE("gradcheck: focal with gamma, alpha, and weights") {
  BatchD b = random_batch(3, 4, HeadMode::kTwoLogit, 13);
  b.pos_weight = {2.0, 1.0, 3.0, 1.5};
  CHECK(loss_grad_err(b, [](CtxD& c, const BatchD& batch) {
          return sedkit::focal_loss<double>(c, batch, 2.0,
                                    std::optional<double>(0.25));
        }) < 1e-3);

  BatchD one = random_batch(4, 2, HeadMode::kOneLogit, 14);
  CHECK(loss_grad_err(one, [](CtxD& c, const BatchD& batch) {
          return sedkit::focal_loss<double>(c, batch, 1.0, std::nullopt);
        }) < 1e-3);
}

// ---------------------------------------------------------------------------
// Pair softmax.

TEST_CASE("pair_softmax is the two-way cross-entropy over each pair") {
  CtxD ctx;
  BatchD b = random_batch(5, 3, HeadMode::kTwoLogit, 500);
  double want = 0.0;
  for (int i = 0; i < 5; ++i) {
    for (int t = 0; t < 3; ++t) {
      const bool y = b.labels[static_cast<std::size_t>(i) * 3 + t] != 0;
      const double p0 = b.logits.values()[i * 6 + 2 * t];
      const double p1 = b.logits.values()[i * 6 + 2 * t + 1];
      const double z = std::log(std::exp(p0) + std::exp(p1));
      want += z - (y ? p1 : p0);  // -log softmax[target]
    }
  }
  want /= 15.0;
  CHECK(sedkit::pair_softmax_loss(ctx, b).item() ==
        doctest::Approx(want).epsilon(1e-9));

  BatchD zeros;
  zeros.mode = HeadMode::kTwoLogit;
  zeros.logits = TensorD::full({2, 4}, 0.0);
  zeros.labels = {0, 1, 1, 0};
  CHECK(std::abs(sedkit::pair_softmax_loss(ctx, zeros).item() -
                 std::log(2.0)) < 1e-12);

  BatchD one = random_batch(2, 2, HeadMode::kOneLogit, 501);
  CHECK_THROWS_AS(sedkit::pair_softmax_loss(ctx, one),
                  sedkit::ContractError);
}

TEST_CASE("gradcheck: pair_softmax") {
  BatchD b = random_batch(4, 3, HeadMode::kTwoLogit, 15);
  b.pos_weight = {1.0, 2.0, 0.5};
  CHECK(loss_grad_err(b, [](CtxD& c, const BatchD& batch) {
          return sedkit::pair_softmax_loss(c, batch);
        }) < 1e-3);
}

// ---------------------------------------------------------------------------
// Batch validation.

TEST_CASE("loss batches are validated before use") {
  CtxD ctx;
  BatchD b;
  b.mode = HeadMode::kOneLogit;
  b.logits = TensorD({2, 3}, std::vector<double>(6, 0.0));
  b.labels = {0, 1, 0, 1};  // 4 labels for 2 rows -> k = 2, but 3 columns
  CHECK_THROWS_AS(sedkit::bce_with_logits(ctx, b), sedkit::ShapeError);

  b.labels = {0, 1, 2, 0, 1, 0};
  CHECK_THROWS_AS(sedkit::bce_with_logits(ctx, b), sedkit::ContractError);

  b.labels = {0, 1, 1, 0, 1, 0};
  b.pos_weight = {1.0, 2.0};  // 2 weights for 3 tasks
  CHECK_THROWS_AS(sedkit::bce_with_logits(ctx, b), sedkit::ShapeError);

  BatchD empty;
  empty.mode = HeadMode::kOneLogit;
  empty.logits = TensorD({2, 2}, std::vector<double>(4, 0.0));
  CHECK_THROWS_AS(sedkit::bce_with_logits(ctx, empty),
                  sedkit::ContractError);
}

// ---------------------------------------------------------------------------
// Class weights.

namespace {

sedkit::ClipRecord record_with(const sedkit::LabelVector& labels, int n) {
  sedkit::ClipRecord rec;
  rec.id = "c" + std::to_string(n);
  rec.audio = rec.id + ".wav";
  rec.speaker = "s";
  rec.labels = labels;
  return rec;
}

}  // namespace

TEST_CASE("class_weights clamps the negative/positive ratio into [1, 50]") {
  std::vector<sedkit::ClipRecord> records;
  // /p positive in 2 of 10 -> 8/2 = 4; /b positive in 8 of 10 -> 0.25 -> 1;
  // /r positive in 0 of 10 -> 50 with a warning.
  for (int i = 0; i < 10; ++i) {
    sedkit::LabelVector l{};
    l[0] = i < 2;
    l[1] = i < 8;
    l[2] = 0;
    l[3] = 1;
    l[4] = i == 0;
    records.push_back(record_with(l, i));
  }
  std::vector<std::string> warnings;
  auto w = sedkit::class_weights(records, sedkit::parse_task_subset("five"),
                                 &warnings);
  REQUIRE(w.size() == 5u);
  CHECK(w[0] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(w[1] == 1.0);
  CHECK(w[2] == 50.0);
  CHECK(w[3] == 1.0);  // all positive -> ratio 0 -> clamped up to 1
  CHECK(w[4] == doctest::Approx(9.0).epsilon(1e-12));
  REQUIRE(warnings.size() == 1u);
  CHECK(warnings[0].find("/r") != std::string::npos);

  auto single = sedkit::class_weights(records, {StutterTag::kInterjection});
  REQUIRE(single.size() == 1u);
  CHECK(single[0] == doctest::Approx(9.0).epsilon(1e-12));

  CHECK_THROWS_AS(sedkit::class_weights({},
                                        sedkit::parse_task_subset("five")),
                  sedkit::DataError);
}
