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
// Classification losses over per-task logits.  All three losses reduce by
// the mean over entries and are recorded on the tape as a single node with
// analytic gradients in numerically safe (softplus/sigmoid) form.

#ifndef SEDKIT_LOSSES_HPP_
#define SEDKIT_LOSSES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sedkit/manifest.hpp"
#include "sedkit/model.hpp"
#include "sedkit/tensor.hpp"

namespace sedkit {

// A batch of logits with targets.  logits is [N x K] for one-logit heads or
// [N x 2K] for two-logit heads (task-major pairs: columns 2k, 2k+1).
// labels is N*K row-major in {0,1}.  pos_weight is empty (all ones) or one
// positive-class weight per task; under two-logit heads the weight applies
// to both expanded entries of a positive pair.
template <typename Real>
struct LossBatchT {
  TensorT<Real> logits;
  HeadMode mode = HeadMode::kTwoLogit;
  std::vector<std::uint8_t> labels;
  std::vector<Real> pos_weight;
};

using LossBatch = LossBatchT<float>;

// Binary cross-entropy on logits, computed as
//   max(p,0) - p*y + log(1 + exp(-|p|))
// so large logits never overflow.  Two-logit pairs are expanded to one-hot
// targets ((1-y), y), making the all-zero-logit loss exactly log 2.
template <typename Real>
TensorT<Real> bce_with_logits(OpContextT<Real>& ctx,
                              const LossBatchT<Real>& batch);

// Focal loss alpha_t * (1 - p_t)^gamma * (-log p_t).  alpha == nullopt
// means alpha_t = 1 for both classes, so gamma = 0 reduces exactly to
// bce_with_logits.  When pos_weight is set it scales positive entries on
// top of alpha_t.
template <typename Real>
TensorT<Real> focal_loss(OpContextT<Real>& ctx, const LossBatchT<Real>& batch,
                         Real gamma, std::optional<Real> alpha);

// Alternative training objective for two-logit heads: each pair is a
// two-way softmax cross-entropy (mean over pairs).  One-logit batches are a
// ContractError.
template <typename Real>
TensorT<Real> pair_softmax_loss(OpContextT<Real>& ctx,
                                const LossBatchT<Real>& batch);

// Per-task positive-class weights over a training set:
// clamp(negatives/positives, 1, 50); a task with no positives gets 50 and
// a warning.
std::vector<double> class_weights(const std::vector<ClipRecord>& records,
                                  const TaskSubset& subset,
                                  std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// Implementation.

namespace detail {

template <typename Real>
void check_loss_batch(const LossBatchT<Real>& batch, int* n_out, int* k_out) {
  check_rank(batch.logits.shape(), 2, "loss");
  const int n = batch.logits.extent(0);
  const int cols = batch.logits.extent(1);
  if (n == 0 || batch.labels.empty() ||
      batch.labels.size() % static_cast<std::size_t>(n) != 0) {
    throw ContractError("loss: " + std::to_string(batch.labels.size()) +
                        " labels for " + std::to_string(n) + " rows");
  }
  const int k = static_cast<int>(batch.labels.size()) / n;
  const int want = batch.mode == HeadMode::kTwoLogit ? 2 * k : k;
  if (cols != want) {
    throw ShapeError("loss: logits " + format_shape(batch.logits.shape()) +
                     " for " + std::to_string(k) + " tasks in " +
                     (batch.mode == HeadMode::kTwoLogit ? "two" : "one") +
                     "-logit mode");
  }
  for (auto y : batch.labels) {
    if (y > 1) throw ContractError("loss: labels must be 0 or 1");
  }
  if (!batch.pos_weight.empty() &&
      batch.pos_weight.size() != static_cast<std::size_t>(k)) {
    throw ShapeError("loss: " + std::to_string(batch.pos_weight.size()) +
                     " weights for " + std::to_string(k) + " tasks");
  }
  *n_out = n;
  *k_out = k;
}

template <typename Real>
inline Real bce_entry(Real p, Real y) {
  return std::max(p, Real(0)) - p * y + std::log1p(std::exp(-std::abs(p)));
}

}  // namespace detail

template <typename Real>
TensorT<Real> bce_with_logits(OpContextT<Real>& ctx,
                              const LossBatchT<Real>& batch) {
  int n = 0, k = 0;
  detail::check_loss_batch(batch, &n, &k);
  const bool two = batch.mode == HeadMode::kTwoLogit;
  const int per = two ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(n) * k * per;
  auto lv = batch.logits.values();
  Real total = Real(0);
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < k; ++t) {
      const Real y =
          static_cast<Real>(batch.labels[static_cast<std::size_t>(i) * k + t]);
      const Real w = batch.pos_weight.empty() || y == Real(0)
                         ? Real(1)
                         : batch.pos_weight[t];
      if (two) {
        const Real p0 = lv[static_cast<std::size_t>(i) * 2 * k + 2 * t];
        const Real p1 = lv[static_cast<std::size_t>(i) * 2 * k + 2 * t + 1];
        total += w * (detail::bce_entry(p0, Real(1) - y) +
                      detail::bce_entry(p1, y));
      } else {
        const Real p = lv[static_cast<std::size_t>(i) * k + t];
        total += w * detail::bce_entry(p, y);
      }
    }
  }
  TensorT<Real> out({1});
  out.values()[0] = total / Real(count);
  if (ctx.taping(batch.logits)) {
    out.set_requires_grad(true);
    auto logits = batch.logits;
    auto labels = batch.labels;
    auto weights = batch.pos_weight;
    ctx.tape->record("bce_with_logits",
                     [logits, labels, weights, out, n, k, two,
                      count]() mutable {
      const Real g = out.grad()[0] / Real(count);
      auto lv = logits.values();
      auto gl = logits.grad();
      for (int i = 0; i < n; ++i) {
        for (int t = 0; t < k; ++t) {
          const Real y = static_cast<Real>(
              labels[static_cast<std::size_t>(i) * k + t]);
          const Real w =
              weights.empty() || y == Real(0) ? Real(1) : weights[t];
          if (two) {
            const std::size_t off =
                static_cast<std::size_t>(i) * 2 * k + 2 * t;
            gl[off] += g * w * (detail::sigmoid(lv[off]) - (Real(1) - y));
            gl[off + 1] += g * w * (detail::sigmoid(lv[off + 1]) - y);
          } else {
            const std::size_t off = static_cast<std::size_t>(i) * k + t;
            gl[off] += g * w * (detail::sigmoid(lv[off]) - y);
          }
        }
      }
    });
  }
  return out;
}

namespace detail {

// Focal terms for one entry, in the form that stays finite for any logit:
//   y=1: a * (1-s)^g * softplus(-p),  d/dp = a*(1-s)^g * (-g*s*SP - (1-s))
//   y=0: a * s^g * softplus(p),       d/dp = a*s^g * (g*(1-s)*SP + s)
template <typename Real>
inline void focal_entry(Real p, bool positive, Real gamma, Real a, Real* loss,
                        Real* dloss) {
  const Real s = sigmoid(p);
  if (positive) {
    const Real sp = softplus(-p);
    const Real mod = static_cast<Real>(
        std::pow(static_cast<double>(Real(1) - s), static_cast<double>(gamma)));
    *loss = a * mod * sp;
    *dloss = a * mod * (-gamma * s * sp - (Real(1) - s));
  } else {
    const Real sp = softplus(p);
    const Real mod = static_cast<Real>(
        std::pow(static_cast<double>(s), static_cast<double>(gamma)));
    *loss = a * mod * sp;
    *dloss = a * mod * (gamma * (Real(1) - s) * sp + s);
  }
}

}  // namespace detail

template <typename Real>
TensorT<Real> focal_loss(OpContextT<Real>& ctx, const LossBatchT<Real>& batch,
                         Real gamma, std::optional<Real> alpha) {
  if (gamma < Real(0)) throw ConfigError("focal: gamma must be >= 0");
  if (alpha && !(*alpha > Real(0) && *alpha <= Real(1))) {
    throw ConfigError("focal: alpha must be in (0,1]");
  }
  int n = 0, k = 0;
  detail::check_loss_batch(batch, &n, &k);
  const bool two = batch.mode == HeadMode::kTwoLogit;
  const int per = two ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(n) * k * per;
  const Real a_pos = alpha ? *alpha : Real(1);
  const Real a_neg = alpha ? Real(1) - *alpha : Real(1);

  auto lv = batch.logits.values();
  auto eval = [&](std::span<Real> grads, Real gscale) -> Real {
    Real total = Real(0), loss, dloss;
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < k; ++t) {
        const bool y =
            batch.labels[static_cast<std::size_t>(i) * k + t] != 0;
        const Real w =
            batch.pos_weight.empty() || !y ? Real(1) : batch.pos_weight[t];
        if (two) {
          const std::size_t off = static_cast<std::size_t>(i) * 2 * k + 2 * t;
          // Expanded targets: entry 0 is "event absent", entry 1 "present".
          detail::focal_entry(lv[off], !y, gamma, w * (!y ? a_pos : a_neg),
                              &loss, &dloss);
          total += loss;
          if (!grads.empty()) grads[off] += gscale * dloss;
          detail::focal_entry(lv[off + 1], y, gamma, w * (y ? a_pos : a_neg),
                              &loss, &dloss);
          total += loss;
          if (!grads.empty()) grads[off + 1] += gscale * dloss;
        } else {
          const std::size_t off = static_cast<std::size_t>(i) * k + t;
          detail::focal_entry(lv[off], y, gamma, w * (y ? a_pos : a_neg),
                              &loss, &dloss);
          total += loss;
          if (!grads.empty()) grads[off] += gscale * dloss;
        }
      }
    }
    return total;
  };

  TensorT<Real> out({1});
  out.values()[0] = eval({}, Real(0)) / Real(count);
  if (ctx.taping(batch.logits)) {
    out.set_requires_grad(true);
    auto logits = batch.logits;
    auto b = batch;
    ctx.tape->record("focal_loss",
                     [b, logits, out, n, k, two, count, gamma, a_pos,
                      a_neg]() mutable {
      const Real g = out.grad()[0] / Real(count);
      auto lv = logits.values();
      auto gl = logits.grad();
      Real loss, dloss;
      for (int i = 0; i < n; ++i) {
        for (int t = 0; t < k; ++t) {
          const bool y = b.labels[static_cast<std::size_t>(i) * k + t] != 0;
          const Real w =
              b.pos_weight.empty() || !y ? Real(1) : b.pos_weight[t];
          if (two) {
            const std::size_t off =
                static_cast<std::size_t>(i) * 2 * k + 2 * t;
            detail::focal_entry(lv[off], !y, gamma, w * (!y ? a_pos : a_neg),
                                &loss, &dloss);
            gl[off] += g * dloss;
            detail::focal_entry(lv[off + 1], y, gamma,
                                w * (y ? a_pos : a_neg), &loss, &dloss);
            gl[off + 1] += g * dloss;
          } else {
            const std::size_t off = static_cast<std::size_t>(i) * k + t;
            detail::focal_entry(lv[off], y, gamma, w * (y ? a_pos : a_neg),
                                &loss, &dloss);
            gl[off] += g * dloss;
          }
        }
      }
    });
  }
  return out;
}

template <typename Real>
TensorT<Real> pair_softmax_loss(OpContextT<Real>& ctx,
                                const LossBatchT<Real>& batch) {
  if (batch.mode != HeadMode::kTwoLogit) {
    throw ContractError("pair_softmax_loss requires two-logit heads");
  }
  int n = 0, k = 0;
  detail::check_loss_batch(batch, &n, &k);
  const std::size_t count = static_cast<std::size_t>(n) * k;
  auto lv = batch.logits.values();
  Real total = Real(0);
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < k; ++t) {
      const bool y = batch.labels[static_cast<std::size_t>(i) * k + t] != 0;
      const Real w =
          batch.pos_weight.empty() || !y ? Real(1) : batch.pos_weight[t];
      const std::size_t off = static_cast<std::size_t>(i) * 2 * k + 2 * t;
      const Real margin =
          y ? lv[off] - lv[off + 1] : lv[off + 1] - lv[off];
      total += w * detail::softplus(margin);
    }
  }
  TensorT<Real> out({1});
  out.values()[0] = total / Real(count);
  if (ctx.taping(batch.logits)) {
    out.set_requires_grad(true);
    auto logits = batch.logits;
    auto labels = batch.labels;
    auto weights = batch.pos_weight;
    ctx.tape->record("pair_softmax_loss",
                     [logits, labels, weights, out, n, k, count]() mutable {
      const Real g = out.grad()[0] / Real(count);
      auto lv = logits.values();
      auto gl = logits.grad();
      for (int i = 0; i < n; ++i) {
        for (int t = 0; t < k; ++t) {
          const bool y = labels[static_cast<std::size_t>(i) * k + t] != 0;
          const Real w = weights.empty() || !y ? Real(1) : weights[t];
          const std::size_t off = static_cast<std::size_t>(i) * 2 * k + 2 * t;
          // d/dp1 of -log softmax(pair)[y]:  sigma(p1 - p0) - y
          const Real s1 = detail::sigmoid(lv[off + 1] - lv[off]);
          const Real d1 = s1 - (y ? Real(1) : Real(0));
          gl[off + 1] += g * w * d1;
          gl[off] -= g * w * d1;
        }
      }
    });
  }
  return out;
}

}  // namespace sedkit

#endif  // SEDKIT_LOSSES_HPP_
