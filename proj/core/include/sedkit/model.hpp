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
// Conformer encoder + BiLSTM sequence model with per-event classifier
// heads.  Log-mel input runs through 2-D convolutional subsampling (4x in
// time), absolute sinusoidal positions, a stack of Conformer blocks, a
// stack of (Bi)LSTM layers, a linear projection, pooling over time, and one
// small head per event type.

#ifndef SEDKIT_MODEL_HPP_
#define SEDKIT_MODEL_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sedkit/adam.hpp"
#include "sedkit/fbank.hpp"
#include "sedkit/label.hpp"
#include "sedkit/specaugment.hpp"
#include "sedkit/tensor.hpp"

namespace sedkit {

// Per-task head output: a logit pair per event (positive iff logit[1] >
// logit[0]) or a single sigmoid logit.
enum class HeadMode { kTwoLogit, kOneLogit };

enum class Pooling { kMean, kLast };

const std::string& head_mode_name(HeadMode m);
HeadMode head_mode_from_name(const std::string& name);
const std::string& pooling_name(Pooling p);
Pooling pooling_from_name(const std::string& name);

struct ModelConfig {
  FbankConfig frontend;     // input features; frontend.num_bins is the input dim
  AugmentPolicy augment;    // training-time feature masking
  int d_model = 256;
  int num_blocks = 6;
  int num_heads = 4;
  int ff_expansion = 4;
  int conv_kernel = 15;     // depthwise kernel, odd for same-padding
  double dropout = 0.1;
  int lstm_layers = 2;
  int lstm_hidden = 256;
  bool lstm_bidirectional = true;
  int proj_dim = 128;
  Pooling pooling = Pooling::kMean;
  HeadMode head_mode = HeadMode::kTwoLogit;
  TaskSubset tasks{kAllTags.begin(), kAllTags.end()};

  int logits_per_task() const {
    return head_mode == HeadMode::kTwoLogit ? 2 : 1;
  }
  int lstm_output_dim() const {
    if (lstm_layers == 0) return d_model;
    return lstm_bidirectional ? 2 * lstm_hidden : lstm_hidden;
  }

  // Throws ConfigError on any out-of-range field.
  void validate() const;
};

std::string model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const std::string& text);

// Short name for a head parameter group: p, b, r, wr, i.
const std::string& tag_key(StutterTag tag);

// The full ordered (name, shape) parameter layout implied by a config.
// Model construction, checkpoints and count_parameters all derive from
// this list; it is the single source of truth.
std::vector<std::pair<std::string, std::vector<int>>> parameter_spec(
    const ModelConfig& cfg);

std::int64_t count_parameters(const ModelConfig& cfg);

// ---------------------------------------------------------------------------
// Layer parameter bundles (handles shared with the model's ParamStore).

template <typename Real>
struct ConvSubsampleParamsT {
  TensorT<Real> conv1_w, conv1_b, conv2_w, conv2_b, proj_w, proj_b;
};

template <typename Real>
struct FeedForwardParamsT {
  TensorT<Real> norm_g, norm_b, w1, b1, w2, b2;
};

template <typename Real>
struct AttentionParamsT {
  TensorT<Real> wq, bq, wk, bk, wv, bv, wo, bo;
};

template <typename Real>
struct ConvModuleParamsT {
  TensorT<Real> norm_g, norm_b, pw1_w, pw1_b, dw_w, dw_b, mid_norm_g,
      mid_norm_b, pw2_w, pw2_b;
};

template <typename Real>
struct ConformerBlockParamsT {
  FeedForwardParamsT<Real> ffn1, ffn2;
  TensorT<Real> attn_norm_g, attn_norm_b;
  AttentionParamsT<Real> attn;
  ConvModuleParamsT<Real> conv;
  TensorT<Real> final_norm_g, final_norm_b;
  int num_heads = 4;
  int conv_kernel = 15;
};

template <typename Real>
struct LstmDirParamsT {
  TensorT<Real> wx, wh, bias;  // gate order i, f, g, o in the 4h axis
};

template <typename Real>
struct BiLstmParamsT {
  LstmDirParamsT<Real> fwd;
  std::optional<LstmDirParamsT<Real>> bwd;
};

// Post-softmax attention weights per head, for inspection and tests.
template <typename Real>
struct AttentionProbeT {
  std::vector<TensorT<Real>> weights;  // each [T x T]
};

// ---------------------------------------------------------------------------
// Layers.

// Sinusoidal absolute positions, [t x d] constant (not a parameter).
template <typename Real>
TensorT<Real> positional_encoding(int t, int d) {
  TensorT<Real> pe({t, d});
  auto v = pe.values();
  for (int pos = 0; pos < t; ++pos) {
    for (int j = 0; j < d; ++j) {
      const double exponent = double(j - (j % 2)) / double(d);
      const double angle = pos * std::exp(-std::log(10000.0) * exponent);
      v[static_cast<std::size_t>(pos) * d + j] =
          static_cast<Real>(j % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  return pe;
}

// Two stride-2 3x3 convs over the time-frequency plane (4x time
// subsampling, no padding), flattened per frame and projected to d_model.
// Needs at least 7 frames and 7 bins.
template <typename Real>
TensorT<Real> conv_subsample(OpContextT<Real>& ctx, TensorT<Real> feats,
                             const ConvSubsampleParamsT<Real>& p) {
  detail::check_rank(feats.shape(), 2, "conv_subsample");
  const int t = feats.extent(0), f = feats.extent(1);
  if (t < 7) {
    throw ShapeError("conv_subsample: need at least 7 frames, got " +
                     std::to_string(t));
  }
  if (f < 7) {
    throw ShapeError("conv_subsample: need at least 7 feature bins, got " +
                     std::to_string(f));
  }
  auto x = reshape(ctx, feats, {1, t, f});
  x = convolution(ctx, x, p.conv1_w, ConvMode::kConv2d, 2, 0);
  x = add_channel_bias(ctx, x, p.conv1_b);
  x = activation(ctx, x, Activation::kRelu);
  x = convolution(ctx, x, p.conv2_w, ConvMode::kConv2d, 2, 0);
  x = add_channel_bias(ctx, x, p.conv2_b);
  x = activation(ctx, x, Activation::kRelu);
  x = chw_to_frames(ctx, x);
  return add_row_bias(ctx, matmul(ctx, x, p.proj_w), p.proj_b);
}

// Scaled dot-product self-attention over rows of x [T x d].
template <typename Real>
TensorT<Real> multi_head_attention(OpContextT<Real>& ctx, TensorT<Real> x,
                                   const AttentionParamsT<Real>& p, int heads,
                                   AttentionProbeT<Real>* probe = nullptr) {
  detail::check_rank(x.shape(), 2, "multi_head_attention");
  const int d = x.extent(1);
  if (heads < 1 || d % heads != 0) {
    throw ShapeError("multi_head_attention: d_model " + std::to_string(d) +
                     " not divisible by " + std::to_string(heads) + " heads");
  }
  const int dh = d / heads;
  const Real scl = static_cast<Real>(1.0 / std::sqrt(double(dh)));
  auto q = add_row_bias(ctx, matmul(ctx, x, p.wq), p.bq);
  auto k = add_row_bias(ctx, matmul(ctx, x, p.wk), p.bk);
  auto v = add_row_bias(ctx, matmul(ctx, x, p.wv), p.bv);
  std::vector<TensorT<Real>> contexts;
  contexts.reserve(heads);
  for (int h = 0; h < heads; ++h) {
    auto qh = slice_cols(ctx, q, h * dh, (h + 1) * dh);
    auto kh = slice_cols(ctx, k, h * dh, (h + 1) * dh);
    auto vh = slice_cols(ctx, v, h * dh, (h + 1) * dh);
    auto scores = scale(ctx, matmul(ctx, qh, transpose2d(ctx, kh)), scl);
    auto attn = activation(ctx, scores, Activation::kSoftmaxLastDim);
    if (probe != nullptr) probe->weights.push_back(attn);
    contexts.push_back(matmul(ctx, attn, vh));
  }
  auto cat = concat_cols(ctx, contexts);
  return add_row_bias(ctx, matmul(ctx, cat, p.wo), p.bo);
}

namespace detail {

template <typename Real>
TensorT<Real> half_feed_forward(OpContextT<Real>& ctx, TensorT<Real> x,
                                const FeedForwardParamsT<Real>& p,
                                Real dropout_p) {
  auto h = layer_norm(ctx, x, p.norm_g, p.norm_b);
  h = add_row_bias(ctx, matmul(ctx, h, p.w1), p.b1);
  h = activation(ctx, h, Activation::kSwish);
  h = add_row_bias(ctx, matmul(ctx, h, p.w2), p.b2);
  h = dropout(ctx, h, dropout_p);
  return add(ctx, x, scale(ctx, h, Real(0.5)));
}

template <typename Real>
TensorT<Real> conv_module(OpContextT<Real>& ctx, TensorT<Real> x,
                          const ConvModuleParamsT<Real>& p, int kernel,
                          Real dropout_p) {
  auto h = layer_norm(ctx, x, p.norm_g, p.norm_b);
  h = convolution(ctx, h, p.pw1_w, ConvMode::kPointwise1d, 1, 0);
  h = add_row_bias(ctx, h, p.pw1_b);
  h = activation(ctx, h, Activation::kGlu);
  h = convolution(ctx, h, p.dw_w, ConvMode::kDepthwise1d, 1, (kernel - 1) / 2);
  h = add_row_bias(ctx, h, p.dw_b);
  h = layer_norm(ctx, h, p.mid_norm_g, p.mid_norm_b);
  h = activation(ctx, h, Activation::kSwish);
  h = convolution(ctx, h, p.pw2_w, ConvMode::kPointwise1d, 1, 0);
  h = add_row_bias(ctx, h, p.pw2_b);
  h = dropout(ctx, h, dropout_p);
  return add(ctx, x, h);
}

}  // namespace detail

// Macaron Conformer block: half-FFN, self-attention, convolution module,
// half-FFN, each pre-normalized with a residual, then a closing LayerNorm.
template <typename Real>
TensorT<Real> conformer_block(OpContextT<Real>& ctx, TensorT<Real> x,
                              const ConformerBlockParamsT<Real>& p,
                              Real dropout_p,
                              AttentionProbeT<Real>* probe = nullptr) {
  x = detail::half_feed_forward(ctx, x, p.ffn1, dropout_p);
  {
    auto h = layer_norm(ctx, x, p.attn_norm_g, p.attn_norm_b);
    h = multi_head_attention(ctx, h, p.attn, p.num_heads, probe);
    h = dropout(ctx, h, dropout_p);
    x = add(ctx, x, h);
  }
  x = detail::conv_module(ctx, x, p.conv, p.conv_kernel, dropout_p);
  x = detail::half_feed_forward(ctx, x, p.ffn2, dropout_p);
  return layer_norm(ctx, x, p.final_norm_g, p.final_norm_b);
}

// One LSTM pass over rows of x; reverse=true scans right-to-left but the
// output keeps input time order.
template <typename Real>
TensorT<Real> lstm_direction(OpContextT<Real>& ctx, TensorT<Real> x,
                             const LstmDirParamsT<Real>& p, bool reverse) {
  detail::check_rank(x.shape(), 2, "lstm");
  const int t = x.extent(0);
  const int h = p.wh.extent(0);
  if (p.wx.extent(0) != x.extent(1) || p.wx.extent(1) != 4 * h ||
      p.wh.extent(1) != 4 * h || p.bias.extent(0) != 4 * h) {
    throw ShapeError("lstm: parameter shapes inconsistent with input " +
                     format_shape(x.shape()));
  }
  auto xw = matmul(ctx, x, p.wx);  // all-steps input contribution [T x 4h]
  TensorT<Real> hprev({1, h}), cprev({1, h});
  std::vector<TensorT<Real>> outs(t);
  for (int step = 0; step < t; ++step) {
    const int tt = reverse ? t - 1 - step : step;
    auto z = slice_rows(ctx, xw, tt, tt + 1);
    z = add(ctx, z, matmul(ctx, hprev, p.wh));
    z = add_row_bias(ctx, z, p.bias);
    auto gi = activation(ctx, slice_cols(ctx, z, 0, h), Activation::kSigmoid);
    auto gf =
        activation(ctx, slice_cols(ctx, z, h, 2 * h), Activation::kSigmoid);
    auto gg =
        activation(ctx, slice_cols(ctx, z, 2 * h, 3 * h), Activation::kTanh);
    auto go =
        activation(ctx, slice_cols(ctx, z, 3 * h, 4 * h), Activation::kSigmoid);
    auto c = add(ctx, mul(ctx, gf, cprev), mul(ctx, gi, gg));
    auto hcur = mul(ctx, go, activation(ctx, c, Activation::kTanh));
    outs[tt] = hcur;
    hprev = hcur;
    cprev = c;
  }
  return stack_rows(ctx, outs);
}

// Forward (and optionally backward) LSTM; directions concatenated on the
// feature axis, [T x h] or [T x 2h].
template <typename Real>
TensorT<Real> bilstm_layer(OpContextT<Real>& ctx, TensorT<Real> x,
                           const BiLstmParamsT<Real>& p) {
  auto fwd = lstm_direction(ctx, x, p.fwd, /*reverse=*/false);
  if (!p.bwd.has_value()) return fwd;
  auto bwd = lstm_direction(ctx, x, *p.bwd, /*reverse=*/true);
  return concat_cols(ctx, std::vector<TensorT<Real>>{fwd, bwd});
}

// ---------------------------------------------------------------------------
// The assembled model.

template <typename Real>
class ModelT {
 public:
  // Fresh Xavier-initialized parameters, deterministic in init_seed.
  ModelT(const ModelConfig& cfg, std::uint64_t init_seed) : cfg_(cfg) {
    cfg_.validate();
    std::mt19937_64 rng(init_seed);
    for (const auto& [name, shape] : parameter_spec(cfg_)) {
      params_.add(name, init_tensor(name, shape, rng));
    }
    bind_handles();
  }

  // Parameters from external arrays (checkpoint restore).  Arrays must
  // match parameter_spec(cfg) names and shapes exactly, in any order.
  ModelT(const ModelConfig& cfg,
         const std::vector<std::pair<std::string,
                                     std::pair<std::vector<int>,
                                               std::vector<float>>>>& arrays)
      : cfg_(cfg) {
    cfg_.validate();
    std::unordered_map<std::string, std::size_t> where;
    for (std::size_t i = 0; i < arrays.size(); ++i) where[arrays[i].first] = i;
    for (const auto& [name, shape] : parameter_spec(cfg_)) {
      auto it = where.find(name);
      if (it == where.end()) {
        throw FormatError("checkpoint: missing parameter \"" + name + "\"");
      }
      const auto& [ashape, adata] = arrays[it->second].second;
      if (ashape != shape) {
        throw FormatError("checkpoint: parameter \"" + name + "\" has shape " +
                          format_shape(ashape) + ", expected " +
                          format_shape(shape));
      }
      std::vector<Real> cast(adata.begin(), adata.end());
      params_.add(name, TensorT<Real>(shape, std::move(cast)));
      where.erase(it);
    }
    if (!where.empty()) {
      throw FormatError("checkpoint: unexpected parameter \"" +
                        where.begin()->first + "\"");
    }
    bind_handles();
  }

  const ModelConfig& config() const { return cfg_; }
  ParamStoreT<Real>& params() { return params_; }
  const ParamStoreT<Real>& params() const { return params_; }

  // Frame-level representations after projection, [T' x proj_dim].
  TensorT<Real> encode(const FeatureMatrix& feats,
                       OpContextT<Real>& ctx) const {
    if (feats.num_bins != cfg_.frontend.num_bins) {
      throw ShapeError("model: features have " +
                       std::to_string(feats.num_bins) + " bins, config says " +
                       std::to_string(cfg_.frontend.num_bins));
    }
    FeatureMatrix local = feats;
    if (ctx.training && cfg_.augment.enabled) {
      spec_augment(local, cfg_.augment, ctx.rng);
    }
    std::vector<Real> cast(local.data.begin(), local.data.end());
    TensorT<Real> x({local.num_frames, local.num_bins}, std::move(cast));
    x = conv_subsample(ctx, x, sub_);
    x = add(ctx, x, positional_encoding<Real>(x.extent(0), cfg_.d_model));
    x = dropout(ctx, x, static_cast<Real>(cfg_.dropout));
    const Real p = static_cast<Real>(cfg_.dropout);
    for (const auto& block : blocks_) {
      x = conformer_block(ctx, x, block, p);
    }
    for (const auto& lstm : lstms_) {
      x = bilstm_layer(ctx, x, lstm);
    }
    return add_row_bias(ctx, matmul(ctx, x, proj_w_), proj_b_);
  }

  // Pools frames and applies the per-task heads; [K x 2] or [K x 1] in
  // task-subset order.
  TensorT<Real> classify_frames(TensorT<Real> frames,
                                OpContextT<Real>& ctx) const {
    TensorT<Real> pooled;
    if (cfg_.pooling == Pooling::kMean) {
      pooled = mean_rows(ctx, frames);
    } else {
      pooled = slice_rows(ctx, frames, frames.extent(0) - 1, frames.extent(0));
    }
    std::vector<TensorT<Real>> rows;
    rows.reserve(heads_.size());
    for (const auto& head : heads_) {
      rows.push_back(
          add_row_bias(ctx, matmul(ctx, pooled, head.first), head.second));
    }
    return stack_rows(ctx, rows);
  }

  TensorT<Real> forward(const FeatureMatrix& feats,
                        OpContextT<Real>& ctx) const {
    return classify_frames(encode(feats, ctx), ctx);
  }

  // Parameters as (name, shape, float data) in spec order.
  std::vector<std::pair<std::string,
                        std::pair<std::vector<int>, std::vector<float>>>>
  export_arrays() const {
    std::vector<std::pair<std::string,
                          std::pair<std::vector<int>, std::vector<float>>>>
        out;
    out.reserve(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto& t = params_.tensor(i);
      std::vector<float> data(t.values().begin(), t.values().end());
      out.push_back({params_.name(i), {t.shape(), std::move(data)}});
    }
    return out;
  }

 private:
  TensorT<Real> init_tensor(const std::string& name,
                            const std::vector<int>& shape,
                            std::mt19937_64& rng) {
    const bool is_gain = name.ends_with(".gamma");
    const bool is_bias = !is_gain && (name.ends_with(".beta") ||
                                      name.ends_with("bias") ||
                                      name.ends_with(".b1") ||
                                      name.ends_with(".b2"));
    if (is_gain) return TensorT<Real>::full(shape, Real(1));
    if (is_bias) {
      TensorT<Real> t(shape);
      if (name.find("lstm") != std::string::npos &&
          name.ends_with(".bias")) {
        const int h = shape[0] / 4;  // forget-gate bias starts at 1
        auto v = t.values();
        for (int j = h; j < 2 * h; ++j) v[j] = Real(1);
      }
      return t;
    }
    double fan_in = 0, fan_out = 0;
    if (shape.size() == 4) {
      fan_in = double(shape[1]) * shape[2] * shape[3];
      fan_out = double(shape[0]) * shape[2] * shape[3];
    } else if (name.ends_with(".dw.weight")) {
      fan_in = shape[1];
      fan_out = shape[1];
    } else {
      fan_in = shape[0];
      fan_out = shape[shape.size() - 1];
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    return TensorT<Real>::uniform(shape, static_cast<Real>(-limit),
                                  static_cast<Real>(limit), rng);
  }

  void bind_handles() {
    auto get = [this](const std::string& name) -> TensorT<Real> {
      return params_.get(name);
    };
    sub_ = {get("subsample.conv1.weight"), get("subsample.conv1.bias"),
            get("subsample.conv2.weight"), get("subsample.conv2.bias"),
            get("subsample.proj.weight"),  get("subsample.proj.bias")};
    blocks_.clear();
    for (int i = 0; i < cfg_.num_blocks; ++i) {
      const std::string b = "block" + std::to_string(i) + ".";
      ConformerBlockParamsT<Real> blk;
      auto ffn = [&](const std::string& which) {
        return FeedForwardParamsT<Real>{
            get(b + which + ".norm.gamma"), get(b + which + ".norm.beta"),
            get(b + which + ".w1"),         get(b + which + ".b1"),
            get(b + which + ".w2"),         get(b + which + ".b2")};
      };
      blk.ffn1 = ffn("ffn1");
      blk.ffn2 = ffn("ffn2");
      blk.attn_norm_g = get(b + "attn.norm.gamma");
      blk.attn_norm_b = get(b + "attn.norm.beta");
      blk.attn = {get(b + "attn.q.weight"),   get(b + "attn.q.bias"),
                  get(b + "attn.k.weight"),   get(b + "attn.k.bias"),
                  get(b + "attn.v.weight"),   get(b + "attn.v.bias"),
                  get(b + "attn.out.weight"), get(b + "attn.out.bias")};
      blk.conv = {get(b + "conv.norm.gamma"),     get(b + "conv.norm.beta"),
                  get(b + "conv.pw1.weight"),     get(b + "conv.pw1.bias"),
                  get(b + "conv.dw.weight"),      get(b + "conv.dw.bias"),
                  get(b + "conv.mid_norm.gamma"), get(b + "conv.mid_norm.beta"),
                  get(b + "conv.pw2.weight"),     get(b + "conv.pw2.bias")};
      blk.final_norm_g = get(b + "final_norm.gamma");
      blk.final_norm_b = get(b + "final_norm.beta");
      blk.num_heads = cfg_.num_heads;
      blk.conv_kernel = cfg_.conv_kernel;
      blocks_.push_back(std::move(blk));
    }
    lstms_.clear();
    for (int l = 0; l < cfg_.lstm_layers; ++l) {
      const std::string b = "lstm" + std::to_string(l) + ".";
      BiLstmParamsT<Real> layer;
      layer.fwd = {get(b + "fwd.wx"), get(b + "fwd.wh"), get(b + "fwd.bias")};
      if (cfg_.lstm_bidirectional) {
        layer.bwd = LstmDirParamsT<Real>{get(b + "bwd.wx"), get(b + "bwd.wh"),
                                         get(b + "bwd.bias")};
      }
      lstms_.push_back(std::move(layer));
    }
    proj_w_ = get("proj.weight");
    proj_b_ = get("proj.bias");
    heads_.clear();
    for (StutterTag tag : cfg_.tasks) {
      const std::string b = "head." + tag_key(tag) + ".";
      heads_.push_back({get(b + "weight"), get(b + "bias")});
    }
  }

  ModelConfig cfg_;
  ParamStoreT<Real> params_;
  ConvSubsampleParamsT<Real> sub_;
  std::vector<ConformerBlockParamsT<Real>> blocks_;
  std::vector<BiLstmParamsT<Real>> lstms_;
  TensorT<Real> proj_w_, proj_b_;
  std::vector<std::pair<TensorT<Real>, TensorT<Real>>> heads_;
};

using Model = ModelT<float>;

}  // namespace sedkit

#endif  // SEDKIT_MODEL_HPP_
