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
// Dense row-major tensors plus an eager reverse-mode tape.  Ops execute
// immediately; when an OpContext carries a tape and an input requires
// gradients, the op appends a backward closure.  backward() replays the tape
// once in reverse, accumulating (+=) into .grad() so fan-out sums correctly.
// Gradients are never cleared implicitly; call zero_grad() between steps.
// A tape and the tensors recorded on it belong to one thread.
//
// Templated on the element type: float is the production type, double exists
// so finite-difference gradient checks run at a usable precision.

#ifndef SEDKIT_TENSOR_HPP_
#define SEDKIT_TENSOR_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sedkit/errors.hpp"

namespace sedkit {

inline std::string format_shape(const std::vector<int>& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

template <typename Real>
class TensorT {
 public:
  TensorT() = default;

  explicit TensorT(std::vector<int> shape) {
    data_ = std::make_shared<Storage>();
    data_->shape = std::move(shape);
    data_->value.assign(checked_size(data_->shape), Real(0));
  }

  TensorT(std::vector<int> shape, std::vector<Real> values) {
    data_ = std::make_shared<Storage>();
    data_->shape = std::move(shape);
    if (values.size() != checked_size(data_->shape)) {
      throw ShapeError("tensor init: " + std::to_string(values.size()) +
                       " values for shape " + format_shape(data_->shape));
    }
    data_->value = std::move(values);
  }

  static TensorT full(std::vector<int> shape, Real fill) {
    TensorT t(std::move(shape));
    for (Real& v : t.data_->value) v = fill;
    return t;
  }

  static TensorT scalar(Real value) { return TensorT({1}, {value}); }

  template <typename Rng>
  static TensorT uniform(std::vector<int> shape, Real lo, Real hi, Rng& rng) {
    TensorT t(std::move(shape));
    std::uniform_real_distribution<double> dist(static_cast<double>(lo),
                                                static_cast<double>(hi));
    for (Real& v : t.data_->value) v = static_cast<Real>(dist(rng));
    return t;
  }

  bool defined() const { return static_cast<bool>(data_); }
  const std::vector<int>& shape() const { return data_->shape; }
  int rank() const { return static_cast<int>(data_->shape.size()); }
  int extent(int axis) const { return data_->shape[axis]; }
  std::size_t size() const { return data_->value.size(); }

  std::span<Real> values() { return data_->value; }
  std::span<const Real> values() const { return data_->value; }

  Real item() const {
    if (size() != 1) {
      throw ContractError("item() on tensor of shape " + format_shape(shape()));
    }
    return data_->value[0];
  }

  // Row-major element access for rank-2 tensors.
  Real& at(int i, int j) {
    return data_->value[static_cast<std::size_t>(i) * shape()[1] + j];
  }
  Real at(int i, int j) const {
    return data_->value[static_cast<std::size_t>(i) * shape()[1] + j];
  }

  bool requires_grad() const { return data_ && data_->requires_grad; }
  void set_requires_grad(bool on) { data_->requires_grad = on; }

  bool has_grad() const { return data_ && !data_->grad.empty(); }
  void ensure_grad() {
    if (data_->grad.empty()) data_->grad.assign(size(), Real(0));
  }
  std::span<Real> grad() {
    ensure_grad();
    return data_->grad;
  }
  std::span<const Real> grad() const {
    if (!has_grad()) {
      throw ContractError("grad() read before any backward pass");
    }
    return data_->grad;
  }
  void zero_grad() {
    if (has_grad()) data_->grad.assign(size(), Real(0));
  }

  // Deep value copy with no grad state; same shape.
  TensorT detach_copy() const {
    TensorT t;
    t.data_ = std::make_shared<Storage>();
    t.data_->shape = data_->shape;
    t.data_->value = data_->value;
    return t;
  }

  // Identity: two handles referring to the same storage.
  bool same_storage(const TensorT& other) const {
    return data_ == other.data_;
  }

 private:
  struct Storage {
    std::vector<int> shape;
    std::vector<Real> value;
    std::vector<Real> grad;  // empty until first needed
    bool requires_grad = false;
  };

  static std::size_t checked_size(const std::vector<int>& shape) {
    if (shape.empty()) throw ShapeError("tensor rank must be >= 1");
    std::size_t n = 1;
    for (int e : shape) {
      if (e <= 0) {
        throw ShapeError("tensor extent must be positive, shape " +
                         format_shape(shape));
      }
      n *= static_cast<std::size_t>(e);
    }
    return n;
  }

  std::shared_ptr<Storage> data_;
};

using Tensor = TensorT<float>;

// Execution-order record of backward closures.
template <typename Real>
class TapeT {
 public:
  void record(const char* op, std::function<void()> fn) {
    nodes_.push_back(Node{op, std::move(fn)});
  }
  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }
  const char* op_name(std::size_t i) const { return nodes_[i].op; }

  template <typename R>
  friend void backward(TapeT<R>& tape, TensorT<R> loss);

 private:
  struct Node {
    const char* op;
    std::function<void()> fn;
  };
  std::vector<Node> nodes_;
};

using Tape = TapeT<float>;

// Per-forward-pass op environment.  tape == nullptr means inference: no
// closures are recorded and outputs never require gradients.  rng drives
// stochastic ops (dropout); seed it per item for reproducibility.
template <typename Real>
struct OpContextT {
  TapeT<Real>* tape = nullptr;
  bool training = false;
  std::mt19937 rng{0x5edc1234u};

  bool taping(const TensorT<Real>& a) const {
    return tape != nullptr && a.requires_grad();
  }
  bool taping(const TensorT<Real>& a, const TensorT<Real>& b) const {
    return tape != nullptr && (a.requires_grad() || b.requires_grad());
  }
};

using OpContext = OpContextT<float>;

template <typename Real>
void backward(TapeT<Real>& tape, TensorT<Real> loss) {
  if (loss.size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " +
                        format_shape(loss.shape()));
  }
  loss.grad()[0] += Real(1);
  for (std::size_t i = tape.nodes_.size(); i-- > 0;) {
    tape.nodes_[i].fn();
  }
}

template <typename Real>
bool all_finite(const TensorT<Real>& t) {
  for (Real v : t.values()) {
    if (!std::isfinite(static_cast<double>(v))) return false;
  }
  return true;
}

namespace detail {

// c[m x n] += a[m x k] @ b[k x n], all row-major.  The inner j loop is a
// bias-free saxpy, which the compiler vectorizes without relaxed FP rules;
// every other matrix product here is phrased through it via explicit
// transposition so results stay bit-reproducible.
template <typename Real>
inline void gemm_accum(const Real* a, const Real* b, Real* c, int m, int k,
                       int n) {
  for (int i = 0; i < m; ++i) {
    const Real* arow = a + static_cast<std::size_t>(i) * k;
    Real* crow = c + static_cast<std::size_t>(i) * n;
    for (int l = 0; l < k; ++l) {
      const Real av = arow[l];
      const Real* brow = b + static_cast<std::size_t>(l) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename Real>
inline void transpose_into(const Real* src, Real* dst, int rows, int cols) {
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      dst[static_cast<std::size_t>(j) * rows + i] =
          src[static_cast<std::size_t>(i) * cols + j];
    }
  }
}

template <typename Real>
inline Real sigmoid(Real x) {
  if (x >= Real(0)) {
    const Real e = std::exp(-x);
    return Real(1) / (Real(1) + e);
  }
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

// log(1 + e^x) without overflow.
template <typename Real>
inline Real softplus(Real x) {
  if (x > Real(0)) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline void check_rank(const std::vector<int>& shape, int rank,
                       const char* op) {
  if (static_cast<int>(shape.size()) != rank) {
    throw ShapeError(std::string(op) + ": expected rank " +
                     std::to_string(rank) + ", got shape " +
                     format_shape(shape));
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Element-wise and linear ops.

template <typename Real>
TensorT<Real> matmul(OpContextT<Real>& ctx, TensorT<Real> a, TensorT<Real> b) {
  detail::check_rank(a.shape(), 2, "matmul");
  detail::check_rank(b.shape(), 2, "matmul");
  const int m = a.extent(0), k = a.extent(1), n = b.extent(1);
  if (b.extent(0) != k) {
    throw ShapeError("matmul: shape mismatch " + format_shape(a.shape()) +
                     " x " + format_shape(b.shape()));
  }
  TensorT<Real> out({m, n});
  detail::gemm_accum(a.values().data(), b.values().data(), out.values().data(),
                     m, k, n);
  if (ctx.taping(a, b)) {
    out.set_requires_grad(true);
    ctx.tape->record("matmul", [a, b, out, m, k, n]() mutable {
      auto go = out.grad();
      if (a.requires_grad()) {
        // dA += G @ B^T
        std::vector<Real> bt(static_cast<std::size_t>(n) * k);
        detail::transpose_into(b.values().data(), bt.data(), k, n);
        detail::gemm_accum(go.data(), bt.data(), a.grad().data(), m, n, k);
      }
      if (b.requires_grad()) {
        // dB += A^T @ G
        std::vector<Real> at(static_cast<std::size_t>(k) * m);
        detail::transpose_into(a.values().data(), at.data(), m, k);
        detail::gemm_accum(at.data(), go.data(), b.grad().data(), k, m, n);
      }
    });
  }
  return out;
}

template <typename Real>
TensorT<Real> add(OpContextT<Real>& ctx, TensorT<Real> a, TensorT<Real> b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("add: shape mismatch " + format_shape(a.shape()) +
                     " vs " + format_shape(b.shape()));
  }
  TensorT<Real> out(a.shape());
  auto av = a.values(), bv = b.values(), ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + bv[i];
  if (ctx.taping(a, b)) {
    out.set_requires_grad(true);
    ctx.tape->record("add", [a, b, out]() mutable {
      auto go = out.grad();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i];
      }
    });
  }
  return out;
}

template <typename Real>
TensorT<Real> sub(OpContextT<Real>& ctx, TensorT<Real> a, TensorT<Real> b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("sub: shape mismatch " + format_shape(a.shape()) +
                     " vs " + format_shape(b.shape()));
  }
  TensorT<Real> out(a.shape());
  auto av = a.values(), bv = b.values(), ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] - bv[i];
  if (ctx.taping(a, b)) {
    out.set_requires_grad(true);
    ctx.tape->record("sub", [a, b, out]() mutable {
      auto go = out.grad();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t i = 0; i < go.size(); ++i) gb[i] -= go[i];
      }
    });
  }
  return out;
}

// Hadamard product.
template <typename Real>
TensorT<Real> mul(OpContextT<Real>& ctx, TensorT<Real> a, TensorT<Real> b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("mul: shape mismatch " + format_shape(a.shape()) +
                     " vs " + format_shape(b.shape()));
  }
  TensorT<Real> out(a.shape());
  auto av = a.values(), bv = b.values(), ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
  if (ctx.taping(a, b)) {
    out.set_requires_grad(true);
    ctx.tape->record("mul", [a, b, out]() mutable {
      auto go = out.grad();
      auto av = a.values(), bv = b.values();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * bv[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i] * av[i];
      }
    });
  }
  return out;
}

template <typename Real>
TensorT<Real> scale(OpContextT<Real>& ctx, TensorT<Real> a, Real c) {
  TensorT<Real> out(a.shape());
  auto av = a.values(), ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * c;
  if (ctx.taping(a)) {
    out.set_requires_grad(true);
    ctx.tape->record("scale", [a, out, c]() mutable {
      auto go = out.grad();
      auto ga = a.grad();
      for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * c;
    });
  }
  return out;
}

// x [T x d] plus a length-d bias broadcast over rows.
template <typename Real>
TensorT<Real> add_row_bias(OpContextT<Real>& ctx, TensorT<Real> x,
                           TensorT<Real> bias) {
  detail::check_rank(x.shape(), 2, "add_row_bias");
  detail::check_rank(bias.shape(), 1, "add_row_bias");
  const int rows = x.extent(0), cols = x.extent(1);
  if (bias.extent(0) != cols) {
    throw ShapeError("add_row_bias: " + format_shape(x.shape()) + " + " +
                     format_shape(bias.shape()));
  }
  TensorT<Real> out({rows, cols});
  auto xv = x.values(), bv = bias.values(), ov = out.values();
  for (int i = 0; i < rows; ++i) {
    const std::size_t off = static_cast<std::size_t>(i) * cols;
    for (int j = 0; j < cols; ++j) ov[off + j] = xv[off + j] + bv[j];
  }
  if (ctx.taping(x, bias)) {
    out.set_requires_grad(true);
    ctx.tape->record("add_row_bias", [x, bias, out, rows, cols]() mutable {
      auto go = out.grad();
      if (x.requires_grad()) {
        auto gx = x.grad();
        for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i];
      }
      if (bias.requires_grad()) {
        auto gb = bias.grad();
        for (int i = 0; i < rows; ++i) {
          const std::size_t off = static_cast<std::size_t>(i) * cols;
          for (int j = 0; j < cols; ++j) gb[j] += go[off + j];
        }
      }
    });
  }
  return out;
}

// x [C,H,W] plus a length-C bias broadcast over each channel plane.
template <typename Real>
TensorT<Real> add_channel_bias(OpContextT<Real>& ctx, TensorT<Real> x,
                               TensorT<Real> bias) {
  detail::check_rank(x.shape(), 3, "add_channel_bias");
  detail::check_rank(bias.shape(), 1, "add_channel_bias");
  const int c = x.extent(0);
  const std::size_t plane = x.size() / c;
  if (bias.extent(0) != c) {
    throw ShapeError("add_channel_bias: " + format_shape(x.shape()) + " + " +
                     format_shape(bias.shape()));
  }
  TensorT<Real> out(x.shape());
  auto xv = x.values(), bv = bias.values(), ov = out.values();
  for (int ch = 0; ch < c; ++ch) {
    const Real b = bv[ch];
    const std::size_t off = ch * plane;
    for (std::size_t i = 0; i < plane; ++i) ov[off + i] = xv[off + i] + b;
  }
  if (ctx.taping(x, bias)) {
    out.set_requires_grad(true);
    ctx.tape->record("add_channel_bias", [x, bias, out, c, plane]() mutable {
      auto go = out.grad();
      if (x.requires_grad()) {
        auto gx = x.grad();
        for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i];
      }
      if (bias.requires_grad()) {
        auto gb = bias.grad();
        for (int ch = 0; ch < c; ++ch) {
          const std::size_t off = ch * plane;
          for (std::size_t i = 0; i < plane; ++i) gb[ch] += go[off + i];
        }
      }
    });
  }
  return out;
}

enum class Activation {
  kSigmoid,
  kTanh,
  kSwish,
  kRelu,
  kGlu,            // splits the last dim in half: a * sigmoid(b)
  kSoftmaxLastDim  // softmax over the last dimension, per row
};

template <typename Real>
TensorT<Real> activation(OpContextT<Real>& ctx, TensorT<Real> x,
                         Activation kind) {
  const std::size_t n = x.size();
  auto xv = x.values();
  TensorT<Real> out;

  switch (kind) {
    case Activation::kSigmoid: {
      out = TensorT<Real>(x.shape());
      auto ov = out.values();
      for (std::size_t i = 0; i < n; ++i) ov[i] = detail::sigmoid(xv[i]);
      break;
    }
    case Activation::kTanh: {
      out = TensorT<Real>(x.shape());
      auto ov = out.values();
      for (std::size_t i = 0; i < n; ++i) ov[i] = std::tanh(xv[i]);
      break;
    }
    case Activation::kSwish: {
      out = TensorT<Real>(x.shape());
      auto ov = out.values();
      for (std::size_t i = 0; i < n; ++i) {
        ov[i] = xv[i] * detail::sigmoid(xv[i]);
      }
      break;
    }
    case Activation::kRelu: {
      out = TensorT<Real>(x.shape());
      auto ov = out.values();
      for (std::size_t i = 0; i < n; ++i) {
        ov[i] = xv[i] > Real(0) ? xv[i] : Real(0);
      }
      break;
    }
    case Activation::kGlu: {
      const int last = x.shape().back();
      if (last % 2 != 0) {
        throw ShapeError("glu: last dim must be even, shape " +
                         format_shape(x.shape()));
      }
      std::vector<int> oshape = x.shape();
      oshape.back() = last / 2;
      out = TensorT<Real>(oshape);
      auto ov = out.values();
      const std::size_t rows = n / last;
      const int half = last / 2;
      for (std::size_t r = 0; r < rows; ++r) {
        const Real* row = xv.data() + r * last;
        Real* orow = ov.data() + r * half;
        for (int j = 0; j < half; ++j) {
          orow[j] = row[j] * detail::sigmoid(row[half + j]);
        }
      }
      break;
    }
    case Activation::kSoftmaxLastDim: {
      const int last = x.shape().back();
      out = TensorT<Real>(x.shape());
      auto ov = out.values();
      const std::size_t rows = n / last;
      for (std::size_t r = 0; r < rows; ++r) {
        const Real* row = xv.data() + r * last;
        Real* orow = ov.data() + r * last;
        Real mx = row[0];
        for (int j = 1; j < last; ++j) mx = std::max(mx, row[j]);
        Real sum = Real(0);
        for (int j = 0; j < last; ++j) {
          orow[j] = std::exp(row[j] - mx);
          sum += orow[j];
        }
        const Real inv = Real(1) / sum;
        for (int j = 0; j < last; ++j) orow[j] *= inv;
      }
      break;
    }
  }

  if (ctx.taping(x)) {
    out.set_requires_grad(true);
    ctx.tape->record("activation", [x, out, kind]() mutable {
      auto go = out.grad();
      auto gx = x.grad();
      auto xv = x.values();
      auto ov = out.values();
      switch (kind) {
        case Activation::kSigmoid:
          for (std::size_t i = 0; i < go.size(); ++i) {
            gx[i] += go[i] * ov[i] * (Real(1) - ov[i]);
          }
          break;
        case Activation::kTanh:
          for (std::size_t i = 0; i < go.size(); ++i) {
            gx[i] += go[i] * (Real(1) - ov[i] * ov[i]);
          }
          break;
        case Activation::kSwish:
          for (std::size_t i = 0; i < go.size(); ++i) {
            const Real s = detail::sigmoid(xv[i]);
            gx[i] += go[i] * (s + xv[i] * s * (Real(1) - s));
          }
          break;
        case Activation::kRelu:
          for (std::size_t i = 0; i < go.size(); ++i) {
            if (xv[i] > Real(0)) gx[i] += go[i];
          }
          break;
        case Activation::kGlu: {
          const int last = x.shape().back();
          const int half = last / 2;
          const std::size_t rows = x.size() / last;
          for (std::size_t r = 0; r < rows; ++r) {
            const Real* row = xv.data() + r * last;
            const Real* grow = go.data() + r * half;
            Real* gxrow = gx.data() + r * last;
            for (int j = 0; j < half; ++j) {
              const Real s = detail::sigmoid(row[half + j]);
              gxrow[j] += grow[j] * s;
              gxrow[half + j] +=
                  grow[j] * row[j] * s * (Real(1) - s);
            }
          }
          break;
        }
        case Activation::kSoftmaxLastDim: {
          const int last = x.shape().back();
          const std::size_t rows = x.size() / last;
          for (std::size_t r = 0; r < rows; ++r) {
            const Real* yrow = ov.data() + r * last;
            const Real* grow = go.data() + r * last;
            Real* gxrow = gx.data() + r * last;
            Real dot = Real(0);
            for (int j = 0; j < last; ++j) dot += grow[j] * yrow[j];
            for (int j = 0; j < last; ++j) {
              gxrow[j] += yrow[j] * (grow[j] - dot);
            }
          }
          break;
        }
      }
    });
  }
  return out;
}

// Layer normalization over the last dimension with learned gain/bias.
template <typename Real>
TensorT<Real> layer_norm(OpContextT<Real>& ctx, TensorT<Real> x,
                         TensorT<Real> gamma, TensorT<Real> beta,
                         Real eps = Real(1e-5)) {
  const int d = x.shape().back();
  detail::check_rank(gamma.shape(), 1, "layer_norm");
  detail::check_rank(beta.shape(), 1, "layer_norm");
  if (gamma.extent(0) != d || beta.extent(0) != d) {
    throw ShapeError("layer_norm: gain/bias " + format_shape(gamma.shape()) +
                     "/" + format_shape(beta.shape()) + " vs feature dim " +
                     std::to_string(d));
  }
  const std::size_t rows = x.size() / d;
  TensorT<Real> out(x.shape());
  // Saved for backward: per-row mean and 1/std.
  auto stats = std::make_shared<std::vector<Real>>(rows * 2);
  auto xv = x.values();
  auto gv = gamma.values(), bv = beta.values();
  auto ov = out.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* row = xv.data() + r * d;
    Real* orow = ov.data() + r * d;
    Real mean = Real(0);
    for (int j = 0; j < d; ++j) mean += row[j];
    mean /= Real(d);
    Real var = Real(0);
    for (int j = 0; j < d; ++j) {
      const Real c = row[j] - mean;
      var += c * c;
    }
    var /= Real(d);
    const Real inv_std = Real(1) / std::sqrt(var + eps);
    (*stats)[2 * r] = mean;
    (*stats)[2 * r + 1] = inv_std;
    for (int j = 0; j < d; ++j) {
      orow[j] = (row[j] - mean) * inv_std * gv[j] + bv[j];
    }
  }
  if (ctx.tape != nullptr && (x.requires_grad() || gamma.requires_grad() ||
                              beta.requires_grad())) {
    out.set_requires_grad(true);
    ctx.tape->record("layer_norm",
                     [x, gamma, beta, out, stats, rows, d]() mutable {
      auto go = out.grad();
      auto xv = x.values();
      auto gv = gamma.values();
      for (std::size_t r = 0; r < rows; ++r) {
        const Real mean = (*stats)[2 * r];
        const Real inv_std = (*stats)[2 * r + 1];
        const Real* row = xv.data() + r * d;
        const Real* grow = go.data() + r * d;
        // xhat and the two row sums the input gradient needs.
        Real sum_g = Real(0), sum_gx = Real(0);
        for (int j = 0; j < d; ++j) {
          const Real xhat = (row[j] - mean) * inv_std;
          const Real gj = grow[j] * gv[j];
          sum_g += gj;
          sum_gx += gj * xhat;
        }
        if (gamma.requires_grad()) {
          auto gg = gamma.grad();
          for (int j = 0; j < d; ++j) {
            gg[j] += grow[j] * (row[j] - mean) * inv_std;
          }
        }
        if (beta.requires_grad()) {
          auto gb = beta.grad();
          for (int j = 0; j < d; ++j) gb[j] += grow[j];
        }
        if (x.requires_grad()) {
          auto gx = x.grad();
          Real* gxrow = gx.data() + r * d;
          const Real invd = Real(1) / Real(d);
          for (int j = 0; j < d; ++j) {
            const Real xhat = (row[j] - mean) * inv_std;
            const Real gj = grow[j] * gv[j];
            gxrow[j] += inv_std * (gj - invd * sum_g - xhat * invd * sum_gx);
          }
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Convolutions.

enum class ConvMode {
  kConv2d,      // x [Ci,H,W], kernel [Co,Ci,Kh,Kw] -> [Co,H',W']
  kDepthwise1d, // x [T,C],   kernel [C,K]          -> [T',C]
  kPointwise1d  // x [T,Ci],  kernel [Ci,Co]        -> [T',Co]
};

inline int conv_out_len(int in, int kernel, int stride, int padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

namespace detail {

inline void check_conv_axis(int in, int kernel, int stride, int padding,
                            const char* axis) {
  if (stride < 1) throw ConfigError("convolution: stride must be >= 1");
  if (padding < 0) throw ConfigError("convolution: padding must be >= 0");
  if (kernel > in + 2 * padding) {
    throw ShapeError(std::string("convolution: kernel ") +
                     std::to_string(kernel) + " exceeds padded input " +
                     std::to_string(in + 2 * padding) + " on " + axis);
  }
}

}  // namespace detail

template <typename Real>
TensorT<Real> convolution(OpContextT<Real>& ctx, TensorT<Real> x,
                          TensorT<Real> kernel, ConvMode mode, int stride,
                          int padding) {
  switch (mode) {
    case ConvMode::kConv2d: {
      detail::check_rank(x.shape(), 3, "conv2d input");
      detail::check_rank(kernel.shape(), 4, "conv2d kernel");
      const int ci = x.extent(0), h = x.extent(1), w = x.extent(2);
      const int co = kernel.extent(0), kci = kernel.extent(1),
                kh = kernel.extent(2), kw = kernel.extent(3);
      if (kci != ci) {
        throw ShapeError("conv2d: input channels " + std::to_string(ci) +
                         " vs kernel channels " + std::to_string(kci));
      }
      detail::check_conv_axis(h, kh, stride, padding, "height");
      detail::check_conv_axis(w, kw, stride, padding, "width");
      const int oh = conv_out_len(h, kh, stride, padding);
      const int ow = conv_out_len(w, kw, stride, padding);
      const int cols = ci * kh * kw;
      const int orows = oh * ow;

      // im2col patches [oh*ow x ci*kh*kw]; kept alive for the backward pass.
      auto patches =
          std::make_shared<std::vector<Real>>(static_cast<std::size_t>(orows) *
                                              cols);
      auto xv = x.values();
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          Real* prow =
              patches->data() +
              (static_cast<std::size_t>(oy) * ow + ox) * cols;
          for (int c = 0; c < ci; ++c) {
            for (int ky = 0; ky < kh; ++ky) {
              const int iy = oy * stride + ky - padding;
              for (int kx = 0; kx < kw; ++kx) {
                const int ix = ox * stride + kx - padding;
                Real v = Real(0);
                if (iy >= 0 && iy < h && ix >= 0 && ix < w) {
                  v = xv[(static_cast<std::size_t>(c) * h + iy) * w + ix];
                }
                prow[(c * kh + ky) * kw + kx] = v;
              }
            }
          }
        }
      }
      // out_mat [orows x co] = patches @ kernel^T; kernel rows are already
      // the [ci*kh*kw] patch layout.
      std::vector<Real> kt(static_cast<std::size_t>(cols) * co);
      detail::transpose_into(kernel.values().data(), kt.data(), co, cols);
      std::vector<Real> out_mat(static_cast<std::size_t>(orows) * co, Real(0));
      detail::gemm_accum(patches->data(), kt.data(), out_mat.data(), orows,
                         cols, co);
      TensorT<Real> out({co, oh, ow});
      auto ov = out.values();
      for (int c = 0; c < co; ++c) {
        for (int r = 0; r < orows; ++r) {
          ov[static_cast<std::size_t>(c) * orows + r] =
              out_mat[static_cast<std::size_t>(r) * co + c];
        }
      }
      if (ctx.taping(x, kernel)) {
        out.set_requires_grad(true);
        ctx.tape->record("conv2d", [x, kernel, out, patches, ci, h, w, co, kh,
                                    kw, oh, ow, stride, padding]() mutable {
          const int cols = ci * kh * kw;
          const int orows = oh * ow;
          auto go = out.grad();
          // g_mat [orows x co] from the [co, oh, ow] layout.
          std::vector<Real> g_mat(static_cast<std::size_t>(orows) * co);
          for (int c = 0; c < co; ++c) {
            for (int r = 0; r < orows; ++r) {
              g_mat[static_cast<std::size_t>(r) * co + c] =
                  go[static_cast<std::size_t>(c) * orows + r];
            }
          }
          if (kernel.requires_grad()) {
            // dK += g_mat^T @ patches
            std::vector<Real> gt(static_cast<std::size_t>(co) * orows);
            detail::transpose_into(g_mat.data(), gt.data(), orows, co);
            detail::gemm_accum(gt.data(), patches->data(),
                               kernel.grad().data(), co, orows, cols);
          }
          if (x.requires_grad()) {
            // dpatches = g_mat @ kernel, then scatter back (col2im).
            std::vector<Real> dp(static_cast<std::size_t>(orows) * cols,
                                 Real(0));
            detail::gemm_accum(g_mat.data(), kernel.values().data(), dp.data(),
                               orows, co, cols);
            auto gx = x.grad();
            for (int oy = 0; oy < oh; ++oy) {
              for (int ox = 0; ox < ow; ++ox) {
                const Real* prow =
                    dp.data() + (static_cast<std::size_t>(oy) * ow + ox) * cols;
                for (int c = 0; c < ci; ++c) {
                  for (int ky = 0; ky < kh; ++ky) {
                    const int iy = oy * stride + ky - padding;
                    if (iy < 0 || iy >= h) continue;
                    for (int kx = 0; kx < kw; ++kx) {
                      const int ix = ox * stride + kx - padding;
                      if (ix < 0 || ix >= w) continue;
                      gx[(static_cast<std::size_t>(c) * h + iy) * w + ix] +=
                          prow[(c * kh + ky) * kw + kx];
                    }
                  }
                }
              }
            }
          }
        });
      }
      return out;
    }

    case ConvMode::kDepthwise1d: {
      detail::check_rank(x.shape(), 2, "depthwise input");
      detail::check_rank(kernel.shape(), 2, "depthwise kernel");
      const int t = x.extent(0), c = x.extent(1);
      const int kc = kernel.extent(0), k = kernel.extent(1);
      if (kc != c) {
        throw ShapeError("depthwise: channels " + std::to_string(c) +
                         " vs kernel " + std::to_string(kc));
      }
      detail::check_conv_axis(t, k, stride, padding, "time");
      const int ot = conv_out_len(t, k, stride, padding);
      TensorT<Real> out({ot, c});
      auto xv = x.values();
      auto kv = kernel.values();
      auto ov = out.values();
      for (int o = 0; o < ot; ++o) {
        Real* orow = ov.data() + static_cast<std::size_t>(o) * c;
        for (int kk = 0; kk < k; ++kk) {
          const int it = o * stride + kk - padding;
          if (it < 0 || it >= t) continue;
          const Real* xrow = xv.data() + static_cast<std::size_t>(it) * c;
          for (int ch = 0; ch < c; ++ch) {
            orow[ch] += xrow[ch] * kv[static_cast<std::size_t>(ch) * k + kk];
          }
        }
      }
      if (ctx.taping(x, kernel)) {
        out.set_requires_grad(true);
        ctx.tape->record("depthwise1d",
                         [x, kernel, out, t, c, k, ot, stride,
                          padding]() mutable {
          auto go = out.grad();
          auto xv = x.values();
          auto kv = kernel.values();
          for (int o = 0; o < ot; ++o) {
            const Real* grow = go.data() + static_cast<std::size_t>(o) * c;
            for (int kk = 0; kk < k; ++kk) {
              const int it = o * stride + kk - padding;
              if (it < 0 || it >= t) continue;
              if (x.requires_grad()) {
                auto gx = x.grad();
                Real* gxrow = gx.data() + static_cast<std::size_t>(it) * c;
                for (int ch = 0; ch < c; ++ch) {
                  gxrow[ch] +=
                      grow[ch] * kv[static_cast<std::size_t>(ch) * k + kk];
                }
              }
              if (kernel.requires_grad()) {
                auto gk = kernel.grad();
                const Real* xrow =
                    xv.data() + static_cast<std::size_t>(it) * c;
                for (int ch = 0; ch < c; ++ch) {
                  gk[static_cast<std::size_t>(ch) * k + kk] +=
                      grow[ch] * xrow[ch];
                }
              }
            }
          }
        });
      }
      return out;
    }

    case ConvMode::kPointwise1d: {
      detail::check_rank(x.shape(), 2, "pointwise input");
      detail::check_rank(kernel.shape(), 2, "pointwise kernel");
      const int t = x.extent(0), ci = x.extent(1);
      const int kci = kernel.extent(0), co = kernel.extent(1);
      if (kci != ci) {
        throw ShapeError("pointwise: channels " + std::to_string(ci) +
                         " vs kernel " + std::to_string(kci));
      }
      detail::check_conv_axis(t, 1, stride, padding, "time");
      const int ot = conv_out_len(t, 1, stride, padding);
      TensorT<Real> out({ot, co});
      auto xv = x.values();
      auto kv = kernel.values();
      auto ov = out.values();
      for (int o = 0; o < ot; ++o) {
        const int it = o * stride - padding;
        if (it < 0 || it >= t) continue;  // padded rows stay zero
        const Real* xrow = xv.data() + static_cast<std::size_t>(it) * ci;
        Real* orow = ov.data() + static_cast<std::size_t>(o) * co;
        for (int i = 0; i < ci; ++i) {
          const Real xi = xrow[i];
          const Real* krow = kv.data() + static_cast<std::size_t>(i) * co;
          for (int j = 0; j < co; ++j) orow[j] += xi * krow[j];
        }
      }
      if (ctx.taping(x, kernel)) {
        out.set_requires_grad(true);
        ctx.tape->record("pointwise1d",
                         [x, kernel, out, t, ci, co, ot, stride,
                          padding]() mutable {
          auto go = out.grad();
          auto xv = x.values();
          auto kv = kernel.values();
          for (int o = 0; o < ot; ++o) {
            const int it = o * stride - padding;
            if (it < 0 || it >= t) continue;
            const Real* grow = go.data() + static_cast<std::size_t>(o) * co;
            if (x.requires_grad()) {
              auto gx = x.grad();
              Real* gxrow = gx.data() + static_cast<std::size_t>(it) * ci;
              for (int i = 0; i < ci; ++i) {
                const Real* krow =
                    kv.data() + static_cast<std::size_t>(i) * co;
                Real acc = Real(0);
                for (int j = 0; j < co; ++j) acc += grow[j] * krow[j];
                gxrow[i] += acc;
              }
            }
            if (kernel.requires_grad()) {
              auto gk = kernel.grad();
              const Real* xrow =
                  xv.data() + static_cast<std::size_t>(it) * ci;
              for (int i = 0; i < ci; ++i) {
                Real* krow = gk.data() + static_cast<std::size_t>(i) * co;
                const Real xi = xrow[i];
                for (int j = 0; j < co; ++j) krow[j] += grow[j] * xi;
              }
            }
          }
        });
      }
      return out;
    }
  }
  throw ContractError("convolution: bad mode");
}

// ---------------------------------------------------------------------------
// Dropout.

// Inverted dropout: keep with probability 1-p, scale kept values by
// 1/(1-p) so expectations match eval.  Identity when not training or p == 0.
template <typename Real>
TensorT<Real> dropout(OpContextT<Real>& ctx, TensorT<Real> x, Real p) {
  if (!(p >= Real(0) && p < Real(1))) {
    throw ConfigError("dropout: probability must be in [0,1), got " +
                      std::to_string(static_cast<double>(p)));
  }
  if (!ctx.training || p == Real(0)) return x;
  TensorT<Real> out(x.shape());
  const Real inv_keep = Real(1) / (Real(1) - p);
  auto mask = std::make_shared<std::vector<std::uint8_t>>(x.size());
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  auto xv = x.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) {
    const bool keep = dist(ctx.rng) >= static_cast<double>(p);
    (*mask)[i] = keep ? 1 : 0;
    ov[i] = keep ? xv[i] * inv_keep : Real(0);
  }
  if (ctx.taping(x)) {
    out.set_requires_grad(true);
    ctx.tape->record("dropout", [x, out, mask, inv_keep]() mutable {
      auto go = out.grad();
      auto gx = x.grad();
      for (std::size_t i = 0; i < go.size(); ++i) {
        if ((*mask)[i]) gx[i] += go[i] * inv_keep;
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structural ops.

template <typename Real>
TensorT<Real> transpose2d(OpContextT<Real>& ctx, TensorT<Real> x) {
  detail::check_rank(x.shape(), 2, "transpose2d");
  const int rows = x.extent(0), cols = x.extent(1);
  TensorT<Real> out({cols, rows});
  detail::transpose_into(x.values().data(), out.values().data(), rows, cols);
  if (ctx.taping(x)) {
    out.set_requires_grad(true);
    ctx.tape->record("transpose2d", [x, out, rows, cols]() mutable {
      auto go = out.grad();
      auto gx = x.grad();
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
          gx[static_cast<std::size_t>(i) * cols + j] +=
              go[static_cast<std::size_t>(j) * rows + i];
        }
      }
    });
  }
  return out;
}

template <typename Real>
TensorT<Real> slice_rows(OpContextT<Real>& ctx, TensorT<Real> x, int r0,
                         int r1) {
  detail::check_rank(x.shape(), 2, "slice_rows");
  const int rows = x.extent(0), cols = x.extent(1);
  if (r0 < 0 || r1 > rows || r0 >= r1) {
    throw ShapeError("slice_rows: [" + std::to_string(r0) + "," +
                     std::to_string(r1) + ") of " + format_shape(x.shape()));
  }
  TensorT<Real> out({r1 - r0, cols});
  auto xv = x.values();
  auto ov = out.values();
  std::copy(xv.begin() + static_cast<std::size_t>(r0) * cols,
            xv.begin() + static_cast<std::size_t>(r1) * cols, ov.begin());
  if (ctx.taping(x)) {
    out.set_requires_grad(true);
    ctx.tape->record("slice_rows", [x, out, r0, cols]() mutable {
      auto go = out.grad();
      auto gx = x.grad();
      const std::size_t off = static_cast<std::size_t>(r0) * cols;
      for (std::size_t i = 0; i < go.size(); ++i) gx[off + i] += go[i];
    });
  }
  return out;
}

template <typename Real>
TensorT<Real> slice_cols(OpContextT<Real>& ctx, TensorT<Real> x, int c0,
                         int c1) {
  detail::check_rank(x.shape(), 2, "slice_cols");
  const int rows = x.extent(0), cols = x.extent(1);
  if (c0 < 0 || c1 > cols || c0 >= c1) {
    throw ShapeError("slice_cols: [" + std::to_string(c0) + "," +
                     std::to_string(c1) + ") of " + format_shape(x.shape()));
  }
  const int w = c1 - c0;
  TensorT<Real> out({rows, w});
  auto xv = x.values();
  auto ov = out.values();
  for (int i = 0; i < rows; ++i) {
    std::copy_n(xv.data() + static_cast<std::size_t>(i) * cols + c0, w,
                ov.data() + static_cast<std::size_t>(i) * w);
  }
  if (ctx.taping(x)) {
    out.set_requires_grad(true);
    ctx.tape->record("slice_cols", [x, out, rows, cols, c0, w]() mutable {
      auto go = out.grad();
      auto gx = x.grad();
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < w; ++j) {
          gx[static_cast<std::size_t>(i) * cols + c0 + j] +=
              go[static_cast<std::size_t>(i) * w + j];
        }
      }
    });
  }
  return out;
}

template <typename Real>
TensorT<Real> concat_cols(OpContextT<Real>& ctx,
                          const std::vector<TensorT<Real>>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  const int rows = parts[0].extent(0);
  int total = 0;
  for (const auto& p : parts) {
    detail::check_rank(p.shape(), 2, "concat_cols");
    if (p.extent(0) != rows) {
      throw ShapeError("concat_cols: row mismatch " +
                       format_shape(parts[0].shape()) + " vs " +
                       format_shape(p.shape()));
    }
    total += p.extent(1);
  }
  TensorT<Real> out({rows, total});
  auto ov = out.values();
  int col = 0;
  for (const auto& p : parts) {
    const int w = p.extent(1);
    auto pv = p.values();
    for (int i = 0; i < rows; ++i) {
      std::copy_n(pv.data() + static_cast<std::size_t>(i) * w, w,
                  ov.data() + static_cast<std::size_t>(i) * total + col);
    }
    col += w;
  }
  bool any = false;
  for (const auto& p : parts) any = any || p.requires_grad();
  if (ctx.tape != nullptr && any) {
    out.set_requires_grad(true);
    auto saved = parts;
    ctx.tape->record("concat_cols", [saved, out, rows, total]() mutable {
      auto go = out.grad();
      int col = 0;
      for (auto& p : saved) {
        const int w = p.extent(1);
        if (p.requires_grad()) {
          auto gp = p.grad();
          for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < w; ++j) {
              gp[static_cast<std::size_t>(i) * w + j] +=
                  go[static_cast<std::size_t>(i) * total + col + j];
            }
          }
        }
        col += w;
      }
    });
  }
  return out;
}

// Vertically stacks rank-2 parts that share a column count.
template <typename Real>
TensorT<Real> stack_rows(OpContextT<Real>& ctx,
                         const std::vector<TensorT<Real>>& parts) {
  if (parts.empty()) throw ContractError("stack_rows: no inputs");
  const int cols = parts[0].extent(1);
  int total = 0;
  for (const auto& p : parts) {
    detail::check_rank(p.shape(), 2, "stack_rows");
    if (p.extent(1) != cols) {
      throw ShapeError("stack_rows: column mismatch " +
                       format_shape(parts[0].shape()) + " vs " +
                       format_shape(p.shape()));
    }
    total += p.extent(0);
  }
  TensorT<Real> out({total, cols});
  auto ov = out.values();
  std::size_t off = 0;
  for (const auto& p : parts) {
    auto pv = p.values();
    std::copy(pv.begin(), pv.end(), ov.begin() + off);
    off += pv.size();
  }
  bool any = false;
  for (const auto& p : parts) any = any || p.requires_grad();
  if (ctx.tape != nullptr && any) {
    out.set_requires_grad(true);
    auto saved = parts;
    ctx.tape->record("stack_rows", [saved, out]() mutable {
      auto go = out.grad();
      std::size_t off = 0;
      for (auto& p : saved) {
        if (p.requires_grad()) {
          auto gp = p.grad();
          for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += go[off + i];
        }
        off += p.size();
      }
    });
  }
  return out;
}

template <typename Real>
TensorT<Real> reshape(OpContextT<Real>& ctx, TensorT<Real> x,
                      std::vector<int> shape) {
  std::size_t n = 1;
  for (int e : shape) n *= static_cast<std::size_t>(e > 0 ? e : 0);
  if (n != x.size()) {
    throw ShapeError("reshape: " + format_shape(x.shape()) + " -> " +
                     format_shape(shape));
  }
  TensorT<Real> out(shape, std::vector<Real>(x.values().begin(),
                                             x.values().end()));
  if (ctx.taping(x)) {
    out.set_requires_grad(true);
    ctx.tape->record("reshape", [x, out]() mutable {
      auto go = out.grad();
      auto gx = x.grad();
      for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i];
    });
  }
  return out;
}

// [C,T,F] -> [T, C*F]: per output frame, channels-major flatten.  This is
// the layout handoff between 2-D subsampling and frame-sequence layers.
template <typename Real>
TensorT<Real> chw_to_frames(OpContextT<Real>& ctx, TensorT<Real> x) {
  detail::check_rank(x.shape(), 3, "chw_to_frames");
  const int c = x.extent(0), t = x.extent(1), f = x.extent(2);
  TensorT<Real> out({t, c * f});
  auto xv = x.values();
  auto ov = out.values();
  for (int ch = 0; ch < c; ++ch) {
    for (int tt = 0; tt < t; ++tt) {
      for (int ff = 0; ff < f; ++ff) {
        ov[static_cast<std::size_t>(tt) * (c * f) + ch * f + ff] =
            xv[(static_cast<std::size_t>(ch) * t + tt) * f + ff];
      }
    }
  }
  if (ctx.taping(x)) {
    out.set_requires_grad(true);
    ctx.tape->record("chw_to_frames", [x, out, c, t, f]() mutable {
      auto go = out.grad();
      auto gx = x.grad();
      for (int ch = 0; ch < c; ++ch) {
        for (int tt = 0; tt < t; ++tt) {
          for (int ff = 0; ff < f; ++ff) {
            gx[(static_cast<std::size_t>(ch) * t + tt) * f + ff] +=
                go[static_cast<std::size_t>(tt) * (c * f) + ch * f + ff];
          }
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reductions.

template <typename Real>
TensorT<Real> mean_rows(OpContextT<Real>& ctx, TensorT<Real> x) {
  detail::check_rank(x.shape(), 2, "mean_rows");
  const int rows = x.extent(0), cols = x.extent(1);
  TensorT<Real> out({1, cols});
  auto xv = x.values();
  auto ov = out.values();
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      ov[j] += xv[static_cast<std::size_t>(i) * cols + j];
    }
  }
  const Real inv = Real(1) / Real(rows);
  for (int j = 0; j < cols; ++j) ov[j] *= inv;
  if (ctx.taping(x)) {
    out.set_requires_grad(true);
    ctx.tape->record("mean_rows", [x, out, rows, cols, inv]() mutable {
      auto go = out.grad();
      auto gx = x.grad();
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
          gx[static_cast<std::size_t>(i) * cols + j] += go[j] * inv;
        }
      }
    });
  }
  return out;
}

template <typename Real>
TensorT<Real> sum_all(OpContextT<Real>& ctx, TensorT<Real> x) {
  TensorT<Real> out({1});
  Real acc = Real(0);
  for (Real v : x.values()) acc += v;
  out.values()[0] = acc;
  if (ctx.taping(x)) {
    out.set_requires_grad(true);
    ctx.tape->record("sum_all", [x, out]() mutable {
      const Real g = out.grad()[0];
      auto gx = x.grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
    });
  }
  return out;
}

template <typename Real>
TensorT<Real> mean_all(OpContextT<Real>& ctx, TensorT<Real> x) {
  TensorT<Real> out({1});
  Real acc = Real(0);
  for (Real v : x.values()) acc += v;
  const Real inv = Real(1) / Real(x.size());
  out.values()[0] = acc * inv;
  if (ctx.taping(x)) {
    out.set_requires_grad(true);
    ctx.tape->record("mean_all", [x, out, inv]() mutable {
      const Real g = out.grad()[0] * inv;
      auto gx = x.grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
    });
  }
  return out;
}

}  // namespace sedkit

#endif  // SEDKIT_TENSOR_HPP_
