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

#ifndef SEDKIT_ADAM_HPP_
#define SEDKIT_ADAM_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "sedkit/tensor.hpp"

namespace sedkit {

// Ordered, named collection of trainable tensors.  Order is the creation
// order and is what the optimizer state and checkpoints key on.
template <typename Real>
class ParamStoreT {
 public:
  TensorT<Real>& add(const std::string& name, TensorT<Real> t) {
    if (index_.count(name)) {
      throw ContractError("parameter \"" + name + "\" already registered");
    }
    t.set_requires_grad(true);
    index_[name] = items_.size();
    items_.push_back({name, std::move(t)});
    return items_.back().tensor;
  }

  TensorT<Real>& get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) {
      throw ContractError("unknown parameter \"" + name + "\"");
    }
    return items_[it->second].tensor;
  }
  const TensorT<Real>& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
      throw ContractError("unknown parameter \"" + name + "\"");
    }
    return items_[it->second].tensor;
  }
  bool contains(const std::string& name) const { return index_.count(name); }

  std::size_t size() const { return items_.size(); }
  const std::string& name(std::size_t i) const { return items_[i].name; }
  TensorT<Real>& tensor(std::size_t i) { return items_[i].tensor; }
  const TensorT<Real>& tensor(std::size_t i) const { return items_[i].tensor; }

  void zero_grad_all() {
    for (auto& item : items_) item.tensor.zero_grad();
  }

  std::int64_t total_elements() const {
    std::int64_t n = 0;
    for (const auto& item : items_) {
      n += static_cast<std::int64_t>(item.tensor.size());
    }
    return n;
  }

 private:
  struct Item {
    std::string name;
    TensorT<Real> tensor;
  };
  std::vector<Item> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

using ParamStore = ParamStoreT<float>;

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction.  Moments are kept per parameter in store
// order; the same store must be passed to every step() call.
template <typename Real>
class AdamT {
 public:
  explicit AdamT(const AdamConfig& cfg) : cfg_(cfg) {
    if (!(cfg.lr >= 0)) throw ConfigError("adam: lr must be >= 0");
    if (!(cfg.beta1 >= 0 && cfg.beta1 < 1) ||
        !(cfg.beta2 >= 0 && cfg.beta2 < 1)) {
      throw ConfigError("adam: betas must be in [0,1)");
    }
    if (!(cfg.eps > 0)) throw ConfigError("adam: eps must be > 0");
  }

  const AdamConfig& config() const { return cfg_; }
  std::int64_t steps() const { return t_; }

  void step(ParamStoreT<Real>& params) {
    if (m_.empty()) {
      m_.resize(params.size());
      v_.resize(params.size());
      for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i].assign(params.tensor(i).size(), Real(0));
        v_[i].assign(params.tensor(i).size(), Real(0));
      }
    }
    if (m_.size() != params.size()) {
      throw ContractError("adam: parameter store changed size");
    }
    ++t_;
    const Real b1 = static_cast<Real>(cfg_.beta1);
    const Real b2 = static_cast<Real>(cfg_.beta2);
    const Real eps = static_cast<Real>(cfg_.eps);
    const Real corr1 =
        Real(1) - static_cast<Real>(std::pow(cfg_.beta1, double(t_)));
    const Real corr2 =
        Real(1) - static_cast<Real>(std::pow(cfg_.beta2, double(t_)));
    const Real lr = static_cast<Real>(cfg_.lr);
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& tensor = params.tensor(i);
      auto g = tensor.grad();  // zeros if backward never touched it
      auto pv = tensor.values();
      auto& m = m_[i];
      auto& v = v_[i];
      if (m.size() != pv.size()) {
        throw ContractError("adam: parameter \"" + params.name(i) +
                            "\" changed size");
      }
      for (std::size_t j = 0; j < pv.size(); ++j) {
        m[j] = b1 * m[j] + (Real(1) - b1) * g[j];
        v[j] = b2 * v[j] + (Real(1) - b2) * g[j] * g[j];
        const Real mhat = m[j] / corr1;
        const Real vhat = v[j] / corr2;
        pv[j] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }

  // Checkpoint access: first and second moments in store order.
  const std::vector<std::vector<Real>>& first_moments() const { return m_; }
  const std::vector<std::vector<Real>>& second_moments() const { return v_; }

  void restore(std::int64_t t, std::vector<std::vector<Real>> m,
               std::vector<std::vector<Real>> v) {
    t_ = t;
    m_ = std::move(m);
    v_ = std::move(v);
  }

 private:
  AdamConfig cfg_;
  std::int64_t t_ = 0;
  std::vector<std::vector<Real>> m_, v_;
};

using Adam = AdamT<float>;

}  // namespace sedkit

#endif  // SEDKIT_ADAM_HPP_
