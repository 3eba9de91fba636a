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

// Tensor engine tests: frozen forward oracles, naive reference
// implementations, tape semantics, and double-precision central-difference
// gradient checks for every differentiable operation.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "sedkit/adam.hpp"
#include "sedkit/tensor.hpp"

namespace {

using sedkit::Activation;
using sedkit::ConvMode;
using TensorD = sedkit::TensorT<double>;
using TapeD = sedkit::TapeT<double>;
using CtxD = sedkit::OpContextT<double>;

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// Fixed pseudo-random weights turn a non-scalar output into a scalar loss
// without symmetric gradients hiding indexing bugs.
TensorD weights_like(const std::vector<int>& shape, unsigned seed) {
  std::mt19937 rng(seed);
  return TensorD::uniform(shape, -1.0, 1.0, rng);
}

TensorD weighted_sum(CtxD& ctx, TensorD t, unsigned seed = 99) {
  TensorD w = weights_like(t.shape(), seed);
  return sedkit::sum_all(ctx, sedkit::mul(ctx, t, w));
}

// Runs `build` once under a tape, then compares every input gradient against
// a central difference of the untaped forward pass.  `build` must be
// deterministic given the context RNG seed.
template <typename Fn>
double max_grad_err(std::vector<TensorD*> inputs, Fn&& build,
                    unsigned rng_seed = 7, double h = 1e-4) {
  for (TensorD* t : inputs) t->set_requires_grad(true);
  TapeD tape;
  CtxD ctx{&tape, true};
  ctx.rng.seed(rng_seed);
  TensorD loss = build(ctx);
  REQUIRE(loss.size() == 1u);
  sedkit::backward(tape, loss);

  double worst = 0.0;
  for (TensorD* t : inputs) {
    auto vals = t->values();
    auto grads = t->grad();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double saved = vals[i];
      auto eval = [&](double v) {
        vals[i] = v;
        CtxD fwd;
        fwd.training = true;
        fwd.rng.seed(rng_seed);
        return build(fwd).item();
      };
      const double numeric = (eval(saved + h) - eval(saved - h)) / (2.0 * h);
      vals[i] = saved;
      worst = std::max(worst, rel_err(grads[i], numeric));
    }
  }
  return worst;
}

TensorD random_tensor(std::vector<int> shape, unsigned seed, double lo = -1.0,
                      double hi = 1.0) {
  std::mt19937 rng(seed);
  return TensorD::uniform(std::move(shape), lo, hi, rng);
}

// Naive direct convolution references (independent of the im2col path).
TensorD naive_conv2d(const TensorD& x, const TensorD& k, int stride, int pad) {
  const int ci = x.extent(0), h = x.extent(1), w = x.extent(2);
  const int co = k.extent(0), kh = k.extent(2), kw = k.extent(3);
  const int oh = sedkit::conv_out_len(h, kh, stride, pad);
  const int ow = sedkit::conv_out_len(w, kw, stride, pad);
  TensorD out({co, oh, ow});
  for (int oc = 0; oc < co; ++oc) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (int ic = 0; ic < ci; ++ic) {
          for (int ky = 0; ky < kh; ++ky) {
            for (int kx = 0; kx < kw; ++kx) {
              const int iy = oy * stride + ky - pad;
              const int ix = ox * stride + kx - pad;
              if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
              acc += x.values()[(static_cast<std::size_t>(ic) * h + iy) * w +
                                ix] *
                     k.values()[((static_cast<std::size_t>(oc) * ci + ic) *
                                     kh +
                                 ky) *
                                    kw +
                                kx];
            }
          }
        }
        out.values()[(static_cast<std::size_t>(oc) * oh + oy) * ow + ox] = acc;
      }
    }
  }
  return out;
}

TensorD naive_depthwise1d(const TensorD& x, const TensorD& k, int stride,
                          int pad) {
  const int t = x.extent(0), c = x.extent(1), klen = k.extent(1);
  const int ot = sedkit::conv_out_len(t, klen, stride, pad);
  TensorD out({ot, c});
  for (int o = 0; o < ot; ++o) {
    for (int ch = 0; ch < c; ++ch) {
      double acc = 0.0;
      for (int kk = 0; kk < klen; ++kk) {
        const int it = o * stride + kk - pad;
        if (it < 0 || it >= t) continue;
        acc += x.at(it, ch) * k.at(ch, kk);
      }
      out.at(o, ch) = acc;
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Forward oracles.

TEST_CASE("matmul matches the frozen 2x2 oracle") {
  CtxD ctx;
  TensorD a({2, 2}, {1, 2, 3, 4});
  TensorD b({2, 2}, {5, 6, 7, 8});
  TensorD c = sedkit::matmul(ctx, a, b);
  CHECK(c.at(0, 0) == 19.0);
  CHECK(c.at(0, 1) == 22.0);
  CHECK(c.at(1, 0) == 43.0);
  CHECK(c.at(1, 1) == 50.0);
}

TEST_CASE("matmul rejects mismatched shapes") {
  CtxD ctx;
  TensorD a({2, 3}, std::vector<double>(6, 1.0));
  TensorD b({2, 2}, std::vector<double>(4, 1.0));
  CHECK_THROWS_AS(sedkit::matmul(ctx, a, b), sedkit::ShapeError);
  TensorD v({4}, std::vector<double>(4, 1.0));
  CHECK_THROWS_AS(sedkit::matmul(ctx, v, b), sedkit::ShapeError);
}

TEST_CASE("activations match frozen scalar oracles") {
  CtxD ctx;
  TensorD x({1, 4}, {10.0, 0.0, 0.5, 1.0});
  TensorD sig = sedkit::activation(ctx, x, Activation::kSigmoid);
  CHECK(sig.values()[0] == doctest::Approx(0.9999546021312976).epsilon(1e-12));
  CHECK(sig.values()[1] == 0.5);

  TensorD th = sedkit::activation(ctx, x, Activation::kTanh);
  CHECK(th.values()[2] == doctest::Approx(0.46211715726000974).epsilon(1e-12));

  TensorD sw = sedkit::activation(ctx, x, Activation::kSwish);
  CHECK(sw.values()[3] == doctest::Approx(0.7310585786300049).epsilon(1e-12));

  TensorD r({1, 3}, {-2.0, 0.0, 3.5});
  TensorD relu = sedkit::activation(ctx, r, Activation::kRelu);
  CHECK(relu.values()[0] == 0.0);
  CHECK(relu.values()[1] == 0.0);
  CHECK(relu.values()[2] == 3.5);
}

TEST_CASE("glu splits the last dimension and gates with sigmoid") {
  CtxD ctx;
  TensorD x({1, 4}, {1.0, -2.0, 2.0, 0.0});
  TensorD y = sedkit::activation(ctx, x, Activation::kGlu);
  REQUIRE(y.shape() == std::vector<int>{1, 2});
  CHECK(y.values()[0] ==
        doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-12));
  CHECK(y.values()[1] == doctest::Approx(-2.0 * 0.5).epsilon(1e-12));

  TensorD odd({1, 3}, {1.0, 2.0, 3.0});
  CHECK_THROWS_AS(sedkit::activation(ctx, odd, Activation::kGlu),
                  sedkit::ShapeError);
}

TEST_CASE("softmax matches the frozen [1,2,3] oracle and normalizes rows") {
  CtxD ctx;
  TensorD x({1, 3}, {1.0, 2.0, 3.0});
  TensorD y = sedkit::activation(ctx, x, Activation::kSoftmaxLastDim);
  CHECK(y.values()[0] == doctest::Approx(0.09003057317038046).epsilon(1e-12));
  CHECK(y.values()[1] == doctest::Approx(0.24472847105479767).epsilon(1e-12));
  CHECK(y.values()[2] == doctest::Approx(0.6652409557748219).epsilon(1e-12));

  TensorD big = random_tensor({5, 7}, 11, -30.0, 30.0);
  TensorD p = sedkit::activation(ctx, big, Activation::kSoftmaxLastDim);
  for (int i = 0; i < 5; ++i) {
    double row = 0.0;
    for (int j = 0; j < 7; ++j) row += p.at(i, j);
    CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("layer_norm matches the frozen row oracle") {
  CtxD ctx;
  TensorD x({1, 3}, {1.0, 2.0, 3.0});
  TensorD gamma = TensorD::full({3}, 1.0);
  TensorD beta = TensorD::full({3}, 0.0);
  TensorD y = sedkit::layer_norm(ctx, x, gamma, beta);
  CHECK(y.values()[0] == doctest::Approx(-1.2247356859083902).epsilon(1e-9));
  CHECK(y.values()[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(y.values()[2] == doctest::Approx(1.2247356859083902).epsilon(1e-9));

  TensorD gamma2 = TensorD::full({3}, 2.0);
  TensorD beta2 = TensorD::full({3}, 1.0);
  TensorD z = sedkit::layer_norm(ctx, x, gamma2, beta2);
  CHECK(z.values()[0] ==
        doctest::Approx(1.0 - 2.0 * 1.2247356859083902).epsilon(1e-9));
  CHECK(z.values()[2] ==
        doctest::Approx(1.0 + 2.0 * 1.2247356859083902).epsilon(1e-9));
}

TEST_CASE("conv_out_len reproduces the two-stage subsampling arithmetic") {
  CHECK(sedkit::conv_out_len(98, 3, 2, 0) == 48);
  CHECK(sedkit::conv_out_len(48, 3, 2, 0) == 23);
  CHECK(sedkit::conv_out_len(80, 3, 2, 0) == 39);
  CHECK(sedkit::conv_out_len(10, 3, 1, 1) == 10);  // same-pad
}

TEST_CASE("conv2d matches a naive direct convolution") {
  CtxD ctx;
  TensorD x({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  TensorD k({1, 1, 2, 2}, {1, 0, 0, 1});
  TensorD y = sedkit::convolution(ctx, x, k, ConvMode::kConv2d, 1, 0);
  REQUIRE(y.shape() == std::vector<int>{1, 2, 2});
  CHECK(y.values()[0] == 6.0);
  CHECK(y.values()[1] == 8.0);
  CHECK(y.values()[2] == 12.0);
  CHECK(y.values()[3] == 14.0);

  for (int stride : {1, 2}) {
    for (int pad : {0, 1}) {
      TensorD xr = random_tensor({2, 5, 4}, 100 + stride * 10 + pad);
      TensorD kr = random_tensor({3, 2, 3, 3}, 200 + stride * 10 + pad);
      TensorD got = sedkit::convolution(ctx, xr, kr, ConvMode::kConv2d,
                                        stride, pad);
      TensorD want = naive_conv2d(xr, kr, stride, pad);
      REQUIRE(got.shape() == want.shape());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got.values()[i] ==
              doctest::Approx(want.values()[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("depthwise1d matches a naive direct convolution") {
  CtxD ctx;
  TensorD x = random_tensor({7, 3}, 31);
  TensorD k = random_tensor({3, 5}, 32);
  TensorD got = sedkit::convolution(ctx, x, k, ConvMode::kDepthwise1d, 1, 2);
  TensorD want = naive_depthwise1d(x, k, 1, 2);
  REQUIRE(got.shape() == want.shape());
  REQUIRE(got.extent(0) == 7);  // same-length with pad = (K-1)/2
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got.values()[i] == doctest::Approx(want.values()[i]).epsilon(1e-12));
  }
}

TEST_CASE("pointwise1d at stride 1 equals a matmul") {
  CtxD ctx;
  TensorD x = random_tensor({5, 3}, 41);
  TensorD k = random_tensor({3, 2}, 42);
  TensorD conv = sedkit::convolution(ctx, x, k, ConvMode::kPointwise1d, 1, 0);
  TensorD mm = sedkit::matmul(ctx, x, k);
  REQUIRE(conv.shape() == mm.shape());
  for (std::size_t i = 0; i < conv.size(); ++i) {
    CHECK(conv.values()[i] == doctest::Approx(mm.values()[i]).epsilon(1e-12));
  }
}

TEST_CASE("convolution validates geometry") {
  CtxD ctx;
  TensorD x({1, 2, 2}, {1, 2, 3, 4});
  TensorD k({1, 1, 5, 5}, std::vector<double>(25, 0.1));
  CHECK_THROWS_AS(sedkit::convolution(ctx, x, k, ConvMode::kConv2d, 1, 0),
                  sedkit::ShapeError);
  TensorD k2({1, 1, 2, 2}, {1, 0, 0, 1});
  CHECK_THROWS_AS(sedkit::convolution(ctx, x, k2, ConvMode::kConv2d, 0, 0),
                  sedkit::ConfigError);
  CHECK_THROWS_AS(sedkit::convolution(ctx, x, k2, ConvMode::kConv2d, 1, -1),
                  sedkit::ConfigError);
}

TEST_CASE("dropout keeps expectation, zeroes cells, and is a no-op in eval") {
  TensorD x = TensorD::full({200, 500}, 1.0);

  CtxD eval_ctx;  // training = false
  TensorD same = sedkit::dropout(eval_ctx, x, 0.5);
  CHECK(same.same_storage(x));

  CtxD train_ctx;
  train_ctx.training = true;
  TensorD zero_p = sedkit::dropout(train_ctx, x, 0.0);
  CHECK(zero_p.same_storage(x));

  TensorD y = sedkit::dropout(train_ctx, x, 0.5);
  std::size_t zeros = 0;
  double sum = 0.0;
  for (double v : y.values()) {
    if (v == 0.0) {
      ++zeros;
    } else {
      CHECK(v == 2.0);  // inverted scaling of kept cells
    }
    sum += v;
  }
  const double frac = double(zeros) / double(y.size());
  CHECK(frac == doctest::Approx(0.5).epsilon(0.02));
  CHECK(sum / double(y.size()) == doctest::Approx(1.0).epsilon(0.02));

  CHECK_THROWS_AS(sedkit::dropout(train_ctx, x, 1.0), sedkit::ConfigError);
  CHECK_THROWS_AS(sedkit::dropout(train_ctx, x, -0.1), sedkit::ConfigError);
}

TEST_CASE("shape-movement ops produce the expected layouts") {
  CtxD ctx;
  TensorD x({2, 3}, {1, 2, 3, 4, 5, 6});

  TensorD t = sedkit::transpose2d(ctx, x);
  REQUIRE(t.shape() == std::vector<int>{3, 2});
  CHECK(t.at(0, 1) == 4.0);
  CHECK(t.at(2, 0) == 3.0);

  TensorD r = sedkit::slice_rows(ctx, x, 1, 2);
  REQUIRE(r.shape() == std::vector<int>{1, 3});
  CHECK(r.values()[0] == 4.0);
  CHECK_THROWS_AS(sedkit::slice_rows(ctx, x, 1, 1), sedkit::ShapeError);
  CHECK_THROWS_AS(sedkit::slice_rows(ctx, x, 0, 5), sedkit::ShapeError);

  TensorD c = sedkit::slice_cols(ctx, x, 1, 3);
  REQUIRE(c.shape() == std::vector<int>{2, 2});
  CHECK(c.at(0, 0) == 2.0);
  CHECK(c.at(1, 1) == 6.0);

  TensorD cat = sedkit::concat_cols(ctx, {x, x});
  REQUIRE(cat.shape() == std::vector<int>{2, 6});
  CHECK(cat.at(0, 3) == 1.0);
  CHECK(cat.at(1, 5) == 6.0);

  TensorD st = sedkit::stack_rows(ctx, {x, x});
  REQUIRE(st.shape() == std::vector<int>{4, 3});
  CHECK(st.at(2, 0) == 1.0);

  TensorD rs = sedkit::reshape(ctx, x, {3, 2});
  REQUIRE(rs.shape() == std::vector<int>{3, 2});
  CHECK(rs.at(1, 0) == 3.0);  // row-major order preserved
  CHECK_THROWS_AS(sedkit::reshape(ctx, x, {4, 2}), sedkit::ShapeError);

  TensorD chw({2, 2, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
  TensorD fr = sedkit::chw_to_frames(ctx, chw);
  REQUIRE(fr.shape() == std::vector<int>{2, 6});
  // frame t concatenates channel rows: [x[0,t,:], x[1,t,:]]
  CHECK(fr.at(0, 0) == 1.0);
  CHECK(fr.at(0, 3) == 7.0);
  CHECK(fr.at(1, 2) == 6.0);
  CHECK(fr.at(1, 5) == 12.0);
}

TEST_CASE("reductions compute means and sums") {
  CtxD ctx;
  TensorD x({2, 3}, {1, 2, 3, 4, 5, 6});
  TensorD mr = sedkit::mean_rows(ctx, x);
  REQUIRE(mr.shape() == std::vector<int>{1, 3});
  CHECK(mr.values()[0] == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(mr.values()[2] == doctest::Approx(4.5).epsilon(1e-12));

  CHECK(sedkit::sum_all(ctx, x).item() == doctest::Approx(21.0));
  CHECK(sedkit::mean_all(ctx, x).item() == doctest::Approx(3.5));
}

// ---------------------------------------------------------------------------
// Tape semantics.

TEST_CASE("fan-out accumulates gradients additively") {
  TapeD tape;
  CtxD ctx{&tape};
  TensorD x({1, 3}, {1.0, -2.0, 3.0});
  x.set_requires_grad(true);
  TensorD loss = sedkit::sum_all(ctx, sedkit::mul(ctx, x, x));
  sedkit::backward(tape, loss);
  CHECK(x.grad()[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(x.grad()[1] == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(x.grad()[2] == doctest::Approx(6.0).epsilon(1e-12));

  x.zero_grad();
  CHECK(x.grad()[0] == 0.0);

  tape.clear();
  TensorD twice = sedkit::add(ctx, x, x);
  TensorD loss2 = sedkit::sum_all(ctx, twice);
  sedkit::backward(tape, loss2);
  CHECK(x.grad()[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("backward rejects non-scalar losses") {
  TapeD tape;
  CtxD ctx{&tape};
  TensorD x({2, 2}, {1, 2, 3, 4});
  x.set_requires_grad(true);
  TensorD y = sedkit::scale(ctx, x, 2.0);
  CHECK_THROWS_AS(sedkit::backward(tape, y), sedkit::ContractError);
}

TEST_CASE("grad read before any backward pass throws") {
  TensorD x({2}, {1.0, 2.0});
  const TensorD& cx = x;
  CHECK_THROWS_AS((void)cx.grad(), sedkit::ContractError);
}

TEST_CASE("untaped ops record nothing") {
  CtxD ctx;  // no tape
  TensorD x({2, 2}, {1, 2, 3, 4});
  x.set_requires_grad(true);
  TensorD y = sedkit::scale(ctx, x, 3.0);
  CHECK(!y.requires_grad());

  TapeD tape;
  CtxD taped{&tape};
  TensorD z({2, 2}, {1, 2, 3, 4});  // requires_grad false
  TensorD w = sedkit::scale(taped, z, 3.0);
  CHECK(tape.size() == 0u);
  CHECK(!w.requires_grad());
}

TEST_CASE("all_finite flags NaN and infinity") {
  TensorD ok({2}, {1.0, -2.0});
  CHECK(sedkit::all_finite(ok));
  TensorD bad({2}, {1.0, std::nan("")});
  CHECK(!sedkit::all_finite(bad));
  TensorD inf({2}, {1.0, std::numeric_limits<double>::infinity()});
  CHECK(!sedkit::all_finite(inf));
}

// ---------------------------------------------------------------------------
// Gradient checks (64-bit central differences, tolerance 1e-3).

TEST_CASE("gradcheck: matmul") {
  TensorD a = random_tensor({3, 4}, 1);
  TensorD b = random_tensor({4, 2}, 2);
  double err = max_grad_err({&a, &b}, [&](CtxD& ctx) {
    return weighted_sum(ctx, sedkit::matmul(ctx, a, b));
  });
  CHECK(err < 1e-3);
}

TEST_CASE("gradcheck: elementwise arithmetic") {
  TensorD a = random_tensor({3, 3}, 3);
  TensorD b = random_tensor({3, 3}, 4);
  double err = max_grad_err({&a, &b}, [&](CtxD& ctx) {
    TensorD s = sedkit::add(ctx, a, b);
    TensorD d = sedkit::sub(ctx, s, b);
    TensorD m = sedkit::mul(ctx, d, a);
    return weighted_sum(ctx, sedkit::scale(ctx, m, 1.7));
  });
  CHECK(err < 1e-3);
}

TEST_CASE("gradcheck: biases") {
  TensorD x = random_tensor({4, 3}, 5);
  TensorD b = random_tensor({3}, 6);
  double err = max_grad_err({&x, &b}, [&](CtxD& ctx) {
    return weighted_sum(ctx, sedkit::add_row_bias(ctx, x, b));
  });
  CHECK(err < 1e-3);

  TensorD xc = random_tensor({2, 3, 4}, 7);
  TensorD bc = random_tensor({2}, 8);
  double err2 = max_grad_err({&xc, &bc}, [&](CtxD& ctx) {
    TensorD y = sedkit::add_channel_bias(ctx, xc, bc);
    return weighted_sum(ctx, sedkit::reshape(ctx, y, {6, 4}));
  });
  CHECK(err2 < 1e-3);
}

TEST_CASE("gradcheck: activations") {
  // Keep ReLU inputs away from the kink at zero.
  TensorD x({2, 4}, {0.8, -0.6, 1.3, -1.1, 0.4, -0.9, 2.0, -0.3});
  for (Activation act :
       {Activation::kSigmoid, Activation::kTanh, Activation::kSwish,
        Activation::kRelu, Activation::kGlu, Activation::kSoftmaxLastDim}) {
    TensorD in = x.detach_copy();
    double err = max_grad_err({&in}, [&](CtxD& ctx) {
      return weighted_sum(ctx, sedkit::activation(ctx, in, act));
    });
    CHECK(err < 1e-3);
  }
}

TEST_CASE("gradcheck: layer_norm") {
  TensorD x = random_tensor({3, 5}, 9);
  TensorD gamma = random_tensor({5}, 10, 0.5, 1.5);
  TensorD beta = random_tensor({5}, 11);
  double err = max_grad_err({&x, &gamma, &beta}, [&](CtxD& ctx) {
    return weighted_sum(ctx, sedkit::layer_norm(ctx, x, gamma, beta));
  });
  CHECK(err < 1e-3);
}

TEST_CASE("gradcheck: conv2d with stride and padding") {
  TensorD x = random_tensor({2, 5, 4}, 12);
  TensorD k = random_tensor({3, 2, 3, 3}, 13);
  double err = max_grad_err({&x, &k}, [&](CtxD& ctx) {
    TensorD y = sedkit::convolution(ctx, x, k, ConvMode::kConv2d, 2, 1);
    return weighted_sum(ctx, sedkit::reshape(ctx, y, {3, 3 * 2}));
  });
  CHECK(err < 1e-3);
}

TEST_CASE("gradcheck: depthwise and pointwise conv") {
  TensorD x = random_tensor({6, 3}, 14);
  TensorD k = random_tensor({3, 3}, 15);
  double err = max_grad_err({&x, &k}, [&](CtxD& ctx) {
    return weighted_sum(ctx,
                        sedkit::convolution(ctx, x, k,
                                            ConvMode::kDepthwise1d, 1, 1));
  });
  CHECK(err < 1e-3);

  TensorD xp = random_tensor({5, 3}, 16);
  TensorD kp = random_tensor({3, 2}, 17);
  double err2 = max_grad_err({&xp, &kp}, [&](CtxD& ctx) {
    return weighted_sum(ctx,
                        sedkit::convolution(ctx, xp, kp,
                                            ConvMode::kPointwise1d, 1, 0));
  });
  CHECK(err2 < 1e-3);
}

TEST_CASE("gradcheck: dropout under a fixed mask") {
  TensorD x = random_tensor({4, 6}, 18);
  double err = max_grad_err({&x}, [&](CtxD& ctx) {
    return weighted_sum(ctx, sedkit::dropout(ctx, x, 0.3));
  });
  CHECK(err < 1e-3);
}

TEST_CASE("gradcheck: shape movement") {
  TensorD x = random_tensor({3, 4}, 19);
  TensorD y = random_tensor({3, 2}, 20);
  double err = max_grad_err({&x, &y}, [&](CtxD& ctx) {
    TensorD t = sedkit::transpose2d(ctx, x);          // [4,3]
    TensorD s = sedkit::slice_rows(ctx, t, 1, 4);     // [3,3]
    TensorD c = sedkit::slice_cols(ctx, s, 0, 2);     // [3,2]
    TensorD cat = sedkit::concat_cols(ctx, {c, y});   // [3,4]
    TensorD st = sedkit::stack_rows(ctx, {cat, cat});  // [6,4]
    TensorD r = sedkit::reshape(ctx, st, {4, 6});
    return weighted_sum(ctx, r);
  });
  CHECK(err < 1e-3);
}

TEST_CASE("gradcheck: chw_to_frames and reductions") {
  TensorD x = random_tensor({2, 3, 4}, 21);
  double err = max_grad_err({&x}, [&](CtxD& ctx) {
    TensorD fr = sedkit::chw_to_frames(ctx, x);  // [3,8]
    TensorD mr = sedkit::mean_rows(ctx, fr);     // [1,8]
    return weighted_sum(ctx, mr);
  });
  CHECK(err < 1e-3);

  TensorD z = random_tensor({3, 3}, 22);
  double err2 = max_grad_err({&z}, [&](CtxD& ctx) {
    TensorD m = sedkit::mean_all(ctx, sedkit::mul(ctx, z, z));
    TensorD s = sedkit::sum_all(ctx, z);
    return sedkit::add(ctx, m, sedkit::scale(ctx, s, 0.25));
  });
  CHECK(err2 < 1e-3);
}

// ---------------------------------------------------------------------------
// Optimizer.

TEST_CASE("adam first step moves a parameter by roughly the learning rate") {
  sedkit::ParamStoreT<double> store;
  TensorD& p = store.add("w", TensorD({1}, {1.0}));
  p.ensure_grad();
  p.grad()[0] = 0.5;

  sedkit::AdamConfig cfg;
  cfg.lr = 0.1;
  sedkit::AdamT<double> opt(cfg);
  opt.step(store);
  CHECK(opt.steps() == 1);
  CHECK(p.values()[0] == doctest::Approx(0.9000000019999999).epsilon(1e-12));

  opt.step(store);
  CHECK(opt.steps() == 2);
}

TEST_CASE("adam with zero learning rate leaves parameters untouched") {
  sedkit::ParamStoreT<double> store;
  TensorD& p = store.add("w", TensorD({3}, {1.0, -2.0, 3.0}));
  p.ensure_grad();
  p.grad()[0] = 0.7;
  p.grad()[1] = -0.1;
  p.grad()[2] = 4.0;

  sedkit::AdamConfig cfg;
  cfg.lr = 0.0;
  sedkit::AdamT<double> opt(cfg);
  opt.step(store);
  CHECK(p.values()[0] == 1.0);
  CHECK(p.values()[1] == -2.0);
  CHECK(p.values()[2] == 3.0);
}

TEST_CASE("adam config validation and store contracts") {
  sedkit::AdamConfig bad;
  bad.lr = -1.0;
  CHECK_THROWS_AS((void)sedkit::AdamT<double>(bad), sedkit::ConfigError);
  sedkit::AdamConfig bad2;
  bad2.beta1 = 1.0;
  CHECK_THROWS_AS((void)sedkit::AdamT<double>(bad2), sedkit::ConfigError);

  sedkit::ParamStoreT<double> store;
  store.add("w", TensorD({1}, {0.0}));
  CHECK_THROWS_AS(store.add("w", TensorD({1}, {1.0})), sedkit::ContractError);
  CHECK_THROWS_AS(store.get("missing"), sedkit::ContractError);
  CHECK(store.contains("w"));
  CHECK(store.total_elements() == 1);
}

TEST_CASE("adam restore resumes moment state bitwise") {
  auto run = [](int pre_steps, int post_steps, bool snapshot_restore) {
    sedkit::ParamStoreT<double> store;
    TensorD& p = store.add("w", TensorD({2}, {0.3, -0.8}));
    sedkit::AdamConfig cfg;
    cfg.lr = 0.05;
    sedkit::AdamT<double> opt(cfg);
    auto grads = [&](int step) {
      p.ensure_grad();
      p.grad()[0] = 0.1 * (step + 1);
      p.grad()[1] = -0.2 * (step + 1);
    };
    int step = 0;
    for (int i = 0; i < pre_steps; ++i, ++step) {
      grads(step);
      opt.step(store);
      store.zero_grad_all();
    }
    if (snapshot_restore) {
      auto m = opt.first_moments();
      auto v = opt.second_moments();
      auto t = opt.steps();
      sedkit::AdamT<double> fresh(cfg);
      fresh.restore(t, std::move(m), std::move(v));
      for (int i = 0; i < post_steps; ++i, ++step) {
        grads(step);
        fresh.step(store);
        store.zero_grad_all();
      }
    } else {
      for (int i = 0; i < post_steps; ++i, ++step) {
        grads(step);
        opt.step(store);
        store.zero_grad_all();
      }
    }
    return std::vector<double>(p.values().begin(), p.values().end());
  };
  auto straight = run(3, 2, false);
  auto resumed = run(3, 2, true);
  CHECK(straight[0] == resumed[0]);
  CHECK(straight[1] == resumed[1]);
}
