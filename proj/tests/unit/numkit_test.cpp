/* Copyright 2026 The MSnet Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "msnet/error.hpp"
#include "msnet/numkit/ops.hpp"
#include "msnet/numkit/rng.hpp"
#include "msnet/numkit/tensor.hpp"
#include "oracle/finite_diff.hpp"

namespace msnet::numkit {
namespace {

TEST(TensorTest, RejectsNonFiniteData) {
  EXPECT_THROW(Tensor({2}, {1.0, NAN}), NumericError);
  EXPECT_THROW(Tensor({2}, {1.0, INFINITY}), NumericError);
  EXPECT_THROW(Tensor({3}, {1.0, 2.0}), DimensionError);
}

TEST(AffineTest, IdentityWeights) {
  Parameter w(Tensor::matrix({{1, 0}, {0, 1}}));
  Parameter b(Tensor::vector({0, 0}));
  const Tensor y = affine(Tensor::matrix({{1, 2}}), w, b);
  EXPECT_EQ(y, Tensor::matrix({{1, 2}}));
}

TEST(AffineTest, HandMultiply) {
  Parameter w(Tensor::matrix({{2, 3}, {4, 5}}));
  Parameter b(Tensor::vector({1, 1}));
  const Tensor y = affine(Tensor::matrix({{1, 1}}), w, b);
  EXPECT_EQ(y, Tensor::matrix({{7, 9}}));
}

TEST(AffineTest, ShapeMismatch) {
  Parameter w(Tensor::matrix({{2, 3}, {4, 5}}));
  Parameter b(Tensor::vector({1, 1}));
  EXPECT_THROW(affine(Tensor::matrix({{1, 1, 1}}), w, b), DimensionError);
}

TEST(AffineTest, BackwardOfSumLossMatchesFiniteDifferences) {
  const Tensor x = Tensor::matrix({{1, 1}});
  Parameter w(Tensor::matrix({{2, 3}, {4, 5}}));
  Parameter b(Tensor::vector({1, 1}));
  const Tensor y = affine(x, w, b);
  const Tensor dx = affine_backward(x, w, b, Tensor(y.shape(), 1.0));

  auto sum_loss_w = [&](const std::vector<double>& wv) {
    Parameter wp(Tensor({2, 2}, wv));
    const Tensor out = affine(x, wp, b);
    return std::accumulate(out.values().begin(), out.values().end(), 0.0);
  };
  const auto fd = oracle::central_diff(sum_loss_w, w.value.values(), 1e-6);
  for (std::size_t i = 0; i < fd.size(); ++i) EXPECT_NEAR(fd[i], 1.0, 1e-8);
  EXPECT_EQ(w.grad, Tensor::matrix({{1, 1}, {1, 1}}));
  EXPECT_EQ(b.grad, Tensor::vector({1, 1}));
  // dL/dx = row sums of W.
  EXPECT_EQ(dx, Tensor::matrix({{5, 9}}));
}

TEST(TanhTest, Values) {
  const Tensor y = tanh_forward(Tensor::vector({0.0, 20.0, 0.5}));
  EXPECT_EQ(y[0], 0.0);
  EXPECT_GT(y[1], 0.999);
  EXPECT_LE(y[1], 1.0);
  EXPECT_NEAR(y[2], 0.46211715726000974, 1e-15);

  const Tensor g = tanh_backward(y, Tensor({3}, 1.0));
  EXPECT_NEAR(g[1], 0.0, 1e-15);
  EXPECT_TRUE(std::isfinite(g[1]));
  auto f = [](const std::vector<double>& v) { return std::tanh(v[0]); };
  const double fd = oracle::central_diff(f, {0.5})[0];
  EXPECT_NEAR(fd, 0.7864477329659274, 1e-9);
  EXPECT_NEAR(g[2], fd, 1e-9);
}

TEST(SoftmaxTest, Examples) {
  const std::vector<double> zeros{0, 0, 0};
  for (double p : softmax(zeros)) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
  const std::vector<double> large{1000, 1000, 1000};
  for (double p : softmax(large)) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
  const std::vector<double> one_hot{1, 0, 0};
  const auto p = softmax(one_hot);
  const double e = std::exp(1.0);
  EXPECT_NEAR(p[0], e / (e + 2.0), 1e-15);
  EXPECT_NEAR(p[0], 0.576117, 1e-6);
  EXPECT_NEAR(p[1], 0.211942, 1e-6);
  EXPECT_NEAR(p[2], 0.211942, 1e-6);
}

TEST(SoftmaxTest, RejectsNonFinite) {
  const std::vector<double> bad{0, NAN, 1};
  EXPECT_THROW(softmax(bad), NumericError);
}

TEST(SoftmaxTest, PropertySumsToOneAndShiftInvariant) {
  Rng rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> s(3);
    for (double& v : s) v = rng.uniform(-50.0, 50.0);
    const auto p = softmax(s);
    const double total = p[0] + p[1] + p[2];
    ASSERT_NEAR(total, 1.0, 1e-12);
    for (double v : p) ASSERT_GT(v, 0.0);
    const double shift = rng.uniform(-100.0, 100.0);
    std::vector<double> shifted = s;
    for (double& v : shifted) v += shift;
    const auto q = softmax(shifted);
    for (int i = 0; i < 3; ++i) ASSERT_NEAR(p[i], q[i], 1e-12);
  }
}

TEST(SoftmaxXentTest, UniformScoresGiveLn3) {
  const XentResult r = softmax_xent(Tensor({1, 3}, 0.0), std::vector<int>{0});
  EXPECT_NEAR(r.loss, std::log(3.0), 1e-15);
  EXPECT_NEAR(r.loss, 1.098612, 1e-6);
}

TEST(SoftmaxXentTest, ConfidentCorrectGivesZero) {
  const XentResult r = softmax_xent(Tensor::matrix({{60, 0, 0}}), std::vector<int>{0});
  EXPECT_NEAR(r.loss, 0.0, 1e-12);
}

TEST(SoftmaxXentTest, LabelOutOfRange) {
  EXPECT_THROW(softmax_xent(Tensor({1, 3}), std::vector<int>{3}), ValidationError);
  EXPECT_THROW(softmax_xent(Tensor({1, 3}), std::vector<int>{-1}), ValidationError);
}

TEST(SoftmaxXentTest, GradientMatchesFiniteDifferences) {
  Rng rng(11);
  std::vector<double> scores(4 * 3);
  for (double& v : scores) v = rng.uniform(-3, 3);
  const std::vector<int> labels{0, 2, 1, 2};
  const XentResult r = softmax_xent(Tensor({4, 3}, scores), labels);
  auto f = [&](const std::vector<double>& s) {
    return softmax_xent(Tensor({4, 3}, s), labels).loss;
  };
  const auto fd = oracle::central_diff(f, scores, 1e-6);
  EXPECT_LT(oracle::max_rel_error(r.grad.values(), fd), 1e-6);
}

TEST(DropoutTest, RateZeroAndEvalAreIdentity) {
  Rng rng(1);
  const Tensor x({5}, {1, 2, 3, 4, 5});
  EXPECT_EQ(dropout(x, 0.0, rng, true, nullptr), x);
  EXPECT_EQ(dropout(x, 0.6, rng, false, nullptr), x);
}

TEST(DropoutTest, RejectsRateOne) {
  Rng rng(1);
  EXPECT_THROW(dropout(Tensor({2}), 1.0, rng, true, nullptr), ConfigError);
}

TEST(DropoutTest, ExpectationPreservedAtRate06) {
  Rng rng(2024);
  const std::size_t n = 100000;
  DropoutMask mask;
  const Tensor y = dropout(Tensor({n}, 1.0), 0.6, rng, true, &mask);
  const double mean =
      std::accumulate(y.values().begin(), y.values().end(), 0.0) / n;
  EXPECT_NEAR(mean, 1.0, 0.02);
  // 3 sigma: each survivor is 1/(1-p) with prob 1-p, so var = p/(1-p).
  const double sigma = std::sqrt(0.6 / 0.4 / n);
  EXPECT_NEAR(mean, 1.0, 3 * sigma);
  const Tensor g = dropout_backward(Tensor({n}, 1.0), mask);
  EXPECT_EQ(g, y);
}

TEST(BatchNormTest, StandardizedInputPassesThrough) {
  // Columns with zero mean and unit (biased) variance.
  const Tensor x = Tensor::matrix({{1, -1}, {-1, 1}, {1, 1}, {-1, -1}});
  BatchNormState state(2);
  const Tensor y = batchnorm(x, state, true, nullptr);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(y[i], x[i] / std::sqrt(1.0 + 1e-5), 1e-12);
  }
  BatchNormState tight(2, 0.1, 1e-10);
  const Tensor y2 = batchnorm(x, tight, true, nullptr);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y2[i], x[i], 1e-6);
}

TEST(BatchNormTest, ConstantColumnGivesBeta) {
  BatchNormState state(1);
  state.beta.value[0] = 0.25;
  const Tensor y =
      batchnorm(Tensor::matrix({{3}, {3}, {3}}), state, true, nullptr);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(y[i], 0.25, 1e-12);
}

TEST(BatchNormTest, SingleRowTrainingRejected) {
  BatchNormState state(2);
  EXPECT_THROW(batchnorm(Tensor({1, 2}), state, true, nullptr), ValidationError);
  EXPECT_NO_THROW(batchnorm(Tensor({1, 2}), state, false, nullptr));
}

TEST(BatchNormTest, RunningStatsUseMomentum) {
  BatchNormState state(1);
  batchnorm(Tensor::matrix({{1}, {3}}), state, true, nullptr);
  EXPECT_NEAR(state.running_mean[0], 0.1 * 2.0, 1e-15);
  // unbiased var of {1,3} is 2
  EXPECT_NEAR(state.running_var[0], 0.9 * 1.0 + 0.1 * 2.0, 1e-15);
}

TEST(BatchNormTest, BackwardMatchesFiniteDifferences) {
  Rng rng(5);
  const std::size_t batch = 5, f = 3;
  std::vector<double> xv(batch * f), wv(batch * f);
  for (double& v : xv) v = rng.uniform(-2, 2);
  for (double& v : wv) v = rng.uniform(-1, 1);
  BatchNormState state(f);
  for (std::size_t j = 0; j < f; ++j) {
    state.gamma.value[j] = rng.uniform(0.5, 1.5);
    state.beta.value[j] = rng.uniform(-0.5, 0.5);
  }
  auto loss_of = [&](const std::vector<double>& x, BatchNormState& s) {
    const Tensor y = batchnorm(Tensor({batch, f}, x), s, true, nullptr);
    double l = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) l += wv[i] * y[i] * y[i] * 0.5 + wv[i] * y[i];
    return l;
  };
  BatchNormCache cache;
  const Tensor y = batchnorm(Tensor({batch, f}, xv), state, true, &cache);
  Tensor dy(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) dy[i] = wv[i] * y[i] + wv[i];
  state.gamma.zero_grad();
  state.beta.zero_grad();
  const Tensor dx = batchnorm_backward(cache, state, dy);

  auto fx = [&](const std::vector<double>& x) {
    BatchNormState s = state;
    return loss_of(x, s);
  };
  EXPECT_LT(oracle::max_rel_error(dx.values(), oracle::central_diff(fx, xv, 1e-6)), 1e-4);

  auto fg = [&](const std::vector<double>& g) {
    BatchNormState s = state;
    s.gamma.value = Tensor({f}, g);
    return loss_of(xv, s);
  };
  EXPECT_LT(oracle::max_rel_error(state.gamma.grad.values(),
                                  oracle::central_diff(fg, state.gamma.value.values(), 1e-6)),
            1e-4);
  auto fb = [&](const std::vector<double>& b) {
    BatchNormState s = state;
    s.beta.value = Tensor({f}, b);
    return loss_of(xv, s);
  };
  EXPECT_LT(oracle::max_rel_error(state.beta.grad.values(),
                                  oracle::central_diff(fb, state.beta.value.values(), 1e-6)),
            1e-4);
}

TEST(AdamTest, ZeroGradientZeroDecayIsNoOp) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(6);
    for (double& x : v) x = rng.uniform(-5, 5);
    Parameter p(Tensor({6}, v));
    AdamState s(p.value.shape());
    adam_step(p, s, AdamOptions{.lr = rng.uniform(1e-5, 1.0)});
    EXPECT_EQ(p.value.values(), v);
  }
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  Parameter p(Tensor({4}, {1.0, -2.0, 0.5, 3.0}));
  p.grad = Tensor({4}, {0.3, -7.0, 1e-3, -0.02});
  AdamState s(p.value.shape());
  const AdamOptions opts{.lr = 0.01};
  const auto before = p.value.values();
  adam_step(p, s, opts);
  for (std::size_t i = 0; i < 4; ++i) {
    const double sign = p.grad[i] > 0 ? 1.0 : -1.0;
    // m_hat / sqrt(v_hat) = sign(g); eps perturbs the step by lr*eps/|g|.
    EXPECT_NEAR(before[i] - p.value[i], opts.lr * sign, opts.lr * 1e-4);
  }
}

TEST(AdamTest, DecoupledDecayOnly) {
  Parameter p(Tensor({1}, {1.0}));
  AdamState s(p.value.shape());
  adam_step(p, s, AdamOptions{.lr = 0.1, .weight_decay = 0.01});
  EXPECT_NEAR(p.value[0], 0.999, 1e-15);
}

TEST(AdamTest, ShapeMismatch) {
  Parameter p(Tensor({2}));
  AdamState s(Shape{3});
  EXPECT_THROW(adam_step(p, s, AdamOptions{}), DimensionError);
}

TEST(GradCheckTest, Quadratic) {
  Parameter x(Tensor({2}, {1.0, 2.0}));
  Parameter* params[] = {&x};
  auto loss = [&](bool with_grad) {
    double l = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      l += x.value[i] * x.value[i];
      if (with_grad) x.grad[i] += 2.0 * x.value[i];
    }
    return l;
  };
  const GradCheckResult r = grad_check(loss, params);
  EXPECT_LT(r.max_rel_error, 1e-9);
  EXPECT_EQ(x.grad, Tensor::vector({2.0, 4.0}));
}

TEST(GradCheckTest, AffineTanhChain) {
  Rng rng(9);
  auto random = [&](Shape s) {
    Tensor t(std::move(s));
    for (double& v : t.data()) v = rng.uniform(-1, 1);
    return t;
  };
  const Tensor x = random({3, 4});
  Parameter w1(random({4, 5})), b1(random({5})), w2(random({5, 3})), b2(random({3}));
  const std::vector<int> labels{2, 0, 1};
  auto loss = [&](bool with_grad) {
    const Tensor h = tanh_forward(affine(x, w1, b1));
    const Tensor s = affine(h, w2, b2);
    const XentResult r = softmax_xent(s, labels);
    if (with_grad) {
      const Tensor dh = affine_backward(h, w2, b2, r.grad);
      affine_backward(x, w1, b1, tanh_backward(h, dh));
    }
    return r.loss;
  };
  Parameter* params[] = {&w1, &b1, &w2, &b2};
  EXPECT_LT(grad_check(loss, params).max_rel_error, 1e-6);
}

TEST(GradCheckTest, NonDeterministicLossAborts) {
  Parameter x(Tensor({1}, {1.0}));
  Parameter* params[] = {&x};
  int calls = 0;
  auto loss = [&](bool) { return static_cast<double>(++calls); };
  EXPECT_THROW(grad_check(loss, params), NumericError);
}

TEST(RngTest, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  Rng c(42);
  EXPECT_NE(c.split(1).next_u64(), c.split(2).next_u64());
  EXPECT_EQ(c.split(1).next_u64(), Rng(42).split(1).next_u64());
}

TEST(RngTest, KnownSplitMix64Output) {
  // Reference value of SplitMix64 seeded with 0.
  Rng r(0);
  EXPECT_EQ(r.next_u64(), 0xE220A8397B1DCDAFULL);
}

TEST(RngTest, BelowIsInRange) {
  Rng r(5);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[r.below(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

}  // namespace
}  // namespace msnet::numkit
