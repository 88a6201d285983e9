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

#include "msnet/numkit/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "msnet/error.hpp"
#include "msnet/numkit/kernels.hpp"

namespace msnet::numkit {

Tensor affine(const Tensor& x, const Parameter& w, const Parameter& b) {
  if (x.rank() != 2 || w.value.rank() != 2 || b.value.rank() != 1 ||
      x.cols() != w.value.rows() || b.value.size() != w.value.cols()) {
    throw DimensionError("affine: x " + shape_string(x.shape()) + ", W " +
                         shape_string(w.value.shape()) + ", b " +
                         shape_string(b.value.shape()));
  }
  const std::size_t batch = x.rows(), in = x.cols(), out = w.value.cols();
  Tensor y({batch, out});
  kernels::affine(x.data(), w.value.data(), b.value.data(), y.data(), batch,
                  in, out);
  return y;
}

Tensor affine_backward(const Tensor& x, Parameter& w, Parameter& b,
                       const Tensor& dout) {
  const std::size_t batch = x.rows(), in = x.cols(), out = w.value.cols();
  expect_shape(dout, {batch, out}, "affine_backward: dout");
  kernels::accumulate_xt_dy(x.data(), dout.data(), w.grad.data(), batch, in,
                            out);
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t j = 0; j < out; ++j) b.grad[j] += dout.at(i, j);
  }
  Tensor dx({batch, in});
  kernels::dy_wt(dout.data(), w.value.data(), dx.data(), batch, in, out);
  return dx;
}

Tensor tanh_forward(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
  return y;
}

Tensor tanh_backward(const Tensor& y, const Tensor& dout) {
  expect_shape(dout, y.shape(), "tanh_backward: dout");
  Tensor dx(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) {
    dx[i] = dout[i] * (1.0 - y[i] * y[i]);
  }
  return dx;
}

std::vector<double> softmax(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("softmax: empty score vector");
  for (double s : scores) {
    if (!std::isfinite(s)) throw NumericError("softmax: non-finite score");
  }
  const double max = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp(scores[i] - max);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

Tensor softmax_rows(const Tensor& scores) {
  if (scores.rank() != 2) throw DimensionError("softmax_rows: expected rank 2");
  Tensor p(scores.shape());
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    const auto row = softmax(scores.row(i));
    std::copy(row.begin(), row.end(), p.row(i).begin());
  }
  return p;
}

XentResult softmax_xent(const Tensor& scores, std::span<const int> labels) {
  if (scores.rank() != 2 || scores.rows() != labels.size()) {
    throw DimensionError("softmax_xent: " + std::to_string(labels.size()) +
                         " labels for scores " + shape_string(scores.shape()));
  }
  const std::size_t batch = scores.rows(), k = scores.cols();
  for (std::size_t i = 0; i < batch; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) {
      throw ValidationError("softmax_xent: label " + std::to_string(labels[i]) +
                            " out of range at row " + std::to_string(i));
    }
  }
  XentResult r;
  r.probs = softmax_rows(scores);
  r.grad = r.probs;
  const double inv = 1.0 / static_cast<double>(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    // -ln softmax via log-sum-exp keeps the loss exact when p[y] underflows.
    const auto row = scores.row(i);
    const double max = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double s : row) total += std::exp(s - max);
    r.loss += (std::log(total) + max - row[y]);
    r.grad.at(i, y) -= 1.0;
    for (std::size_t j = 0; j < k; ++j) r.grad.at(i, j) *= inv;
  }
  r.loss *= inv;
  return r;
}

DropoutMask make_dropout_mask(std::size_t n, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must be in [0, 1), got " +
                      std::to_string(rate));
  }
  DropoutMask mask;
  if (rate == 0.0) return mask;
  const double keep = 1.0 / (1.0 - rate);
  mask.scale.resize(n);
  for (double& s : mask.scale) s = rng.uniform() < rate ? 0.0 : keep;
  return mask;
}

Tensor apply_mask(const Tensor& x, const DropoutMask& mask) {
  if (mask.identity()) return x;
  if (mask.scale.size() != x.size()) {
    throw DimensionError("dropout mask size mismatch");
  }
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * mask.scale[i];
  return y;
}

Tensor dropout(const Tensor& x, double rate, Rng& rng, bool training,
               DropoutMask* mask) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must be in [0, 1), got " +
                      std::to_string(rate));
  }
  DropoutMask m;
  if (training) m = make_dropout_mask(x.size(), rate, rng);
  Tensor y = apply_mask(x, m);
  if (mask) *mask = std::move(m);
  return y;
}

BatchNormState::BatchNormState(std::size_t features, double momentum_,
                               double eps_)
    : gamma(Tensor({features}, 1.0)),
      beta(Tensor({features}, 0.0)),
      running_mean({features}, 0.0),
      running_var({features}, 1.0),
      momentum(momentum_),
      eps(eps_) {
  if (!(momentum > 0.0 && momentum < 1.0)) {
    throw ConfigError("batchnorm momentum must be in (0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("batchnorm eps must be positive");
}

Tensor batchnorm(const Tensor& x, BatchNormState& state, bool training,
                 BatchNormCache* cache) {
  const std::size_t f = state.features();
  if (x.rank() != 2 || x.cols() != f) {
    throw DimensionError("batchnorm: input " + shape_string(x.shape()) +
                         " for " + std::to_string(f) + " features");
  }
  const std::size_t batch = x.rows();
  if (training && batch < 2) {
    throw ValidationError("batchnorm: training needs a batch of at least 2");
  }
  Tensor x_hat(x.shape());
  std::vector<double> inv_std(f);
  const auto& gamma = state.gamma.value;
  const auto& beta = state.beta.value;
  Tensor y(x.shape());
  for (std::size_t j = 0; j < f; ++j) {
    double mean, var;
    if (training) {
      mean = 0.0;
      for (std::size_t i = 0; i < batch; ++i) mean += x.at(i, j);
      mean /= static_cast<double>(batch);
      var = 0.0;
      for (std::size_t i = 0; i < batch; ++i) {
        const double d = x.at(i, j) - mean;
        var += d * d;
      }
      var /= static_cast<double>(batch);
      const double unbiased =
          var * static_cast<double>(batch) / static_cast<double>(batch - 1);
      state.running_mean[j] = (1.0 - state.momentum) * state.running_mean[j] +
                              state.momentum * mean;
      state.running_var[j] = (1.0 - state.momentum) * state.running_var[j] +
                             state.momentum * unbiased;
    } else {
      mean = state.running_mean[j];
      var = state.running_var[j];
    }
    inv_std[j] = 1.0 / std::sqrt(var + state.eps);
    for (std::size_t i = 0; i < batch; ++i) {
      const double xh = (x.at(i, j) - mean) * inv_std[j];
      x_hat.at(i, j) = xh;
      y.at(i, j) = gamma[j] * xh + beta[j];
    }
  }
  if (cache) {
    cache->training = training;
    cache->x_hat = std::move(x_hat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Tensor batchnorm_backward(const BatchNormCache& cache, BatchNormState& state,
                          const Tensor& dout) {
  expect_shape(dout, cache.x_hat.shape(), "batchnorm_backward: dout");
  const std::size_t batch = dout.rows(), f = dout.cols();
  const auto& gamma = state.gamma.value;
  Tensor dx(dout.shape());
  const double n = static_cast<double>(batch);
  for (std::size_t j = 0; j < f; ++j) {
    double sum_dy = 0.0, sum_dy_xh = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
      sum_dy += dout.at(i, j);
      sum_dy_xh += dout.at(i, j) * cache.x_hat.at(i, j);
    }
    state.beta.grad[j] += sum_dy;
    state.gamma.grad[j] += sum_dy_xh;
    const double scale = gamma[j] * cache.inv_std[j];
    for (std::size_t i = 0; i < batch; ++i) {
      if (cache.training) {
        dx.at(i, j) = scale / n *
                      (n * dout.at(i, j) - sum_dy -
                       cache.x_hat.at(i, j) * sum_dy_xh);
      } else {
        dx.at(i, j) = scale * dout.at(i, j);
      }
    }
  }
  return dx;
}

void adam_step(Parameter& p, AdamState& s, const AdamOptions& o) {
  if (s.m.shape() != p.value.shape() || s.v.shape() != p.value.shape()) {
    throw DimensionError("adam_step: state shape " + shape_string(s.m.shape()) +
                         " for parameter " + shape_string(p.value.shape()));
  }
  s.step += 1;
  const double t = static_cast<double>(s.step);
  const double bc1 = 1.0 - std::pow(o.beta1, t);
  const double bc2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < p.value.size(); ++i) {
    double& w = p.value[i];
    if (o.weight_decay != 0.0) w -= o.lr * o.weight_decay * w;
    const double g = p.grad[i];
    s.m[i] = o.beta1 * s.m[i] + (1.0 - o.beta1) * g;
    s.v[i] = o.beta2 * s.v[i] + (1.0 - o.beta2) * g * g;
    const double m_hat = s.m[i] / bc1;
    const double v_hat = s.v[i] / bc2;
    w -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
  }
}

GradCheckResult grad_check(const std::function<double(bool)>& loss,
                           std::span<Parameter* const> params, double eps) {
  const double base = loss(false);
  const double again = loss(false);
  if (base != again) {
    throw NumericError("grad_check: loss function is not deterministic (" +
                       std::to_string(base) + " vs " + std::to_string(again) +
                       "); disable dropout and fix the batch");
  }
  for (Parameter* p : params) p->zero_grad();
  loss(true);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) analytic.push_back(p->grad);

  GradCheckResult r;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& value = params[pi]->value;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + eps;
      const double up = loss(false);
      value[i] = saved - eps;
      const double down = loss(false);
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[pi][i];
      const double denom =
          std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++r.elements;
      if (rel > r.max_rel_error) {
        r.max_rel_error = rel;
        r.worst_param = pi;
        r.worst_index = i;
        r.analytic = a;
        r.numeric = numeric;
      }
    }
  }
  // Leave the parameters' gradients as the analytic values.
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    params[pi]->grad = analytic[pi];
  }
  return r;
}

}  // namespace msnet::numkit
