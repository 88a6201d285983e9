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

#ifndef MSNET_NUMKIT_OPS_HPP_
#define MSNET_NUMKIT_OPS_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "msnet/numkit/rng.hpp"
#include "msnet/numkit/tensor.hpp"

// Forward and backward passes for the primitives the mention-score head is
// built from. Backward functions take the upstream gradient, accumulate into
// Parameter::grad where parameters are involved, and return the gradient with
// respect to the op's input.
namespace msnet::numkit {

// out[i,j] = sum_k x[i,k] * w[k,j] + b[j]
Tensor affine(const Tensor& x, const Parameter& w, const Parameter& b);
Tensor affine_backward(const Tensor& x, Parameter& w, Parameter& b,
                       const Tensor& dout);

Tensor tanh_forward(const Tensor& x);
// Takes the forward *output* y; d/dx tanh = 1 - y^2.
Tensor tanh_backward(const Tensor& y, const Tensor& dout);

// Numerically stable softmax (max subtraction). Throws NumericError on
// non-finite input and ValidationError on empty input.
std::vector<double> softmax(std::span<const double> scores);
// Row-wise softmax of a [batch x k] tensor.
Tensor softmax_rows(const Tensor& scores);

struct XentResult {
  double loss = 0.0;  // mean over the batch of -ln p[label]
  Tensor probs;       // [batch x k]
  Tensor grad;        // d loss / d scores = (p - onehot) / batch
};

XentResult softmax_xent(const Tensor& scores, std::span<const int> labels);

/// Multiplier per element: 0 for dropped, 1/(1-rate) for kept. An empty mask
/// is the identity (eval mode or rate 0).
struct DropoutMask {
  std::vector<double> scale;
  bool identity() const { return scale.empty(); }
};

// Inverted dropout. Draws one uniform per element, in index order, from `rng`.
Tensor dropout(const Tensor& x, double rate, Rng& rng, bool training,
               DropoutMask* mask);
DropoutMask make_dropout_mask(std::size_t n, double rate, Rng& rng);
Tensor apply_mask(const Tensor& x, const DropoutMask& mask);
// The backward of dropout is the same elementwise product.
inline Tensor dropout_backward(const Tensor& dout, const DropoutMask& mask) {
  return apply_mask(dout, mask);
}

struct BatchNormState {
  Parameter gamma;
  Parameter beta;
  Tensor running_mean;
  Tensor running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  BatchNormState() = default;
  BatchNormState(std::size_t features, double momentum = 0.1,
                 double eps = 1e-5);

  std::size_t features() const { return gamma.value.size(); }
};

struct BatchNormCache {
  bool training = false;
  Tensor x_hat;                 // [batch x f]
  std::vector<double> inv_std;  // per feature
};

// Training mode normalizes with the biased batch variance and updates the
// running statistics with the unbiased one; eval mode uses running stats.
Tensor batchnorm(const Tensor& x, BatchNormState& state, bool training,
                 BatchNormCache* cache);
Tensor batchnorm_backward(const BatchNormCache& cache, BatchNormState& state,
                          const Tensor& dout);

struct AdamOptions {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

struct AdamState {
  Tensor m;
  Tensor v;
  long step = 0;

  AdamState() = default;
  explicit AdamState(const Shape& shape) : m(shape), v(shape) {}
};

// Bias-corrected Adam with decoupled weight decay applied before the update.
void adam_step(Parameter& p, AdamState& state, const AdamOptions& opts);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t elements = 0;
};

// `loss(true)` must compute the loss and accumulate gradients into `params`;
// `loss(false)` only computes the loss. Gradients are zeroed before the
// analytic pass. Relative error is |a - n| / max(|a|, |n|, 1e-8) against
// central differences with step `eps`. Throws NumericError when two
// evaluations at the same point disagree.
GradCheckResult grad_check(const std::function<double(bool)>& loss,
                           std::span<Parameter* const> params,
                           double eps = 1e-5);

}  // namespace msnet::numkit

#endif  // MSNET_NUMKIT_OPS_HPP_
