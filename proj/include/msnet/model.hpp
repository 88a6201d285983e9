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

#ifndef MSNET_MODEL_HPP_
#define MSNET_MODEL_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msnet/embed_store.hpp"
#include "msnet/numkit/ops.hpp"
#include "msnet/numkit/rng.hpp"
#include "msnet/numkit/tensor.hpp"
#include "msnet/tokenizer.hpp"

// The mention-score head: pools entity spans from precomputed hidden states,
// builds one similarity vector per layer from [p, a, b, a*p, b*p], appends
// tanh distance encodings, and scores the candidates A, B and NEITHER.
namespace msnet::model {

enum class SpanMethod { kMeanpool, kAttention };

std::string_view to_string(SpanMethod m);
SpanMethod parse_span_method(std::string_view s);

struct MsnetConfig {
  std::size_t layers = 8;  // top layers used, layer 0 = top
  std::size_t s_dim = 16;
  SpanMethod span = SpanMethod::kMeanpool;
  std::size_t hidden = 1024;
  double dropout_sim = 0.6;    // on the similarity-layer input
  double dropout_score = 0.6;  // on the batch-normalized score-layer input
  double dropout_attn = 0.4;   // on span token vectors inside attention
  bool per_layer_sim = false;  // one similarity FFN per layer instead of shared
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;
  std::uint64_t seed = 0;

  std::size_t sim_input() const { return 5 * hidden; }
  std::size_t score_features() const { return layers * s_dim + 2; }
  // Throws ConfigError.
  void validate() const;
};

struct MsnetParams {
  std::vector<numkit::Parameter> w_sim;  // 1 or `layers` x [5*hidden x s_dim]
  std::vector<numkit::Parameter> b_sim;  // same count, [s_dim]
  numkit::Parameter w_dist;              // [1]
  numkit::Parameter b_dist;              // [1]
  numkit::Parameter w_score;             // [score_features x 3]
  numkit::Parameter b_score;             // [3]
  numkit::BatchNormState bn;             // over score_features

  // Glorot-uniform weights, w_dist = 0.01, zero biases, gamma 1, beta 0.
  static MsnetParams init(const MsnetConfig& cfg, numkit::Rng& rng);

  std::vector<numkit::Parameter*> all();
  void zero_grad();
};

/// The vectors one example contributes, gathered from its embedding set as
/// doubles: for each layer, the pronoun token then the A span tokens then the
/// B span tokens.
struct ExampleInput {
  std::string id;
  std::size_t p_start = 0;
  tok::TokenRange a_span;
  tok::TokenRange b_span;
  std::size_t layers = 0;
  std::size_t hidden = 0;
  std::vector<double> vectors;
  int label = -1;

  std::size_t rows_per_layer() const { return 1 + a_span.size() + b_span.size(); }
  std::span<const double> pronoun(std::size_t l) const {
    return {vectors.data() + l * rows_per_layer() * hidden, hidden};
  }
  std::span<const double> a_tokens(std::size_t l) const {
    return {vectors.data() + (l * rows_per_layer() + 1) * hidden,
            a_span.size() * hidden};
  }
  std::span<const double> b_tokens(std::size_t l) const {
    return {vectors.data() + (l * rows_per_layer() + 1 + a_span.size()) * hidden,
            b_span.size() * hidden};
  }
};

// Copies layers [0, layers) of the pronoun and span tokens out of `set`.
// Throws ConfigError when the set has fewer layers, ValidationError when the
// indices do not fit.
ExampleInput gather(const embed::EmbeddingSet& set, std::size_t p_index,
                    tok::TokenRange a_span, tok::TokenRange b_span,
                    std::size_t layers, int label = -1);
ExampleInput gather(const embed::EmbeddingSet& set, const tok::TokenizedDoc& doc,
                    std::size_t layers, int label = -1);

// --- single-op building blocks -------------------------------------------

// Mean of `n` row vectors of length `hidden`. Throws ValidationError if n == 0.
std::vector<double> span_mean(std::span<const double> tokens, std::size_t n,
                              std::size_t hidden);

struct AttnResult {
  std::vector<double> out;      // [hidden]
  std::vector<double> weights;  // [n], a probability distribution
  std::vector<double> tokens;   // [n x hidden] after dropout
  std::vector<double> norms;    // [n] floored L2 norms of the dropped tokens
};

inline constexpr double kNormFloor = 1e-12;

// score_i = norm(t_i) . p / sqrt(hidden), weights = softmax(scores),
// out = sum_i weights_i t_i where t_i are the token vectors after applying
// `mask` (empty = no dropout) and norm(x) = x / max(|x|, 1e-12).
AttnResult span_attn(std::span<const double> tokens, std::size_t n,
                     std::span<const double> pronoun,
                     std::span<const double> mask = {});
// Accumulates into dtokens ([n x hidden], w.r.t. the undropped tokens) and
// dpronoun ([hidden]).
void span_attn_backward(const AttnResult& r, std::span<const double> pronoun,
                        std::span<const double> mask,
                        std::span<const double> dout, std::span<double> dtokens,
                        std::span<double> dpronoun);

// [p, a, b, a*p, b*p]
std::vector<double> similarity_input(std::span<const double> p,
                                     std::span<const double> a,
                                     std::span<const double> b);

// tanh(w_dist * (start_a - start_p) + b_dist), same for B.
std::array<double, 2> distance_enc(std::size_t start_a, std::size_t start_b,
                                   std::size_t start_p, double w_dist,
                                   double b_dist);

// --- full model ----------------------------------------------------------

enum class Mode { kTrain, kEval };

struct ForwardCache {
  Mode mode = Mode::kEval;
  std::size_t batch = 0;
  std::vector<const ExampleInput*> inputs;
  // Per (layer, example), row index l * batch + e.
  std::vector<std::vector<double>> a_pooled, b_pooled;
  std::vector<AttnResult> a_attn, b_attn;
  std::vector<std::vector<double>> a_mask, b_mask;
  numkit::Tensor sim_in;          // [L*B x 5H] before dropout
  numkit::DropoutMask sim_mask;
  numkit::Tensor sim_in_dropped;  // [L*B x 5H]
  numkit::Tensor sim;             // [L*B x s_dim]
  numkit::Tensor dist_delta;      // [B x 2] start differences
  numkit::Tensor dist;            // [B x 2] tanh outputs
  numkit::Tensor z;               // [B x F]
  numkit::BatchNormCache bn;
  numkit::Tensor z_norm;
  numkit::DropoutMask z_mask;
  numkit::Tensor h;               // [B x F] score-layer input
  numkit::Tensor scores;          // [B x 3]
  numkit::Tensor probs;           // [B x 3]
};

// Per-example gradients laid out like ExampleInput::vectors.
using InputGrads = std::vector<std::vector<double>>;

class Msnet {
 public:
  explicit Msnet(MsnetConfig cfg);
  Msnet(MsnetConfig cfg, MsnetParams params);

  const MsnetConfig& config() const { return cfg_; }
  MsnetParams& params() { return params_; }
  const MsnetParams& params() const { return params_; }

  // Train mode draws dropout masks from `rng` (required when any dropout rate
  // is positive) and uses batch statistics; eval mode is a pure function of
  // the inputs and parameters.
  ForwardCache forward(std::span<const ExampleInput* const> batch, Mode mode,
                       numkit::Rng* rng = nullptr);

  // Cross-entropy of cache.scores against `labels`; accumulates parameter
  // gradients and returns the mean loss. Requires a train-mode cache.
  double backward(const ForwardCache& cache, std::span<const int> labels,
                  InputGrads* input_grads = nullptr);
  // Backpropagates an arbitrary upstream gradient d loss / d scores.
  void backward_scores(const ForwardCache& cache, const numkit::Tensor& dscores,
                       InputGrads* input_grads = nullptr);

  // Eval-mode class probabilities, one row per input.
  numkit::Tensor predict(std::span<const ExampleInput> inputs,
                         std::size_t batch_size = 256);

 private:
  std::size_t sim_group(std::size_t layer) const {
    return cfg_.per_layer_sim ? layer : 0;
  }

  MsnetConfig cfg_;
  MsnetParams params_;
};

}  // namespace msnet::model

#endif  // MSNET_MODEL_HPP_
