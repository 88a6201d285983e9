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

#include "msnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "msnet/error.hpp"
#include "msnet/numkit/kernels.hpp"

namespace msnet::model {

using numkit::Parameter;
using numkit::Rng;
using numkit::Tensor;

std::string_view to_string(SpanMethod m) {
  return m == SpanMethod::kAttention ? "attention" : "meanpool";
}

SpanMethod parse_span_method(std::string_view s) {
  if (s == "meanpool") return SpanMethod::kMeanpool;
  if (s == "attention") return SpanMethod::kAttention;
  throw ConfigError("span method must be meanpool or attention, got '" +
                    std::string(s) + "'");
}

void MsnetConfig::validate() const {
  if (layers < 1) throw ConfigError("layers must be at least 1");
  if (s_dim < 1) throw ConfigError("similarity dimension must be at least 1");
  if (hidden < 1) throw ConfigError("hidden size must be at least 1");
  for (double r : {dropout_sim, dropout_score, dropout_attn}) {
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("dropout rates must be in [0, 1)");
  }
  if (!(bn_momentum > 0.0 && bn_momentum < 1.0)) {
    throw ConfigError("batchnorm momentum must be in (0, 1)");
  }
  if (!(bn_eps > 0.0)) throw ConfigError("batchnorm eps must be positive");
}

namespace {

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t({fan_in, fan_out});
  for (double& v : t.data()) v = rng.uniform(-limit, limit);
  return t;
}

}  // namespace

MsnetParams MsnetParams::init(const MsnetConfig& cfg, Rng& rng) {
  cfg.validate();
  MsnetParams p;
  const std::size_t groups = cfg.per_layer_sim ? cfg.layers : 1;
  for (std::size_t g = 0; g < groups; ++g) {
    p.w_sim.emplace_back(glorot(cfg.sim_input(), cfg.s_dim, rng));
    p.b_sim.emplace_back(Tensor({cfg.s_dim}));
  }
  p.w_dist = Parameter(Tensor({1}, 0.01));
  p.b_dist = Parameter(Tensor({1}, 0.0));
  p.w_score = Parameter(glorot(cfg.score_features(), 3, rng));
  p.b_score = Parameter(Tensor({3}));
  p.bn = numkit::BatchNormState(cfg.score_features(), cfg.bn_momentum, cfg.bn_eps);
  return p;
}

std::vector<Parameter*> MsnetParams::all() {
  std::vector<Parameter*> out;
  for (auto& w : w_sim) out.push_back(&w);
  for (auto& b : b_sim) out.push_back(&b);
  out.insert(out.end(), {&w_dist, &b_dist, &w_score, &b_score, &bn.gamma, &bn.beta});
  return out;
}

void MsnetParams::zero_grad() {
  for (Parameter* p : all()) p->zero_grad();
}

ExampleInput gather(const embed::EmbeddingSet& set, std::size_t p_index,
                    tok::TokenRange a_span, tok::TokenRange b_span,
                    std::size_t layers, int label) {
  if (layers > set.layers) {
    throw ConfigError("document " + set.doc_id + " has " +
                      std::to_string(set.layers) + " layers, model needs " +
                      std::to_string(layers));
  }
  if (a_span.size() == 0 || b_span.size() == 0) {
    throw ValidationError("document " + set.doc_id + ": empty entity span");
  }
  if (p_index >= set.tokens || a_span.end > set.tokens || b_span.end > set.tokens) {
    throw ValidationError("document " + set.doc_id +
                          ": token index beyond the embedded sequence");
  }
  ExampleInput ex;
  ex.id = set.doc_id;
  ex.p_start = p_index;
  ex.a_span = a_span;
  ex.b_span = b_span;
  ex.layers = layers;
  ex.hidden = set.hidden;
  ex.label = label;
  ex.vectors.reserve(layers * ex.rows_per_layer() * set.hidden);
  auto append = [&](std::size_t l, std::size_t t) {
    const auto v = set.vec(l, t);
    ex.vectors.insert(ex.vectors.end(), v.begin(), v.end());
  };
  for (std::size_t l = 0; l < layers; ++l) {
    append(l, p_index);
    for (std::size_t t = a_span.begin; t < a_span.end; ++t) append(l, t);
    for (std::size_t t = b_span.begin; t < b_span.end; ++t) append(l, t);
  }
  return ex;
}

ExampleInput gather(const embed::EmbeddingSet& set, const tok::TokenizedDoc& doc,
                    std::size_t layers, int label) {
  if (set.tokens != doc.tokens.size()) {
    throw ValidationError("document " + doc.id + ": embeddings cover " +
                          std::to_string(set.tokens) + " tokens, tokenizer produced " +
                          std::to_string(doc.tokens.size()));
  }
  return gather(set, doc.p_index, doc.a_span, doc.b_span, layers, label);
}

std::vector<double> span_mean(std::span<const double> tokens, std::size_t n,
                              std::size_t hidden) {
  if (n == 0) throw ValidationError("span_mean: empty span");
  if (tokens.size() != n * hidden) throw DimensionError("span_mean: size mismatch");
  std::vector<double> out(hidden, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < hidden; ++k) out[k] += tokens[i * hidden + k];
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= inv;
  return out;
}

AttnResult span_attn(std::span<const double> tokens, std::size_t n,
                     std::span<const double> pronoun,
                     std::span<const double> mask) {
  const std::size_t hidden = pronoun.size();
  if (n == 0) throw ValidationError("span_attn: empty span");
  if (tokens.size() != n * hidden || (!mask.empty() && mask.size() != tokens.size())) {
    throw DimensionError("span_attn: size mismatch");
  }
  AttnResult r;
  r.tokens.assign(tokens.begin(), tokens.end());
  if (!mask.empty()) {
    for (std::size_t i = 0; i < r.tokens.size(); ++i) r.tokens[i] *= mask[i];
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::vector<double> scores(n);
  r.norms.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* t = r.tokens.data() + i * hidden;
    double sq = 0.0, dot = 0.0;
    for (std::size_t k = 0; k < hidden; ++k) {
      sq += t[k] * t[k];
      dot += t[k] * pronoun[k];
    }
    r.norms[i] = std::max(std::sqrt(sq), kNormFloor);
    scores[i] = scale * dot / r.norms[i];
  }
  r.weights = numkit::softmax(scores);
  r.out.assign(hidden, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* t = r.tokens.data() + i * hidden;
    for (std::size_t k = 0; k < hidden; ++k) r.out[k] += r.weights[i] * t[k];
  }
  return r;
}

void span_attn_backward(const AttnResult& r, std::span<const double> pronoun,
                        std::span<const double> mask,
                        std::span<const double> dout, std::span<double> dtokens,
                        std::span<double> dpronoun) {
  const std::size_t hidden = pronoun.size();
  const std::size_t n = r.weights.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::vector<double> g(n);
  double g_bar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* t = r.tokens.data() + i * hidden;
    double dot = 0.0;
    for (std::size_t k = 0; k < hidden; ++k) dot += dout[k] * t[k];
    g[i] = dot;
    g_bar += r.weights[i] * dot;
  }
  std::vector<double> dt(hidden);
  for (std::size_t i = 0; i < n; ++i) {
    const double* t = r.tokens.data() + i * hidden;
    const double ds = r.weights[i] * (g[i] - g_bar);
    const double inv_norm = 1.0 / r.norms[i];
    // The floor makes the norm constant, so only the unfloored case has the
    // projection term.
    const bool floored = r.norms[i] <= kNormFloor;
    double t_dot_p = 0.0;
    for (std::size_t k = 0; k < hidden; ++k) t_dot_p += t[k] * pronoun[k];
    const double proj = floored ? 0.0 : t_dot_p * inv_norm * inv_norm * inv_norm;
    for (std::size_t k = 0; k < hidden; ++k) {
      dpronoun[k] += scale * ds * t[k] * inv_norm;
      dt[k] = r.weights[i] * dout[k] +
              scale * ds * (pronoun[k] * inv_norm - proj * t[k]);
    }
    double* dti = dtokens.data() + i * hidden;
    for (std::size_t k = 0; k < hidden; ++k) {
      dti[k] += mask.empty() ? dt[k] : dt[k] * mask[i * hidden + k];
    }
  }
}

std::vector<double> similarity_input(std::span<const double> p,
                                     std::span<const double> a,
                                     std::span<const double> b) {
  const std::size_t h = p.size();
  if (a.size() != h || b.size() != h) {
    throw DimensionError("similarity_input: vectors of different lengths");
  }
  std::vector<double> u(5 * h);
  for (std::size_t k = 0; k < h; ++k) {
    u[k] = p[k];
    u[h + k] = a[k];
    u[2 * h + k] = b[k];
    u[3 * h + k] = a[k] * p[k];
    u[4 * h + k] = b[k] * p[k];
  }
  return u;
}

std::array<double, 2> distance_enc(std::size_t start_a, std::size_t start_b,
                                   std::size_t start_p, double w_dist,
                                   double b_dist) {
  const double da = static_cast<double>(start_a) - static_cast<double>(start_p);
  const double db = static_cast<double>(start_b) - static_cast<double>(start_p);
  return {std::tanh(w_dist * da + b_dist), std::tanh(w_dist * db + b_dist)};
}

Msnet::Msnet(MsnetConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  Rng rng = Rng(cfg_.seed).split(1);
  params_ = MsnetParams::init(cfg_, rng);
}

Msnet::Msnet(MsnetConfig cfg, MsnetParams params)
    : cfg_(cfg), params_(std::move(params)) {
  cfg_.validate();
  const std::size_t groups = cfg_.per_layer_sim ? cfg_.layers : 1;
  if (params_.w_sim.size() != groups || params_.b_sim.size() != groups) {
    throw DimensionError("similarity weights do not match the configuration");
  }
  for (std::size_t g = 0; g < groups; ++g) {
    numkit::expect_shape(params_.w_sim[g].value, {cfg_.sim_input(), cfg_.s_dim}, "W_sim");
    numkit::expect_shape(params_.b_sim[g].value, {cfg_.s_dim}, "b_sim");
  }
  numkit::expect_shape(params_.w_dist.value, {1}, "w_dist");
  numkit::expect_shape(params_.b_dist.value, {1}, "b_dist");
  numkit::expect_shape(params_.w_score.value, {cfg_.score_features(), 3}, "W_score");
  numkit::expect_shape(params_.b_score.value, {3}, "b_score");
  if (params_.bn.features() != cfg_.score_features()) {
    throw DimensionError("batchnorm width does not match the configuration");
  }
}

ForwardCache Msnet::forward(std::span<const ExampleInput* const> batch, Mode mode,
                            Rng* rng) {
  const std::size_t B = batch.size();
  const std::size_t L = cfg_.layers, H = cfg_.hidden, S = cfg_.s_dim;
  const std::size_t F = cfg_.score_features();
  if (B == 0) throw ValidationError("forward: empty batch");
  for (const ExampleInput* ex : batch) {
    if (ex->hidden != H) {
      throw ConfigError("example " + ex->id + " has hidden size " +
                        std::to_string(ex->hidden) + ", model expects " +
                        std::to_string(H));
    }
    if (ex->layers < L) {
      throw ConfigError("example " + ex->id + " carries " +
                        std::to_string(ex->layers) + " layers, model needs " +
                        std::to_string(L));
    }
  }
  const bool training = mode == Mode::kTrain;
  const bool attention = cfg_.span == SpanMethod::kAttention;
  const bool any_dropout =
      training && (cfg_.dropout_sim > 0 || cfg_.dropout_score > 0 ||
                   (attention && cfg_.dropout_attn > 0));
  if (any_dropout && rng == nullptr) {
    throw ValidationError("forward: training with dropout needs an rng");
  }

  ForwardCache c;
  c.mode = mode;
  c.batch = B;
  c.inputs.assign(batch.begin(), batch.end());
  const std::size_t rows = L * B;
  c.a_pooled.resize(rows);
  c.b_pooled.resize(rows);
  if (attention) {
    c.a_attn.resize(rows);
    c.b_attn.resize(rows);
    c.a_mask.resize(rows);
    c.b_mask.resize(rows);
    // Masks are drawn serially, in row order, so the parallel pooling below
    // stays deterministic.
    if (training && cfg_.dropout_attn > 0) {
      for (std::size_t r = 0; r < rows; ++r) {
        const ExampleInput& ex = *batch[r % B];
        c.a_mask[r] =
            numkit::make_dropout_mask(ex.a_span.size() * H, cfg_.dropout_attn, *rng).scale;
        c.b_mask[r] =
            numkit::make_dropout_mask(ex.b_span.size() * H, cfg_.dropout_attn, *rng).scale;
      }
    }
  }

  c.sim_in = Tensor({rows, 5 * H});
  const auto n_rows = static_cast<std::int64_t>(rows);
  const bool parallel = numkit::kernels::parallel_enabled() &&
                        rows * 5 * H >= numkit::kernels::kParallelWorkThreshold;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::int64_t ri = 0; ri < n_rows; ++ri) {
    const auto r = static_cast<std::size_t>(ri);
    const std::size_t l = r / B;
    const ExampleInput& ex = *batch[r % B];
    const auto p = ex.pronoun(l);
    if (attention) {
      c.a_attn[r] = span_attn(ex.a_tokens(l), ex.a_span.size(), p, c.a_mask[r]);
      c.b_attn[r] = span_attn(ex.b_tokens(l), ex.b_span.size(), p, c.b_mask[r]);
      c.a_pooled[r] = c.a_attn[r].out;
      c.b_pooled[r] = c.b_attn[r].out;
    } else {
      c.a_pooled[r] = span_mean(ex.a_tokens(l), ex.a_span.size(), H);
      c.b_pooled[r] = span_mean(ex.b_tokens(l), ex.b_span.size(), H);
    }
    const auto u = similarity_input(p, c.a_pooled[r], c.b_pooled[r]);
    std::copy(u.begin(), u.end(), c.sim_in.row(r).begin());
  }

  if (training && cfg_.dropout_sim > 0) {
    c.sim_mask = numkit::make_dropout_mask(c.sim_in.size(), cfg_.dropout_sim, *rng);
  }
  c.sim_in_dropped = numkit::apply_mask(c.sim_in, c.sim_mask);

  c.sim = Tensor({rows, S});
  if (cfg_.per_layer_sim) {
    for (std::size_t l = 0; l < L; ++l) {
      numkit::kernels::affine(
          c.sim_in_dropped.data().subspan(l * B * 5 * H, B * 5 * H),
          params_.w_sim[l].value.data(), params_.b_sim[l].value.data(),
          c.sim.data().subspan(l * B * S, B * S), B, 5 * H, S);
    }
  } else {
    numkit::kernels::affine(c.sim_in_dropped.data(), params_.w_sim[0].value.data(),
                            params_.b_sim[0].value.data(), c.sim.data(), rows,
                            5 * H, S);
  }

  c.dist_delta = Tensor({B, 2});
  c.dist = Tensor({B, 2});
  const double w_dist = params_.w_dist.value[0], b_dist = params_.b_dist.value[0];
  for (std::size_t e = 0; e < B; ++e) {
    const ExampleInput& ex = *batch[e];
    c.dist_delta.at(e, 0) =
        static_cast<double>(ex.a_span.begin) - static_cast<double>(ex.p_start);
    c.dist_delta.at(e, 1) =
        static_cast<double>(ex.b_span.begin) - static_cast<double>(ex.p_start);
    const auto d = distance_enc(ex.a_span.begin, ex.b_span.begin, ex.p_start,
                                w_dist, b_dist);
    c.dist.at(e, 0) = d[0];
    c.dist.at(e, 1) = d[1];
  }

  c.z = Tensor({B, F});
  for (std::size_t e = 0; e < B; ++e) {
    auto zr = c.z.row(e);
    for (std::size_t l = 0; l < L; ++l) {
      const auto s = c.sim.row(l * B + e);
      std::copy(s.begin(), s.end(), zr.begin() + l * S);
    }
    zr[L * S] = c.dist.at(e, 0);
    zr[L * S + 1] = c.dist.at(e, 1);
  }

  c.z_norm = numkit::batchnorm(c.z, params_.bn, training, &c.bn);
  if (training && cfg_.dropout_score > 0) {
    c.z_mask = numkit::make_dropout_mask(c.z_norm.size(), cfg_.dropout_score, *rng);
  }
  c.h = numkit::apply_mask(c.z_norm, c.z_mask);
  c.scores = numkit::affine(c.h, params_.w_score, params_.b_score);
  c.probs = numkit::softmax_rows(c.scores);
  return c;
}

double Msnet::backward(const ForwardCache& cache, std::span<const int> labels,
                       InputGrads* input_grads) {
  const numkit::XentResult x = numkit::softmax_xent(cache.scores, labels);
  backward_scores(cache, x.grad, input_grads);
  return x.loss;
}

void Msnet::backward_scores(const ForwardCache& c, const Tensor& dscores,
                            InputGrads* input_grads) {
  if (c.mode != Mode::kTrain) {
    throw ValidationError("backward: cache comes from an eval-mode forward");
  }
  const std::size_t B = c.batch;
  const std::size_t L = cfg_.layers, H = cfg_.hidden, S = cfg_.s_dim;
  numkit::expect_shape(dscores, {B, 3}, "backward: dscores");

  const Tensor dh = numkit::affine_backward(c.h, params_.w_score, params_.b_score, dscores);
  const Tensor dz_norm = numkit::dropout_backward(dh, c.z_mask);
  const Tensor dz = numkit::batchnorm_backward(c.bn, params_.bn, dz_norm);

  Tensor dsim({L * B, S});
  for (std::size_t e = 0; e < B; ++e) {
    const auto dzr = dz.row(e);
    for (std::size_t l = 0; l < L; ++l) {
      std::copy(dzr.begin() + l * S, dzr.begin() + (l + 1) * S,
                dsim.row(l * B + e).begin());
    }
    for (int j = 0; j < 2; ++j) {
      const double d = c.dist.at(e, j);
      const double dpre = dzr[L * S + j] * (1.0 - d * d);
      params_.w_dist.grad[0] += dpre * c.dist_delta.at(e, j);
      params_.b_dist.grad[0] += dpre;
    }
  }

  const std::size_t rows = L * B;
  for (std::size_t r = 0; r < rows; ++r) {
    auto& bias_grad = params_.b_sim[sim_group(r / B)].grad;
    const auto d = dsim.row(r);
    for (std::size_t j = 0; j < S; ++j) bias_grad[j] += d[j];
  }
  if (cfg_.per_layer_sim) {
    for (std::size_t l = 0; l < L; ++l) {
      numkit::kernels::accumulate_xt_dy(
          c.sim_in_dropped.data().subspan(l * B * 5 * H, B * 5 * H),
          dsim.data().subspan(l * B * S, B * S), params_.w_sim[l].grad.data(), B,
          5 * H, S);
    }
  } else {
    numkit::kernels::accumulate_xt_dy(c.sim_in_dropped.data(), dsim.data(),
                                      params_.w_sim[0].grad.data(), rows, 5 * H, S);
  }
  if (input_grads == nullptr) return;

  Tensor dsim_in({rows, 5 * H});
  if (cfg_.per_layer_sim) {
    for (std::size_t l = 0; l < L; ++l) {
      numkit::kernels::dy_wt(dsim.data().subspan(l * B * S, B * S),
                             params_.w_sim[l].value.data(),
                             dsim_in.data().subspan(l * B * 5 * H, B * 5 * H), B,
                             5 * H, S);
    }
  } else {
    numkit::kernels::dy_wt(dsim.data(), params_.w_sim[0].value.data(),
                           dsim_in.data(), rows, 5 * H, S);
  }
  dsim_in = numkit::dropout_backward(dsim_in, c.sim_mask);

  input_grads->assign(B, {});
  for (std::size_t e = 0; e < B; ++e) {
    (*input_grads)[e].assign(c.inputs[e]->vectors.size(), 0.0);
  }
  const bool attention = cfg_.span == SpanMethod::kAttention;
  const auto n_rows = static_cast<std::int64_t>(rows);
  const bool parallel = numkit::kernels::parallel_enabled() &&
                        rows * 5 * H >= numkit::kernels::kParallelWorkThreshold;
  // Each (layer, example) row writes a disjoint slice of its example's grads.
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::int64_t ri = 0; ri < n_rows; ++ri) {
    const auto r = static_cast<std::size_t>(ri);
    const std::size_t l = r / B, e = r % B;
    const ExampleInput& ex = *c.inputs[e];
    const auto p = ex.pronoun(l);
    const auto& a = c.a_pooled[r];
    const auto& b = c.b_pooled[r];
    const auto du = dsim_in.row(r);
    std::vector<double>& g = (*input_grads)[e];
    const std::size_t base = l * ex.rows_per_layer() * H;
    std::span<double> dp(g.data() + base, H);
    std::span<double> da_tokens(g.data() + base + H, ex.a_span.size() * H);
    std::span<double> db_tokens(g.data() + base + (1 + ex.a_span.size()) * H,
                                ex.b_span.size() * H);
    std::vector<double> da(H), db(H);
    for (std::size_t k = 0; k < H; ++k) {
      dp[k] += du[k] + du[3 * H + k] * a[k] + du[4 * H + k] * b[k];
      da[k] = du[H + k] + du[3 * H + k] * p[k];
      db[k] = du[2 * H + k] + du[4 * H + k] * p[k];
    }
    if (attention) {
      span_attn_backward(c.a_attn[r], p, c.a_mask[r], da, da_tokens, dp);
      span_attn_backward(c.b_attn[r], p, c.b_mask[r], db, db_tokens, dp);
    } else {
      const double inv_a = 1.0 / static_cast<double>(ex.a_span.size());
      const double inv_b = 1.0 / static_cast<double>(ex.b_span.size());
      for (std::size_t i = 0; i < ex.a_span.size(); ++i) {
        for (std::size_t k = 0; k < H; ++k) da_tokens[i * H + k] += da[k] * inv_a;
      }
      for (std::size_t i = 0; i < ex.b_span.size(); ++i) {
        for (std::size_t k = 0; k < H; ++k) db_tokens[i * H + k] += db[k] * inv_b;
      }
    }
  }
}

Tensor Msnet::predict(std::span<const ExampleInput> inputs, std::size_t batch_size) {
  Tensor probs({inputs.size(), 3});
  std::vector<const ExampleInput*> batch;
  for (std::size_t start = 0; start < inputs.size(); start += batch_size) {
    const std::size_t end = std::min(inputs.size(), start + batch_size);
    batch.clear();
    for (std::size_t i = start; i < end; ++i) batch.push_back(&inputs[i]);
    const ForwardCache c = forward(batch, Mode::kEval);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      std::copy(c.probs.row(i).begin(), c.probs.row(i).end(),
                probs.row(start + i).begin());
    }
  }
  return probs;
}

}  // namespace msnet::model
