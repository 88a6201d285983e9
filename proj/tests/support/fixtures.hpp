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

#ifndef MSNET_TESTS_SUPPORT_FIXTURES_HPP_
#define MSNET_TESTS_SUPPORT_FIXTURES_HPP_

#include <algorithm>
#include <string>
#include <vector>

#include "msnet/embed_store.hpp"
#include "msnet/model.hpp"
#include "msnet/numkit/rng.hpp"
#include "msnet/tokenizer.hpp"

namespace msnet::testing {

// A document with random float states and random, possibly overlapping,
// mention positions inside [1, tokens - 1).
struct ToyDoc {
  embed::EmbeddingSet set;
  std::size_t p = 0;
  tok::TokenRange a, b;
  int label = 0;

  model::ExampleInput input(std::size_t layers) const {
    return model::gather(set, p, a, b, layers, label);
  }
};

inline tok::TokenRange random_span(numkit::Rng& rng, std::size_t tokens,
                                   std::size_t max_len) {
  const std::size_t len = 1 + rng.below(std::min(max_len, tokens - 2));
  const std::size_t begin = 1 + rng.below(tokens - 1 - len);
  return {begin, begin + len};
}

inline ToyDoc random_doc(numkit::Rng& rng, const std::string& id, std::uint16_t layers,
                         std::uint32_t hidden, std::size_t max_tokens = 24,
                         std::size_t max_span = 5) {
  ToyDoc d;
  const auto tokens = static_cast<std::uint32_t>(4 + rng.below(max_tokens - 3));
  d.set = {id, layers, tokens, hidden, {}};
  d.set.values.resize(std::size_t{layers} * tokens * hidden);
  for (float& v : d.set.values) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  d.p = 1 + rng.below(tokens - 2);
  d.a = random_span(rng, tokens, max_span);
  d.b = random_span(rng, tokens, max_span);
  d.label = static_cast<int>(rng.below(3));
  return d;
}

inline std::vector<ToyDoc> random_docs(numkit::Rng& rng, std::size_t n, std::uint16_t layers,
                                       std::uint32_t hidden, std::size_t max_tokens = 24,
                                       std::size_t max_span = 5) {
  std::vector<ToyDoc> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(random_doc(rng, "doc-" + std::to_string(i), layers, hidden, max_tokens,
                             max_span));
  }
  return out;
}

// Randomizes every parameter and the batchnorm running statistics so that no
// term of the forward pass is trivially zero or one.
inline void randomize(model::MsnetParams& p, numkit::Rng& rng, double scale = 0.5) {
  for (numkit::Parameter* q : p.all()) {
    for (double& v : q->value.data()) v = rng.uniform(-scale, scale);
  }
  for (double& v : p.bn.gamma.value.data()) v = rng.uniform(0.5, 1.5);
  for (double& v : p.bn.running_mean.data()) v = rng.uniform(-0.3, 0.3);
  for (double& v : p.bn.running_var.data()) v = rng.uniform(0.2, 2.0);
  p.w_dist.value[0] = rng.uniform(-0.2, 0.2);
}

}  // namespace msnet::testing

#endif  // MSNET_TESTS_SUPPORT_FIXTURES_HPP_
