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

#include "msnet/synth.hpp"

#include "msnet/error.hpp"
#include "msnet/numkit/rng.hpp"

namespace msnet::synth {

SynthCorpus make_planted(const SynthOptions& opts) {
  if (opts.first_names < 3) throw ConfigError("synth: need at least 3 first names");
  if (opts.fillers < 1 || opts.surnames < 1) throw ConfigError("synth: empty word lists");
  if (!(opts.neither_share >= 0.0 && opts.neither_share <= 1.0)) {
    throw ConfigError("synth: neither share must be in [0, 1]");
  }
  SynthCorpus c;
  c.vocab = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "."};
  auto words = [&](const char* prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(prefix + std::to_string(i));
      c.vocab.push_back(out.back());
    }
    return out;
  };
  const auto first = words("n", opts.first_names);
  const auto last = words("s", opts.surnames);
  const auto filler = words("w", opts.fillers);

  numkit::Rng rng(opts.seed);
  for (std::size_t i = 0; i < opts.records; ++i) {
    gap::GapRecord r;
    r.id = opts.id_prefix + "-" + std::to_string(i + 1);
    const std::size_t fa = rng.below(first.size());
    std::size_t fb = rng.below(first.size() - 1);
    if (fb >= fa) ++fb;
    auto name = [&](std::size_t f) {
      std::string s = first[f];
      if (rng.bernoulli(0.5)) s += " " + last[rng.below(last.size())];
      return s;
    };
    r.a_text = name(fa);
    r.b_text = name(fb);

    gap::Label label;
    std::size_t fp;
    if (rng.bernoulli(opts.neither_share)) {
      label = gap::Label::kNeither;
      do {
        fp = rng.below(first.size());
      } while (fp == fa || fp == fb);
    } else if (rng.bernoulli(0.5)) {
      label = gap::Label::kA;
      fp = fa;
    } else {
      label = gap::Label::kB;
      fp = fb;
    }
    r.pronoun = first[fp];
    r.a_coref = label == gap::Label::kA;
    r.b_coref = label == gap::Label::kB;

    auto pad = [&](std::size_t lo, std::size_t hi) {
      const std::size_t n = lo + rng.below(hi - lo + 1);
      for (std::size_t k = 0; k < n; ++k) r.text += filler[rng.below(filler.size())] + " ";
    };
    pad(2, 6);
    r.a_offset = r.text.size();
    r.text += r.a_text + " ";
    pad(1, 4);
    r.b_offset = r.text.size();
    r.text += r.b_text + " ";
    pad(1, 6);
    r.pronoun_offset = r.text.size();
    r.text += r.pronoun + " ";
    pad(0, 3);
    r.text += ".";
    r.url = "";
    c.records.push_back(std::move(r));
  }
  return c;
}

}  // namespace msnet::synth
