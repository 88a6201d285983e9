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

#ifndef MSNET_SYNTH_HPP_
#define MSNET_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "msnet/gap_data.hpp"

// Planted GAP-shaped corpus for end-to-end checks without real data. Each
// document names two entities A and B and later repeats a name in the pronoun
// slot: A's first name (label A), B's first name (label B) or an unrelated
// name (NEITHER). Under keyed toy embeddings the pronoun state then equals the
// referent's first-token state, so the label is recoverable from the
// pronoun/entity similarity alone.
namespace msnet::synth {

struct SynthOptions {
  std::size_t records = 1000;
  std::size_t first_names = 120;
  std::size_t surnames = 40;
  std::size_t fillers = 60;
  double neither_share = 0.2;
  std::uint64_t seed = 0;
  std::string id_prefix = "synth";
};

struct SynthCorpus {
  std::vector<std::string> vocab;  // one token per line, line number = id
  std::vector<gap::GapRecord> records;
};

// Throws ConfigError for fewer than 3 first names or an out-of-range share.
SynthCorpus make_planted(const SynthOptions& opts);

}  // namespace msnet::synth

#endif  // MSNET_SYNTH_HPP_
