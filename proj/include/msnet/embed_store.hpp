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

#ifndef MSNET_EMBED_STORE_HPP_
#define MSNET_EMBED_STORE_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "msnet/tokenizer.hpp"

// Precomputed per-token hidden states and the MSEB file that carries them.
//
// MSEB layout, all integers and floats little-endian:
//
//   "MSEB"  u16 version (=1)
//   then, until end of file, one block per document:
//     u16 id_bytes, id (UTF-8), u16 layers, u32 tokens, u32 hidden,
//     layers * tokens * hidden float32 values indexed [layer][token][dim]
//
// Layer 0 is the top (last) transformer layer; higher indices go deeper.
namespace msnet::embed {

inline constexpr char kMagic[4] = {'M', 'S', 'E', 'B'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 6;

struct EmbeddingSet {
  std::string doc_id;
  std::uint16_t layers = 0;
  std::uint32_t tokens = 0;
  std::uint32_t hidden = 0;
  std::vector<float> values;

  std::span<const float> vec(std::size_t layer, std::size_t token) const {
    return std::span<const float>(values).subspan(
        (layer * tokens + token) * hidden, hidden);
  }
  std::span<float> vec(std::size_t layer, std::size_t token) {
    return std::span<float>(values).subspan((layer * tokens + token) * hidden,
                                            hidden);
  }

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;
};

std::size_t block_bytes(const EmbeddingSet& set);

// Throws ValidationError if the set violates its invariants.
void validate(const EmbeddingSet& set);

void write(std::ostream& out, std::span<const EmbeddingSet> sets);
// Throws FormatError (with byte offset) on bad magic/version, truncation,
// zero dimensions or non-finite values.
std::vector<EmbeddingSet> read(std::istream& in);

void write_file(const std::filesystem::path& path,
                std::span<const EmbeddingSet> sets);
std::vector<EmbeddingSet> read_file(const std::filesystem::path& path);

/// Read-only index of embedding sets by document id.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::vector<EmbeddingSet> sets);

  void add(EmbeddingSet set);
  void load(const std::filesystem::path& path);

  bool contains(const std::string& id) const { return sets_.contains(id); }
  // Throws ValidationError naming the id when absent.
  const EmbeddingSet& get(const std::string& id) const;
  std::size_t size() const { return sets_.size(); }

 private:
  std::map<std::string, EmbeddingSet> sets_;
};

// Deterministic stand-in for transformer states: each value is uniform in
// [-1, 1], keyed by (seed, token id, layer, dim). Equal token ids get equal
// vectors within a layer.
EmbeddingSet toy_embed(const tok::TokenizedDoc& doc, std::uint16_t layers,
                       std::uint32_t hidden, std::uint64_t seed);

}  // namespace msnet::embed

#endif  // MSNET_EMBED_STORE_HPP_
