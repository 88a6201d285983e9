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

#include "msnet/pipeline.hpp"

#include <string>

#include "msnet/error.hpp"

namespace msnet::pipeline {

std::vector<tok::TokenizedDoc> tokenize_all(std::span<const gap::GapRecord> records,
                                            const tok::Vocab& vocab, std::size_t limit) {
  std::vector<tok::TokenizedDoc> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      out.push_back(tok::tokenize_record(records[i], vocab, limit));
    } catch (const AlignmentError& e) {
      throw RecordError(i + 1, records[i].id, e.what());
    }
  }
  return out;
}

std::vector<embed::EmbeddingSet> toy_embed_all(std::span<const tok::TokenizedDoc> docs,
                                               std::uint16_t layers, std::uint32_t hidden,
                                               std::uint64_t seed) {
  std::vector<embed::EmbeddingSet> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(embed::toy_embed(d, layers, hidden, seed));
  return out;
}

std::vector<model::ExampleInput> gather_all(std::span<const gap::GapRecord> records,
                                            std::span<const tok::TokenizedDoc> docs,
                                            const embed::EmbeddingStore& store,
                                            std::size_t layers) {
  if (records.size() != docs.size()) {
    throw ValidationError("gather_all: records and documents differ in count");
  }
  std::vector<model::ExampleInput> out;
  out.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& set = store.get(docs[i].id);
    if (set.tokens != docs[i].tokens.size()) {
      throw ValidationError("document " + docs[i].id + ": embeddings hold " +
                            std::to_string(set.tokens) + " tokens, tokenizer produced " +
                            std::to_string(docs[i].tokens.size()));
    }
    out.push_back(model::gather(set, docs[i], layers,
                                gap::class_index(gap::derive_label(records[i]))));
  }
  return out;
}

bool surfaces_round_trip(const tok::TokenizedDoc& doc, const gap::GapRecord& record,
                         const tok::Vocab& vocab) {
  const tok::TokenRange p{doc.p_index, doc.p_index + 1};
  return tok::decode(doc.tokens, p) == tok::normalize_surface(record.pronoun, vocab) &&
         tok::decode(doc.tokens, doc.a_span) == tok::normalize_surface(record.a_text, vocab) &&
         tok::decode(doc.tokens, doc.b_span) == tok::normalize_surface(record.b_text, vocab);
}

std::vector<int> labels_of(std::span<const gap::GapRecord> records) {
  std::vector<int> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(gap::class_index(gap::derive_label(r)));
  return out;
}

}  // namespace msnet::pipeline
