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

#ifndef MSNET_PIPELINE_HPP_
#define MSNET_PIPELINE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "msnet/embed_store.hpp"
#include "msnet/gap_data.hpp"
#include "msnet/model.hpp"
#include "msnet/tokenizer.hpp"

// Glue from GAP records to model inputs.
namespace msnet::pipeline {

// Tokenizes every record. Alignment failures are rethrown as RecordError
// carrying the record's position (1-based) and id.
std::vector<tok::TokenizedDoc> tokenize_all(std::span<const gap::GapRecord> records,
                                            const tok::Vocab& vocab,
                                            std::size_t limit = tok::kDefaultTokenLimit);

std::vector<embed::EmbeddingSet> toy_embed_all(std::span<const tok::TokenizedDoc> docs,
                                               std::uint16_t layers, std::uint32_t hidden,
                                               std::uint64_t seed);

// Gathers the top `layers` states of every document. The embedding set must
// hold exactly the document's token count. Labels come from the records.
std::vector<model::ExampleInput> gather_all(std::span<const gap::GapRecord> records,
                                            std::span<const tok::TokenizedDoc> docs,
                                            const embed::EmbeddingStore& store,
                                            std::size_t layers);

// True when the pronoun token and both entity spans decode back to the
// record's surface strings (after the vocabulary's normalization).
bool surfaces_round_trip(const tok::TokenizedDoc& doc, const gap::GapRecord& record,
                         const tok::Vocab& vocab);

std::vector<int> labels_of(std::span<const gap::GapRecord> records);

}  // namespace msnet::pipeline

#endif  // MSNET_PIPELINE_HPP_
