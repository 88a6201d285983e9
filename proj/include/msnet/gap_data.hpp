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

#ifndef MSNET_GAP_DATA_HPP_
#define MSNET_GAP_DATA_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace msnet::gap {

// Candidate antecedents; the integer value is the class index everywhere.
enum class Label : int { kA = 0, kB = 1, kNeither = 2 };

inline constexpr int kNumClasses = 3;
inline constexpr std::array<std::string_view, kNumClasses> kLabelNames = {
    "A", "B", "NEITHER"};

inline int class_index(Label l) { return static_cast<int>(l); }

// One row of a GAP TSV file. Offsets count Unicode scalar values.
struct GapRecord {
  std::string id;
  std::string text;
  std::string pronoun;
  std::size_t pronoun_offset = 0;
  std::string a_text;
  std::size_t a_offset = 0;
  bool a_coref = false;
  std::string b_text;
  std::size_t b_offset = 0;
  bool b_coref = false;
  std::string url;

  friend bool operator==(const GapRecord&, const GapRecord&) = default;
};

inline constexpr std::array<std::string_view, 11> kColumns = {
    "ID", "Text", "Pronoun", "Pronoun-offset", "A", "A-offset",
    "A-coref", "B", "B-offset", "B-coref", "URL"};

enum class InvalidRows { kReject, kSkip };

struct ParseResult {
  std::vector<GapRecord> records;
  // One message per skipped row (only populated with InvalidRows::kSkip).
  std::vector<std::string> skipped;
};

// Parses a GAP TSV with a header naming the 11 columns (any order). With
// kReject the first invalid row throws RecordError carrying its line number
// and id; with kSkip it is reported in ParseResult::skipped instead.
ParseResult parse_tsv(std::istream& in, InvalidRows policy = InvalidRows::kReject);
ParseResult read_tsv(const std::filesystem::path& path,
                     InvalidRows policy = InvalidRows::kReject);

// Canonical column order, TRUE/FALSE booleans.
void write_tsv(std::ostream& out, std::span<const GapRecord> records);

// Throws RecordError if any field invariant is violated.
void validate(const GapRecord& r, std::size_t row = 0);

Label derive_label(const GapRecord& r);

struct FoldAssignment {
  int k = 0;
  std::vector<int> fold;  // parallel to the records passed to kfold_split
  std::unordered_map<std::string, int> by_id;

  int fold_of(const std::string& id) const { return by_id.at(id); }
  std::vector<std::size_t> members(int f) const;
  std::vector<std::size_t> complement(int f) const;
};

// Label-stratified k-fold: each class is shuffled with a seeded generator and
// the concatenation A, B, NEITHER is dealt round-robin. Fold sizes differ by at
// most one overall and per class.
FoldAssignment kfold_split(std::span<const GapRecord> records, int k,
                           std::uint64_t seed);

}  // namespace msnet::gap

#endif  // MSNET_GAP_DATA_HPP_
