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

#ifndef MSNET_TOKENIZER_HPP_
#define MSNET_TOKENIZER_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "msnet/gap_data.hpp"

namespace msnet::tok {

inline constexpr std::string_view kCls = "[CLS]";
inline constexpr std::string_view kSep = "[SEP]";
inline constexpr std::string_view kUnk = "[UNK]";
inline constexpr std::string_view kContinuation = "##";
inline constexpr std::size_t kMaxCharsPerWord = 100;
inline constexpr std::size_t kDefaultTokenLimit = 300;

/// WordPiece vocabulary: one token per line, the line number is the id.
class Vocab {
 public:
  // `lowercase` unset means: lowercase iff no regular token has an uppercase
  // letter (uncased vocabularies are entirely lowercase).
  static Vocab load(const std::filesystem::path& path,
                    std::optional<bool> lowercase = std::nullopt);
  static Vocab from_tokens(std::vector<std::string> tokens,
                           std::optional<bool> lowercase = std::nullopt);

  std::optional<int> find(std::string_view token) const;
  int id(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  bool lowercase() const { return lowercase_; }
  int cls_id() const { return cls_; }
  int sep_id() const { return sep_; }
  int unk_id() const { return unk_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
  bool lowercase_ = false;
  int cls_ = -1, sep_ = -1, unk_ = -1;
};

/// A token with its half-open span of code points in the original text.
/// Special tokens carry an empty span.
struct Token {
  int id = 0;
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

// Greedy longest-match-first segmentation of one basic-tokenized word.
// Returns an empty vector when the word cannot be segmented.
std::vector<std::string> segment_word(std::u32string_view word,
                                      const Vocab& vocab);

// Full BERT-style tokenization: text cleanup, whitespace and punctuation
// splitting, CJK isolation, optional lowercasing and accent stripping, then
// WordPiece. Spans always refer to the original text.
std::vector<Token> wordpiece(std::string_view text, const Vocab& vocab);

struct TokenRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const TokenRange&, const TokenRange&) = default;
};

struct Alignment {
  TokenRange range;
  bool exact = true;  // token spans start and end exactly on the mention
};

// Minimal contiguous range of tokens whose spans cover
// [char_offset, char_offset + char_length). Throws AlignmentError when no
// token intersects the mention.
Alignment align(std::span<const Token> tokens, std::size_t char_offset,
                std::size_t char_length);

struct Truncation {
  std::vector<Token> tokens;
  std::size_t head_dropped = 0;
  std::size_t tail_dropped = 0;
};

// Drops tokens until at most `limit` remain, first from the end farther from
// `cluster`, then from the other end. Mention tokens are never dropped; throws
// AlignmentError when `cluster` alone exceeds `limit`.
Truncation truncate(std::vector<Token> tokens, TokenRange cluster,
                    std::size_t limit);

struct TokenizedDoc {
  std::string id;
  std::vector<Token> tokens;  // [CLS] ... [SEP]
  std::size_t p_index = 0;
  TokenRange a_span;
  TokenRange b_span;
  bool truncated = false;
  bool p_exact = true, a_exact = true, b_exact = true;
  std::vector<std::string> diagnostics;

  bool exact() const { return p_exact && a_exact && b_exact; }
  std::vector<int> ids() const;
};

// Truncates, adds [CLS]/[SEP] and shifts every index into the final sequence.
// The pronoun index is the first token of its range.
TokenizedDoc truncate_and_finalize(std::vector<Token> tokens, TokenRange p,
                                   TokenRange a, TokenRange b,
                                   const Vocab& vocab,
                                   std::size_t limit = kDefaultTokenLimit);

TokenizedDoc tokenize_record(const gap::GapRecord& record, const Vocab& vocab,
                             std::size_t limit = kDefaultTokenLimit);

// Surface text of tokens [range) read back from the token strings: "##"
// pieces are glued to their predecessor, other pieces are separated by a
// space when their spans are not adjacent.
std::string decode(std::span<const Token> tokens, TokenRange range);

// The text a mention looks like after the basic tokenizer's normalization
// (lowercasing and accent stripping when the vocab is uncased), with
// whitespace runs collapsed to a single space.
std::string normalize_surface(std::string_view surface, const Vocab& vocab);

}  // namespace msnet::tok

#endif  // MSNET_TOKENIZER_HPP_
