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

#include "msnet/tokenizer.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <fstream>

#include "msnet/error.hpp"
#include "msnet/utf8.hpp"

namespace msnet::tok {
namespace {

bool is_whitespace(char32_t c) {
  if (c == U' ' || c == U'\t' || c == U'\n' || c == U'\r') return true;
  return u_charType(static_cast<UChar32>(c)) == U_SPACE_SEPARATOR;
}

bool is_control(char32_t c) {
  if (c == U'\t' || c == U'\n' || c == U'\r') return false;
  const auto t = u_charType(static_cast<UChar32>(c));
  return t == U_CONTROL_CHAR || t == U_FORMAT_CHAR;
}

bool is_punctuation(char32_t c) {
  // ASCII symbols count as punctuation even where Unicode says otherwise ("$", "^").
  if ((c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
      (c >= 123 && c <= 126)) {
    return true;
  }
  switch (u_charType(static_cast<UChar32>(c))) {
    case U_DASH_PUNCTUATION:
    case U_START_PUNCTUATION:
    case U_END_PUNCTUATION:
    case U_CONNECTOR_PUNCTUATION:
    case U_OTHER_PUNCTUATION:
    case U_INITIAL_PUNCTUATION:
    case U_FINAL_PUNCTUATION:
      return true;
    default:
      return false;
  }
}

bool is_cjk(char32_t c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) ||
         (c >= 0x20000 && c <= 0x2A6DF) || (c >= 0x2A700 && c <= 0x2B73F) ||
         (c >= 0x2B740 && c <= 0x2B81F) || (c >= 0x2B820 && c <= 0x2CEAF) ||
         (c >= 0xF900 && c <= 0xFAFF) || (c >= 0x2F800 && c <= 0x2FA1F);
}

// A normalized character and the index of the original character it came from.
struct SourcedChar {
  char32_t c;
  std::size_t src;
};

// Lowercase + NFD + drop nonspacing marks, one input character at a time so
// every output character can be traced back to its source.
void fold_char(char32_t c, std::size_t src, std::vector<SourcedChar>& out) {
  const auto lower = static_cast<char32_t>(u_tolower(static_cast<UChar32>(c)));
  if (lower < 0x80) {
    out.push_back({lower, src});
    return;
  }
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfd = icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFD normalizer unavailable");
  const icu::UnicodeString decomposed =
      nfd->normalize(icu::UnicodeString(static_cast<UChar32>(lower)), status);
  if (U_FAILURE(status)) throw Error("ICU NFD normalization failed");
  for (int32_t i = 0; i < decomposed.length();) {
    const UChar32 d = decomposed.char32At(i);
    i += U16_LENGTH(d);
    if (u_charType(d) == U_NON_SPACING_MARK) continue;
    out.push_back({static_cast<char32_t>(d), src});
  }
}

using Word = std::vector<SourcedChar>;

// Basic tokenizer: returns words (after punctuation splitting) of normalized
// characters with provenance.
std::vector<Word> basic_words(const std::u32string& text, bool lowercase) {
  std::vector<Word> words;
  Word current;
  auto flush = [&] {
    if (!current.empty()) words.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char32_t c = text[i];
    if (c == 0 || c == 0xFFFD || is_control(c)) continue;
    if (is_whitespace(c)) {
      flush();
      continue;
    }
    if (is_cjk(c)) {
      flush();
      words.push_back(Word{{c, i}});
      continue;
    }
    Word folded;
    if (lowercase) {
      fold_char(c, i, folded);
    } else {
      folded.push_back({c, i});
    }
    for (const SourcedChar& sc : folded) {
      if (is_punctuation(sc.c)) {
        flush();
        words.push_back(Word{sc});
      } else {
        current.push_back(sc);
      }
    }
  }
  flush();
  return words;
}

std::string encode_chars(std::span<const SourcedChar> chars) {
  std::u32string s;
  s.reserve(chars.size());
  for (const auto& sc : chars) s.push_back(sc.c);
  return utf8::encode(s);
}

}  // namespace

Vocab Vocab::from_tokens(std::vector<std::string> tokens,
                         std::optional<bool> lowercase) {
  Vocab v;
  v.tokens_ = std::move(tokens);
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    // Later duplicates keep the first id, as reference WordPiece loaders do.
    v.ids_.emplace(v.tokens_[i], static_cast<int>(i));
  }
  auto special = [&](std::string_view s) {
    const auto id = v.find(s);
    if (!id) throw ValidationError("vocab lacks " + std::string(s));
    return *id;
  };
  v.cls_ = special(kCls);
  v.sep_ = special(kSep);
  v.unk_ = special(kUnk);
  if (lowercase) {
    v.lowercase_ = *lowercase;
  } else {
    bool has_upper = false;
    for (const auto& t : v.tokens_) {
      if (t.size() >= 2 && t.front() == '[' && t.back() == ']') continue;
      for (char32_t c : utf8::decode(t)) {
        if (u_isupper(static_cast<UChar32>(c))) {
          has_upper = true;
          break;
        }
      }
      if (has_upper) break;
    }
    v.lowercase_ = !has_upper;
  }
  return v;
}

Vocab Vocab::load(const std::filesystem::path& path,
                  std::optional<bool> lowercase) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocab " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return from_tokens(std::move(tokens), lowercase);
}

std::optional<int> Vocab::find(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

int Vocab::id(std::string_view token) const {
  const auto found = find(token);
  if (!found) throw ValidationError("token not in vocab: " + std::string(token));
  return *found;
}

std::vector<std::string> segment_word(std::u32string_view word,
                                      const Vocab& vocab) {
  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (start < word.size()) {
    std::size_t end = word.size();
    std::string match;
    while (start < end) {
      std::string piece = utf8::encode(word.substr(start, end - start));
      if (start > 0) piece.insert(0, kContinuation);
      if (vocab.find(piece)) {
        match = std::move(piece);
        break;
      }
      --end;
    }
    if (match.empty()) return {};
    pieces.push_back(std::move(match));
    start = end;
  }
  return pieces;
}

std::vector<Token> wordpiece(std::string_view text, const Vocab& vocab) {
  const std::u32string chars = utf8::decode(text);
  std::vector<Token> out;
  for (const Word& word : basic_words(chars, vocab.lowercase())) {
    const std::size_t word_begin = word.front().src;
    const std::size_t word_end = word.back().src + 1;
    auto unknown = [&] {
      out.push_back({vocab.unk_id(), std::string(kUnk), word_begin, word_end});
    };
    if (word.size() > kMaxCharsPerWord) {
      unknown();
      continue;
    }
    std::u32string normalized;
    normalized.reserve(word.size());
    for (const auto& sc : word) normalized.push_back(sc.c);
    const auto pieces = segment_word(normalized, vocab);
    if (pieces.empty()) {
      unknown();
      continue;
    }
    std::size_t pos = 0;
    for (const std::string& piece : pieces) {
      const std::size_t skip = pos == 0 ? 0 : kContinuation.size();
      const std::size_t len = utf8::length(std::string_view(piece).substr(skip));
      out.push_back({vocab.id(piece), piece, word[pos].src,
                     word[pos + len - 1].src + 1});
      pos += len;
    }
  }
  return out;
}

Alignment align(std::span<const Token> tokens, std::size_t char_offset,
                std::size_t char_length) {
  const std::size_t mention_end = char_offset + char_length;
  std::size_t first = tokens.size(), last = tokens.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].begin == tokens[i].end) continue;
    if (tokens[i].end > char_offset && tokens[i].begin < mention_end) {
      if (first == tokens.size()) first = i;
      last = i;
    }
  }
  if (char_length == 0 || first == tokens.size()) {
    throw AlignmentError("no token covers characters [" +
                         std::to_string(char_offset) + ", " +
                         std::to_string(mention_end) + ")");
  }
  Alignment a;
  a.range = {first, last + 1};
  a.exact = tokens[first].begin == char_offset && tokens[last].end == mention_end;
  return a;
}

Truncation truncate(std::vector<Token> tokens, TokenRange cluster,
                    std::size_t limit) {
  Truncation t;
  const std::size_t n = tokens.size();
  if (n <= limit) {
    t.tokens = std::move(tokens);
    return t;
  }
  if (cluster.size() > limit) {
    throw AlignmentError("mentions span " + std::to_string(cluster.size()) +
                         " tokens, more than the limit of " +
                         std::to_string(limit));
  }
  std::size_t excess = n - limit;
  const std::size_t head_room = cluster.begin;
  const std::size_t tail_room = n - cluster.end;
  if (tail_room >= head_room) {
    t.tail_dropped = std::min(excess, tail_room);
    t.head_dropped = excess - t.tail_dropped;
  } else {
    t.head_dropped = std::min(excess, head_room);
    t.tail_dropped = excess - t.head_dropped;
  }
  t.tokens.assign(std::make_move_iterator(tokens.begin() + t.head_dropped),
                  std::make_move_iterator(tokens.end() - t.tail_dropped));
  return t;
}

std::vector<int> TokenizedDoc::ids() const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.id);
  return out;
}

TokenizedDoc truncate_and_finalize(std::vector<Token> tokens, TokenRange p,
                                   TokenRange a, TokenRange b,
                                   const Vocab& vocab, std::size_t limit) {
  for (const TokenRange* r : {&p, &a, &b}) {
    if (r->begin >= r->end || r->end > tokens.size()) {
      throw AlignmentError("mention token range out of bounds");
    }
  }
  const TokenRange cluster{std::min({p.begin, a.begin, b.begin}),
                           std::max({p.end, a.end, b.end})};
  Truncation t = truncate(std::move(tokens), cluster, limit);
  const std::size_t shift = t.head_dropped;
  auto rebase = [&](TokenRange r) {
    return TokenRange{r.begin - shift + 1, r.end - shift + 1};
  };

  TokenizedDoc doc;
  doc.truncated = t.head_dropped + t.tail_dropped > 0;
  const std::size_t first_char = t.tokens.empty() ? 0 : t.tokens.front().begin;
  const std::size_t last_char = t.tokens.empty() ? 0 : t.tokens.back().end;
  doc.tokens.reserve(t.tokens.size() + 2);
  doc.tokens.push_back({vocab.cls_id(), std::string(kCls), first_char, first_char});
  for (Token& tok : t.tokens) doc.tokens.push_back(std::move(tok));
  doc.tokens.push_back({vocab.sep_id(), std::string(kSep), last_char, last_char});
  doc.p_index = rebase(p).begin;
  doc.a_span = rebase(a);
  doc.b_span = rebase(b);
  return doc;
}

TokenizedDoc tokenize_record(const gap::GapRecord& record, const Vocab& vocab,
                             std::size_t limit) {
  std::vector<Token> tokens = wordpiece(record.text, vocab);
  struct Mention {
    const char* name;
    std::size_t offset;
    const std::string& surface;
  };
  const Mention mentions[] = {{"pronoun", record.pronoun_offset, record.pronoun},
                              {"A", record.a_offset, record.a_text},
                              {"B", record.b_offset, record.b_text}};
  Alignment al[3];
  for (int m = 0; m < 3; ++m) {
    try {
      al[m] = align(tokens, mentions[m].offset, utf8::length(mentions[m].surface));
    } catch (const AlignmentError& e) {
      throw AlignmentError(record.id + ": " + mentions[m].name + ": " + e.what());
    }
  }
  TokenizedDoc doc;
  try {
    doc = truncate_and_finalize(std::move(tokens), al[0].range, al[1].range,
                                al[2].range, vocab, limit);
  } catch (const AlignmentError& e) {
    throw AlignmentError(record.id + ": " + e.what());
  }
  doc.id = record.id;
  doc.p_exact = al[0].exact;
  doc.a_exact = al[1].exact;
  doc.b_exact = al[2].exact;
  for (int m = 0; m < 3; ++m) {
    if (!al[m].exact) {
      doc.diagnostics.push_back(std::string(mentions[m].name) +
                                " mention boundary falls inside a token");
    }
  }
  return doc;
}

std::string decode(std::span<const Token> tokens, TokenRange range) {
  std::string out;
  for (std::size_t i = range.begin; i < range.end; ++i) {
    const Token& t = tokens[i];
    std::string_view piece = t.text;
    if (piece.starts_with(kContinuation)) {
      piece.remove_prefix(kContinuation.size());
    } else if (i > range.begin && tokens[i - 1].end != t.begin) {
      out += ' ';
    }
    out += piece;
  }
  return out;
}

std::string normalize_surface(std::string_view surface, const Vocab& vocab) {
  const std::u32string chars = utf8::decode(surface);
  // Words split off by punctuation were adjacent in the source; only real
  // gaps become a space.
  std::string joined;
  const auto words = basic_words(chars, vocab.lowercase());
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0 && words[i - 1].back().src + 1 != words[i].front().src) {
      joined += ' ';
    }
    joined += encode_chars(words[i]);
  }
  return joined;
}

}  // namespace msnet::tok
