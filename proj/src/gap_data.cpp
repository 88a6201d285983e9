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

#include "msnet/gap_data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "msnet/error.hpp"
#include "msnet/numkit/rng.hpp"
#include "msnet/utf8.hpp"

namespace msnet::gap {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::size_t parse_offset(std::string_view s, std::string_view column,
                         std::size_t row, const std::string& id) {
  std::size_t value = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
    throw RecordError(row, id,
                      std::string(column) + " is not a non-negative integer: '" +
                          std::string(s) + "'");
  }
  return value;
}

bool parse_bool(std::string_view s, std::string_view column, std::size_t row,
                const std::string& id) {
  std::string upper(s);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "TRUE") return true;
  if (upper == "FALSE") return false;
  throw RecordError(row, id,
                    std::string(column) + " is not TRUE/FALSE: '" +
                        std::string(s) + "'");
}

void check_surface(const std::u32string& text, std::size_t offset,
                   const std::string& surface, std::string_view what,
                   std::size_t row, const std::string& id) {
  std::u32string s;
  try {
    s = utf8::decode(surface);
  } catch (const ValidationError& e) {
    throw RecordError(row, id, std::string(what) + ": " + e.what());
  }
  if (s.empty()) throw RecordError(row, id, std::string(what) + " is empty");
  if (offset + s.size() > text.size() ||
      text.compare(offset, s.size(), s) != 0) {
    throw RecordError(row, id,
                      std::string(what) + " '" + surface +
                          "' does not occur at offset " + std::to_string(offset));
  }
}

}  // namespace

void validate(const GapRecord& r, std::size_t row) {
  if (r.id.empty()) throw RecordError(row, r.id, "empty ID");
  std::u32string text;
  try {
    text = utf8::decode(r.text);
  } catch (const ValidationError& e) {
    throw RecordError(row, r.id, std::string("Text: ") + e.what());
  }
  check_surface(text, r.pronoun_offset, r.pronoun, "Pronoun", row, r.id);
  check_surface(text, r.a_offset, r.a_text, "A", row, r.id);
  check_surface(text, r.b_offset, r.b_text, "B", row, r.id);
  if (r.a_coref && r.b_coref) {
    throw RecordError(row, r.id, "both A-coref and B-coref are TRUE");
  }
}

ParseResult parse_tsv(std::istream& in, InvalidRows policy) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("GAP TSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_tabs(line);
  std::array<std::size_t, kColumns.size()> col{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    const auto it = std::find(header.begin(), header.end(), kColumns[c]);
    if (it == header.end()) {
      throw ValidationError("GAP TSV: header lacks column '" +
                            std::string(kColumns[c]) + "'");
    }
    col[c] = static_cast<std::size_t>(it - header.begin());
  }
  const std::size_t needed = *std::max_element(col.begin(), col.end()) + 1;

  ParseResult result;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    std::string id = f.empty() ? std::string() : std::string(f[col[0]]);
    try {
      if (f.size() < needed) {
        throw RecordError(line_no, id,
                          "expected " + std::to_string(needed) + " columns, got " +
                              std::to_string(f.size()));
      }
      GapRecord r;
      r.id = std::move(id);
      r.text = f[col[1]];
      r.pronoun = f[col[2]];
      r.pronoun_offset = parse_offset(f[col[3]], kColumns[3], line_no, r.id);
      r.a_text = f[col[4]];
      r.a_offset = parse_offset(f[col[5]], kColumns[5], line_no, r.id);
      r.a_coref = parse_bool(f[col[6]], kColumns[6], line_no, r.id);
      r.b_text = f[col[7]];
      r.b_offset = parse_offset(f[col[8]], kColumns[8], line_no, r.id);
      r.b_coref = parse_bool(f[col[9]], kColumns[9], line_no, r.id);
      r.url = f[col[10]];
      validate(r, line_no);
      result.records.push_back(std::move(r));
    } catch (const RecordError& e) {
      if (policy == InvalidRows::kReject) throw;
      result.skipped.emplace_back(e.what());
    }
  }
  return result;
}

ParseResult read_tsv(const std::filesystem::path& path, InvalidRows policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_tsv(in, policy);
}

void write_tsv(std::ostream& out, std::span<const GapRecord> records) {
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    out << (c ? "\t" : "") << kColumns[c];
  }
  out << '\n';
  auto field = [](const std::string& s) -> const std::string& {
    if (s.find_first_of("\t\n\r") != std::string::npos) {
      throw ValidationError("GAP TSV field contains a tab or newline");
    }
    return s;
  };
  auto flag = [](bool b) { return b ? "TRUE" : "FALSE"; };
  for (const GapRecord& r : records) {
    out << field(r.id) << '\t' << field(r.text) << '\t' << field(r.pronoun)
        << '\t' << r.pronoun_offset << '\t' << field(r.a_text) << '\t'
        << r.a_offset << '\t' << flag(r.a_coref) << '\t' << field(r.b_text)
        << '\t' << r.b_offset << '\t' << flag(r.b_coref) << '\t'
        << field(r.url) << '\n';
  }
}

Label derive_label(const GapRecord& r) {
  if (r.a_coref) return Label::kA;
  if (r.b_coref) return Label::kB;
  return Label::kNeither;
}

std::vector<std::size_t> FoldAssignment::members(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] == f) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::complement(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] != f) out.push_back(i);
  }
  return out;
}

FoldAssignment kfold_split(std::span<const GapRecord> records, int k,
                           std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > records.size()) {
    throw ConfigError("k-fold: k must be in [2, " +
                      std::to_string(records.size()) + "], got " +
                      std::to_string(k));
  }
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < records.size(); ++i) {
    by_class[class_index(derive_label(records[i]))].push_back(i);
  }
  numkit::Rng rng(seed);
  FoldAssignment fa;
  fa.k = k;
  fa.fold.assign(records.size(), -1);
  std::size_t dealt = 0;
  for (auto& members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t idx : members) {
      fa.fold[idx] = static_cast<int>(dealt++ % static_cast<std::size_t>(k));
    }
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!fa.by_id.emplace(records[i].id, fa.fold[i]).second) {
      throw ValidationError("k-fold: duplicate record id '" + records[i].id + "'");
    }
  }
  return fa;
}

}  // namespace msnet::gap
