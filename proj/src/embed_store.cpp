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

#include "msnet/embed_store.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "msnet/error.hpp"
#include "msnet/numkit/rng.hpp"

namespace msnet::embed {
namespace {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  template <typename T>
  void le(T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf[i] = static_cast<unsigned char>(v >> (8 * i));
    }
    bytes(buf, sizeof(T));
  }
  void f32(float f) { le(std::bit_cast<std::uint32_t>(f)); }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint64_t offset() const { return offset_; }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

  void bytes(void* p, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw FormatError(std::string("MSEB: truncated ") + what,
                        offset_ + static_cast<std::uint64_t>(in_.gcount()));
    }
    offset_ += n;
  }
  template <typename T>
  T le(const char* what) {
    unsigned char buf[sizeof(T)];
    bytes(buf, sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
  }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

}  // namespace

std::size_t block_bytes(const EmbeddingSet& s) {
  return 2 + s.doc_id.size() + 2 + 4 + 4 + 4 * s.values.size();
}

void validate(const EmbeddingSet& s) {
  if (s.doc_id.empty() || s.doc_id.size() > 0xFFFF) {
    throw ValidationError("embedding set id must be 1..65535 bytes");
  }
  if (s.layers == 0 || s.tokens == 0 || s.hidden == 0) {
    throw ValidationError("embedding set " + s.doc_id + " has a zero dimension");
  }
  if (s.values.size() != std::size_t{s.layers} * s.tokens * s.hidden) {
    throw ValidationError("embedding set " + s.doc_id + " holds " +
                          std::to_string(s.values.size()) +
                          " values, shape needs " +
                          std::to_string(std::size_t{s.layers} * s.tokens * s.hidden));
  }
  for (float v : s.values) {
    if (!std::isfinite(v)) {
      throw ValidationError("embedding set " + s.doc_id + " has a non-finite value");
    }
  }
}

void write(std::ostream& out, std::span<const EmbeddingSet> sets) {
  Writer w(out);
  w.bytes(kMagic, 4);
  w.le<std::uint16_t>(kVersion);
  for (const EmbeddingSet& s : sets) {
    validate(s);
    w.le<std::uint16_t>(static_cast<std::uint16_t>(s.doc_id.size()));
    w.bytes(s.doc_id.data(), s.doc_id.size());
    w.le<std::uint16_t>(s.layers);
    w.le<std::uint32_t>(s.tokens);
    w.le<std::uint32_t>(s.hidden);
    for (float v : s.values) w.f32(v);
  }
  if (!out) throw IoError("MSEB: write failed");
}

std::vector<EmbeddingSet> read(std::istream& in) {
  Reader r(in);
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (!std::equal(magic, magic + 4, kMagic)) throw FormatError("MSEB: bad magic", 0);
  const auto version = r.le<std::uint16_t>("version");
  if (version != kVersion) {
    throw FormatError("MSEB: unsupported version " + std::to_string(version), 4);
  }
  std::vector<EmbeddingSet> sets;
  while (!r.at_end()) {
    const std::uint64_t block_start = r.offset();
    EmbeddingSet s;
    const auto id_len = r.le<std::uint16_t>("id length");
    if (id_len == 0) throw FormatError("MSEB: empty document id", block_start);
    s.doc_id.resize(id_len);
    r.bytes(s.doc_id.data(), id_len, "id");
    const std::uint64_t dims_at = r.offset();
    s.layers = r.le<std::uint16_t>("layer count");
    s.tokens = r.le<std::uint32_t>("token count");
    s.hidden = r.le<std::uint32_t>("hidden size");
    if (s.layers == 0 || s.tokens == 0 || s.hidden == 0) {
      throw FormatError("MSEB: zero dimension in block " + s.doc_id, dims_at);
    }
    const std::size_t count = std::size_t{s.layers} * s.tokens * s.hidden;
    s.values.resize(count);
    std::vector<unsigned char> raw(count * 4);
    const std::uint64_t values_at = r.offset();
    r.bytes(raw.data(), raw.size(), "values");
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint32_t u = std::uint32_t{raw[4 * i]} |
                              std::uint32_t{raw[4 * i + 1]} << 8 |
                              std::uint32_t{raw[4 * i + 2]} << 16 |
                              std::uint32_t{raw[4 * i + 3]} << 24;
      const float f = std::bit_cast<float>(u);
      if (!std::isfinite(f)) {
        throw FormatError("MSEB: non-finite value in block " + s.doc_id,
                          values_at + 4 * i);
      }
      s.values[i] = f;
    }
    sets.push_back(std::move(s));
  }
  return sets;
}

void write_file(const std::filesystem::path& path,
                std::span<const EmbeddingSet> sets) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  write(out, sets);
}

std::vector<EmbeddingSet> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read(in);
}

EmbeddingStore::EmbeddingStore(std::vector<EmbeddingSet> sets) {
  for (auto& s : sets) add(std::move(s));
}

void EmbeddingStore::add(EmbeddingSet set) {
  const std::string id = set.doc_id;
  if (!sets_.emplace(id, std::move(set)).second) {
    throw ValidationError("duplicate embeddings for document " + id);
  }
}

void EmbeddingStore::load(const std::filesystem::path& path) {
  for (auto& s : read_file(path)) add(std::move(s));
}

const EmbeddingSet& EmbeddingStore::get(const std::string& id) const {
  const auto it = sets_.find(id);
  if (it == sets_.end()) throw ValidationError("no embeddings for document " + id);
  return it->second;
}

EmbeddingSet toy_embed(const tok::TokenizedDoc& doc, std::uint16_t layers,
                       std::uint32_t hidden, std::uint64_t seed) {
  EmbeddingSet s;
  s.doc_id = doc.id;
  s.layers = layers;
  s.tokens = static_cast<std::uint32_t>(doc.tokens.size());
  s.hidden = hidden;
  s.values.resize(std::size_t{layers} * s.tokens * hidden);
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t i = 0; i < s.tokens; ++i) {
      const auto id = static_cast<std::uint64_t>(doc.tokens[i].id);
      auto v = s.vec(l, i);
      for (std::size_t k = 0; k < hidden; ++k) {
        const double u = numkit::to_unit(numkit::hash_keys({seed, id, l, k}));
        v[k] = static_cast<float>(2.0 * u - 1.0);
      }
    }
  }
  return s;
}

}  // namespace msnet::embed
