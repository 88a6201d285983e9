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

#include "msnet/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "msnet/error.hpp"

namespace msnet::checkpoint {
namespace {

using numkit::Tensor;

struct Out {
  std::ostream& os;
  template <typename T>
  void le(T v) {
    char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    }
    os.write(buf, sizeof(T));
  }
  void f64(double d) { le(std::bit_cast<std::uint64_t>(d)); }
  void str(std::string_view s) {
    le(static_cast<std::uint16_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void tensor(std::string_view name, const Tensor& t) {
    str(name);
    le(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.shape()) le(static_cast<std::uint32_t>(d));
    for (double v : t.values()) f64(v);
  }
};

struct In {
  std::istream& is;
  std::uint64_t offset = 0;

  void bytes(char* p, std::size_t n, const char* what) {
    is.read(p, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n) {
      throw FormatError(std::string("checkpoint: truncated ") + what, offset);
    }
    offset += n;
  }
  template <typename T>
  T le(const char* what) {
    unsigned char buf[sizeof(T)];
    bytes(reinterpret_cast<char*>(buf), sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(le<std::uint64_t>(what)); }
  std::string str(const char* what) {
    std::string s(le<std::uint16_t>(what), '\0');
    bytes(s.data(), s.size(), what);
    return s;
  }
  Tensor tensor(std::string_view expected_name) {
    const std::uint64_t at = offset;
    const std::string name = str("tensor name");
    if (name != expected_name) {
      throw FormatError("checkpoint: expected tensor '" + std::string(expected_name) +
                            "', found '" + name + "'",
                        at);
    }
    const auto rank = le<std::uint8_t>("tensor rank");
    numkit::Shape shape(rank);
    for (auto& d : shape) d = le<std::uint32_t>("tensor dims");
    std::vector<double> values(numkit::shape_size(shape));
    const std::uint64_t values_at = offset;
    for (double& v : values) v = f64("tensor values");
    try {
      return Tensor(std::move(shape), std::move(values));
    } catch (const NumericError& e) {
      throw FormatError("checkpoint: tensor '" + name + "': " + e.what(), values_at);
    }
  }
};

}  // namespace

void save(std::ostream& os, const model::Msnet& net) {
  const auto& cfg = net.config();
  const auto& p = net.params();
  Out out{os};
  os.write(kMagic, 4);
  out.le(kVersion);
  out.le(static_cast<std::uint32_t>(cfg.layers));
  out.le(static_cast<std::uint32_t>(cfg.s_dim));
  out.le(static_cast<std::uint32_t>(cfg.hidden));
  out.le(static_cast<std::uint8_t>(cfg.span == model::SpanMethod::kAttention));
  out.le(static_cast<std::uint8_t>(cfg.per_layer_sim));
  out.str(kClassOrder);
  out.str(kLayerConvention);
  for (double d : {cfg.dropout_sim, cfg.dropout_score, cfg.dropout_attn,
                   cfg.bn_momentum, cfg.bn_eps}) {
    out.f64(d);
  }
  out.le(static_cast<std::uint64_t>(cfg.seed));
  const std::size_t groups = p.w_sim.size();
  out.le(static_cast<std::uint32_t>(2 * groups + 8));
  for (std::size_t g = 0; g < groups; ++g) {
    out.tensor("w_sim." + std::to_string(g), p.w_sim[g].value);
  }
  for (std::size_t g = 0; g < groups; ++g) {
    out.tensor("b_sim." + std::to_string(g), p.b_sim[g].value);
  }
  out.tensor("w_dist", p.w_dist.value);
  out.tensor("b_dist", p.b_dist.value);
  out.tensor("w_score", p.w_score.value);
  out.tensor("b_score", p.b_score.value);
  out.tensor("bn.gamma", p.bn.gamma.value);
  out.tensor("bn.beta", p.bn.beta.value);
  out.tensor("bn.running_mean", p.bn.running_mean);
  out.tensor("bn.running_var", p.bn.running_var);
  if (!os) throw IoError("checkpoint: write failed");
}

void save_file(const std::filesystem::path& path, const model::Msnet& net) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  save(out, net);
}

model::Msnet load(std::istream& is) {
  In in{is};
  char magic[4];
  in.bytes(magic, 4, "magic");
  if (!std::equal(magic, magic + 4, kMagic)) throw FormatError("checkpoint: bad magic", 0);
  const auto version = in.le<std::uint16_t>("version");
  if (version != kVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version), 4);
  }
  model::MsnetConfig cfg;
  cfg.layers = in.le<std::uint32_t>("layers");
  cfg.s_dim = in.le<std::uint32_t>("s_dim");
  cfg.hidden = in.le<std::uint32_t>("hidden");
  const std::uint64_t span_at = in.offset;
  const auto span = in.le<std::uint8_t>("span method");
  if (span > 1) throw FormatError("checkpoint: unknown span method", span_at);
  cfg.span = span ? model::SpanMethod::kAttention : model::SpanMethod::kMeanpool;
  cfg.per_layer_sim = in.le<std::uint8_t>("per-layer flag") != 0;
  const std::uint64_t order_at = in.offset;
  if (in.str("class order") != kClassOrder) {
    throw FormatError("checkpoint: unsupported class order", order_at);
  }
  const std::uint64_t conv_at = in.offset;
  if (in.str("layer convention") != kLayerConvention) {
    throw FormatError("checkpoint: unsupported layer convention", conv_at);
  }
  cfg.dropout_sim = in.f64("dropout");
  cfg.dropout_score = in.f64("dropout");
  cfg.dropout_attn = in.f64("dropout");
  cfg.bn_momentum = in.f64("bn momentum");
  cfg.bn_eps = in.f64("bn eps");
  cfg.seed = in.le<std::uint64_t>("seed");
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what(), span_at);
  }

  const std::size_t groups = cfg.per_layer_sim ? cfg.layers : 1;
  const std::uint64_t count_at = in.offset;
  if (in.le<std::uint32_t>("tensor count") != 2 * groups + 8) {
    throw FormatError("checkpoint: unexpected tensor count", count_at);
  }
  model::MsnetParams p;
  for (std::size_t g = 0; g < groups; ++g) {
    p.w_sim.emplace_back(in.tensor("w_sim." + std::to_string(g)));
  }
  for (std::size_t g = 0; g < groups; ++g) {
    p.b_sim.emplace_back(in.tensor("b_sim." + std::to_string(g)));
  }
  p.w_dist = numkit::Parameter(in.tensor("w_dist"));
  p.b_dist = numkit::Parameter(in.tensor("b_dist"));
  p.w_score = numkit::Parameter(in.tensor("w_score"));
  p.b_score = numkit::Parameter(in.tensor("b_score"));
  p.bn = numkit::BatchNormState(cfg.score_features(), cfg.bn_momentum, cfg.bn_eps);
  p.bn.gamma = numkit::Parameter(in.tensor("bn.gamma"));
  p.bn.beta = numkit::Parameter(in.tensor("bn.beta"));
  p.bn.running_mean = in.tensor("bn.running_mean");
  const std::uint64_t var_at = in.offset;
  p.bn.running_var = in.tensor("bn.running_var");
  for (double v : p.bn.running_var.values()) {
    if (v < 0.0) throw FormatError("checkpoint: negative running variance", var_at);
  }
  try {
    return model::Msnet(cfg, std::move(p));
  } catch (const DimensionError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what(), count_at);
  }
}

model::Msnet load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return load(in);
}

void check_compatible(const model::MsnetConfig& cfg, std::size_t hidden,
                      std::size_t layers_available) {
  if (cfg.hidden != hidden) {
    throw ConfigError("checkpoint expects hidden size " + std::to_string(cfg.hidden) +
                      ", embeddings have " + std::to_string(hidden));
  }
  if (cfg.layers > layers_available) {
    throw ConfigError("checkpoint uses " + std::to_string(cfg.layers) +
                      " layers, embeddings provide " + std::to_string(layers_available));
  }
}

}  // namespace msnet::checkpoint
