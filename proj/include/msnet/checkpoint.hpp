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

#ifndef MSNET_CHECKPOINT_HPP_
#define MSNET_CHECKPOINT_HPP_

#include <filesystem>
#include <iosfwd>

#include "msnet/model.hpp"

// Model checkpoint, little-endian:
//
//   "MSCK" u16 version (=1)
//   u32 layers, u32 s_dim, u32 hidden, u8 span method (0 meanpool,
//   1 attention), u8 per-layer similarity flag
//   str class order ("A,B,NEITHER"), str layer convention ("top-first")
//   f64 dropout_sim, dropout_score, dropout_attn, bn_momentum, bn_eps
//   u64 seed
//   u32 tensor count, then per tensor: str name, u8 rank, u32 dims...,
//   f64 values
//
// where str is a u16 byte length followed by UTF-8 bytes. Tensors, in order:
// w_sim.{g}, b_sim.{g} for each similarity group, w_dist, b_dist, w_score,
// b_score, bn.gamma, bn.beta, bn.running_mean, bn.running_var.
namespace msnet::checkpoint {

inline constexpr char kMagic[4] = {'M', 'S', 'C', 'K'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::string_view kClassOrder = "A,B,NEITHER";
inline constexpr std::string_view kLayerConvention = "top-first";

void save(std::ostream& out, const model::Msnet& net);
void save_file(const std::filesystem::path& path, const model::Msnet& net);

// Throws FormatError on malformed input, including an unknown class order or
// layer convention.
model::Msnet load(std::istream& in);
model::Msnet load_file(const std::filesystem::path& path);

// Throws ConfigError when a loaded model cannot consume embeddings with the
// given hidden size and layer count.
void check_compatible(const model::MsnetConfig& cfg, std::size_t hidden,
                      std::size_t layers_available);

}  // namespace msnet::checkpoint

#endif  // MSNET_CHECKPOINT_HPP_
