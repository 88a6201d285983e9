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

#ifndef MSNET_TOOLS_RUN_MANIFEST_HPP_
#define MSNET_TOOLS_RUN_MANIFEST_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "msnet/model.hpp"
#include "msnet/train_eval.hpp"

namespace msnet::cli {

inline constexpr const char* kToolVersion = "1.0.0";

// Every knob of a training run with defaults materialized.
struct RunConfig {
  model::MsnetConfig model;
  train::TrainConfig train;
  int k = 5;
  std::uint64_t fold_seed = 0;
  std::size_t token_limit = 300;
  bool skip_invalid = false;
  std::size_t parallel_folds = 1;
};

nlohmann::ordered_json to_json(const RunConfig& c);
// Overlays the keys present in `j` onto `c`. Unknown keys are a ConfigError.
void merge(RunConfig& c, const nlohmann::json& j);

// Lowercase hex SHA-256 of a file's bytes. Throws IoError.
std::string sha256_file(const std::filesystem::path& path);

struct InputFile {
  std::string role;  // e.g. "train_tsv", "embeddings"
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string command;
  RunConfig config;
  std::vector<InputFile> inputs;
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0.0;

  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
  // Throws ValidationError when an input's current digest differs.
  void verify_inputs() const;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace msnet::cli

#endif  // MSNET_TOOLS_RUN_MANIFEST_HPP_
