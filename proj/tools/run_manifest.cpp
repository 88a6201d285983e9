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

#include "run_manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

#include "msnet/error.hpp"

namespace msnet::cli {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["model"] = {{"layers", c.model.layers},
                {"s_dim", c.model.s_dim},
                {"span", std::string(model::to_string(c.model.span))},
                {"per_layer_sim", c.model.per_layer_sim},
                {"dropout_sim", c.model.dropout_sim},
                {"dropout_score", c.model.dropout_score},
                {"dropout_attn", c.model.dropout_attn},
                {"bn_momentum", c.model.bn_momentum},
                {"bn_eps", c.model.bn_eps},
                {"seed", c.model.seed}};
  j["train"] = {{"lr", c.train.lr},
                {"batch_size", c.train.batch_size},
                {"max_epochs", c.train.max_epochs},
                {"patience", c.train.patience},
                {"weight_decay", c.train.weight_decay},
                {"seed", c.train.seed},
                {"eval_fraction", c.train.eval_fraction}};
  j["data"] = {{"k", c.k},
               {"fold_seed", c.fold_seed},
               {"token_limit", c.token_limit},
               {"skip_invalid", c.skip_invalid}};
  j["run"] = {{"parallel_folds", c.parallel_folds}};
  return j;
}

namespace {

template <typename T>
void take(const json& obj, const char* key, T& out, const std::string& section) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: " + section + "." + key + " has the wrong type");
  }
}

void check_keys(const json& obj, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("config: '" + section + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError("config: unknown key " + section + "." + key);
  }
}

}  // namespace

void merge(RunConfig& c, const json& j) {
  check_keys(j, "config", {"model", "train", "data", "run"});
  if (j.contains("model")) {
    const json& m = j["model"];
    check_keys(m, "model", {"layers", "s_dim", "span", "per_layer_sim", "dropout_sim",
                            "dropout_score", "dropout_attn", "bn_momentum", "bn_eps", "seed"});
    take(m, "layers", c.model.layers, "model");
    take(m, "s_dim", c.model.s_dim, "model");
    if (m.contains("span")) {
      std::string s;
      take(m, "span", s, "model");
      c.model.span = model::parse_span_method(s);
    }
    take(m, "per_layer_sim", c.model.per_layer_sim, "model");
    take(m, "dropout_sim", c.model.dropout_sim, "model");
    take(m, "dropout_score", c.model.dropout_score, "model");
    take(m, "dropout_attn", c.model.dropout_attn, "model");
    take(m, "bn_momentum", c.model.bn_momentum, "model");
    take(m, "bn_eps", c.model.bn_eps, "model");
    take(m, "seed", c.model.seed, "model");
  }
  if (j.contains("train")) {
    const json& t = j["train"];
    check_keys(t, "train", {"lr", "batch_size", "max_epochs", "patience", "weight_decay",
                            "seed", "eval_fraction"});
    take(t, "lr", c.train.lr, "train");
    take(t, "batch_size", c.train.batch_size, "train");
    take(t, "max_epochs", c.train.max_epochs, "train");
    take(t, "patience", c.train.patience, "train");
    take(t, "weight_decay", c.train.weight_decay, "train");
    take(t, "seed", c.train.seed, "train");
    take(t, "eval_fraction", c.train.eval_fraction, "train");
  }
  if (j.contains("data")) {
    const json& d = j["data"];
    check_keys(d, "data", {"k", "fold_seed", "token_limit", "skip_invalid"});
    take(d, "k", c.k, "data");
    take(d, "fold_seed", c.fold_seed, "data");
    take(d, "token_limit", c.token_limit, "data");
    take(d, "skip_invalid", c.skip_invalid, "data");
  }
  if (j.contains("run")) {
    check_keys(j["run"], "run", {"parallel_folds"});
    take(j["run"], "parallel_folds", c.parallel_folds, "run");
  }
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error("sha256: digest initialization failed");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), in.gcount());
  }
  if (in.bad()) throw IoError("read failed: " + path.string());
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

ordered_json RunManifest::to_json() const {
  ordered_json j;
  j["tool"] = "msnet";
  j["version"] = kToolVersion;
  j["command"] = command;
  j["config"] = cli::to_json(config);
  j["inputs"] = ordered_json::array();
  for (const auto& f : inputs) {
    j["inputs"].push_back({{"role", f.role}, {"path", f.path}, {"sha256", f.sha256}});
  }
  j["outputs"] = outputs;
  j["wall_clock_seconds"] = wall_clock_seconds;
  return j;
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    merge(m.config, j.at("config"));
    for (const auto& f : j.at("inputs")) {
      m.inputs.push_back({f.at("role").get<std::string>(), f.at("path").get<std::string>(),
                          f.at("sha256").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  return m;
}

void RunManifest::verify_inputs() const {
  for (const auto& f : inputs) {
    if (sha256_file(f.path) != f.sha256) {
      throw ValidationError("manifest: " + f.path + " changed since the recorded run");
    }
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace msnet::cli
