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

// msnet: tokenize GAP data, build toy embeddings, train, cross-validate,
// predict and score the MSnet mention-score classifier.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "msnet/checkpoint.hpp"
#include "msnet/embed_store.hpp"
#include "msnet/error.hpp"
#include "msnet/gap_data.hpp"
#include "msnet/model.hpp"
#include "msnet/numkit/ops.hpp"
#include "msnet/pipeline.hpp"
#include "msnet/synth.hpp"
#include "msnet/tokenizer.hpp"
#include "msnet/train_eval.hpp"
#include "run_manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace msnet::cli {
namespace {

constexpr double kGradTolerance = 1e-4;
constexpr int kExitCheckFailed = 3;

struct Inputs {
  std::optional<std::string> train_tsv, test_tsv, vocab;
  std::vector<std::string> embeddings;
};

// Flags that override the resolved configuration when given.
struct Overrides {
  std::optional<std::size_t> layers, sdim, batch, epochs, patience, parallel_folds, token_limit;
  std::optional<std::string> span;
  std::optional<double> lr, weight_decay, eval_fraction;
  std::optional<std::uint64_t> seed;
  std::optional<int> k;
  bool per_layer_sim = false;
  bool skip_invalid = false;
  std::optional<std::string> config, from_manifest;
};

void add_input_flags(CLI::App* cmd, Inputs& in, bool embeddings) {
  cmd->add_option("--train-tsv", in.train_tsv, "GAP-format TSV with the training records");
  cmd->add_option("--test-tsv", in.test_tsv, "GAP-format TSV with the test records");
  cmd->add_option("--vocab", in.vocab, "WordPiece vocabulary, one token per line");
  if (embeddings) {
    cmd->add_option("--embeddings", in.embeddings, "MSEB embedding file (repeatable)");
  }
}

void add_model_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--layers", o.layers, "top encoder layers used (L)");
  cmd->add_option("--sdim", o.sdim, "similarity vector size");
  cmd->add_option("--span", o.span, "span pooling: meanpool or attention")
      ->check(CLI::IsMember({"meanpool", "attention"}));
  cmd->add_flag("--per-layer-sim", o.per_layer_sim, "one similarity layer per encoder layer");
  cmd->add_option("--seed", o.seed, "seed for weights, shuffling and folds");
  cmd->add_option("--token-limit", o.token_limit, "maximum tokens before specials");
  cmd->add_flag("--skip-invalid", o.skip_invalid, "skip invalid TSV rows with a warning");
  cmd->add_option("--config", o.config, "JSON config, overridden by flags");
}

void add_train_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--lr", o.lr, "Adam learning rate");
  cmd->add_option("--batch", o.batch, "minibatch size");
  cmd->add_option("--epochs", o.epochs, "maximum epochs");
  cmd->add_option("--patience", o.patience, "epochs without improvement before stopping");
  cmd->add_option("--weight-decay", o.weight_decay, "decoupled weight decay");
  cmd->add_option("--from-manifest", o.from_manifest,
                  "rerun with the configuration and inputs of a manifest");
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

RunConfig resolve(const Overrides& o, Inputs& in, std::vector<InputFile>* recorded) {
  RunConfig c;
  if (o.from_manifest) {
    const RunManifest m = RunManifest::from_json(parse_json_file(*o.from_manifest));
    m.verify_inputs();
    c = m.config;
    std::vector<std::string> manifest_embeddings;
    for (const auto& f : m.inputs) {
      if (f.role == "train_tsv" && !in.train_tsv) in.train_tsv = f.path;
      if (f.role == "test_tsv" && !in.test_tsv) in.test_tsv = f.path;
      if (f.role == "vocab" && !in.vocab) in.vocab = f.path;
      if (f.role == "embeddings") manifest_embeddings.push_back(f.path);
    }
    if (in.embeddings.empty()) in.embeddings = manifest_embeddings;
  }
  if (o.config) merge(c, parse_json_file(*o.config));
  if (o.layers) c.model.layers = *o.layers;
  if (o.sdim) c.model.s_dim = *o.sdim;
  if (o.span) c.model.span = model::parse_span_method(*o.span);
  if (o.per_layer_sim) c.model.per_layer_sim = true;
  if (o.seed) c.model.seed = c.train.seed = c.fold_seed = *o.seed;
  if (o.lr) c.train.lr = *o.lr;
  if (o.batch) c.train.batch_size = *o.batch;
  if (o.epochs) c.train.max_epochs = *o.epochs;
  if (o.patience) c.train.patience = *o.patience;
  if (o.weight_decay) c.train.weight_decay = *o.weight_decay;
  if (o.eval_fraction) c.train.eval_fraction = *o.eval_fraction;
  if (o.k) c.k = *o.k;
  if (o.parallel_folds) c.parallel_folds = *o.parallel_folds;
  if (o.token_limit) c.token_limit = *o.token_limit;
  if (o.skip_invalid) c.skip_invalid = true;
  c.train.validate();
  if (recorded) {
    auto add = [&](const char* role, const std::string& path) {
      recorded->push_back({role, fs::absolute(path).string(), sha256_file(path)});
    };
    if (in.train_tsv) add("train_tsv", *in.train_tsv);
    if (in.test_tsv) add("test_tsv", *in.test_tsv);
    if (in.vocab) add("vocab", *in.vocab);
    for (const auto& e : in.embeddings) add("embeddings", e);
  }
  return c;
}

const std::string& require(const std::optional<std::string>& v, const char* flag) {
  if (!v) throw ConfigError(std::string(flag) + " is required");
  return *v;
}

std::vector<gap::GapRecord> load_records(const std::string& path, bool skip_invalid) {
  gap::ParseResult r = gap::read_tsv(
      path, skip_invalid ? gap::InvalidRows::kSkip : gap::InvalidRows::kReject);
  for (const auto& msg : r.skipped) std::cerr << "warning: " << path << ": " << msg << "\n";
  return std::move(r.records);
}

embed::EmbeddingStore load_store(const std::vector<std::string>& paths) {
  if (paths.empty()) throw ConfigError("--embeddings is required");
  embed::EmbeddingStore store;
  for (const auto& p : paths) store.load(p);
  return store;
}

struct Split {
  std::vector<gap::GapRecord> records;
  std::vector<tok::TokenizedDoc> docs;
  std::vector<model::ExampleInput> inputs;
};

Split prepare(const std::string& tsv, const tok::Vocab& vocab, const embed::EmbeddingStore& store,
              const RunConfig& c, std::size_t layers) {
  Split s;
  s.records = load_records(tsv, c.skip_invalid);
  s.docs = pipeline::tokenize_all(s.records, vocab, c.token_limit);
  s.inputs = pipeline::gather_all(s.records, s.docs, store, layers);
  return s;
}

model::MsnetConfig model_config(RunConfig& c, const Split& s) {
  if (s.inputs.empty()) throw ValidationError("no records to train on");
  c.model.hidden = s.inputs.front().hidden;
  c.model.validate();
  return c.model;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

int run_synth(std::size_t records, std::uint64_t seed, double neither,
              const std::string& prefix, const std::string& out_tsv,
              const std::optional<std::string>& out_vocab) {
  synth::SynthOptions opts;
  opts.records = records;
  opts.seed = seed;
  opts.neither_share = neither;
  opts.id_prefix = prefix;
  const synth::SynthCorpus c = synth::make_planted(opts);
  std::ofstream tsv(out_tsv, std::ios::binary);
  if (!tsv) throw IoError("cannot create " + out_tsv);
  gap::write_tsv(tsv, c.records);
  if (out_vocab) {
    std::string text;
    for (const auto& t : c.vocab) text += t + "\n";
    write_text(*out_vocab, text);
  }
  std::cerr << "wrote " << c.records.size() << " records to " << out_tsv << "\n";
  return 0;
}

int run_tokenize(Inputs& in, const Overrides& o, const std::string& out,
                 const std::optional<std::string>& listing) {
  RunConfig c = resolve(o, in, nullptr);
  const tok::Vocab vocab = tok::Vocab::load(require(in.vocab, "--vocab"));
  std::vector<std::string> tsvs;
  if (in.train_tsv) tsvs.push_back(*in.train_tsv);
  if (in.test_tsv) tsvs.push_back(*in.test_tsv);
  if (tsvs.empty()) throw ConfigError("--train-tsv or --test-tsv is required");

  std::ofstream diag(out, std::ios::binary);
  if (!diag) throw IoError("cannot create " + out);
  std::ofstream list;
  if (listing) {
    list.open(*listing, std::ios::binary);
    if (!list) throw IoError("cannot create " + *listing);
  }
  diag << "id\ttokens\tp_index\ta_begin\ta_end\tb_begin\tb_end\ttruncated\texact\tround_trip\tnotes\n";
  std::size_t total = 0, exact = 0, round_trip = 0, truncated = 0;
  for (const auto& tsv : tsvs) {
    const auto records = load_records(tsv, c.skip_invalid);
    const auto docs = pipeline::tokenize_all(records, vocab, c.token_limit);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const auto& d = docs[i];
      const bool rt = pipeline::surfaces_round_trip(d, records[i], vocab);
      ++total;
      exact += d.exact();
      round_trip += rt;
      truncated += d.truncated;
      std::string notes;
      for (const auto& n : d.diagnostics) notes += (notes.empty() ? "" : "; ") + n;
      diag << d.id << '\t' << d.tokens.size() << '\t' << d.p_index << '\t' << d.a_span.begin
           << '\t' << d.a_span.end << '\t' << d.b_span.begin << '\t' << d.b_span.end << '\t'
           << (d.truncated ? "TRUE" : "FALSE") << '\t' << (d.exact() ? "TRUE" : "FALSE")
           << '\t' << (rt ? "TRUE" : "FALSE") << '\t' << notes << '\n';
      if (listing) {
        json j;
        j["id"] = d.id;
        j["ids"] = d.ids();
        std::vector<std::string> pieces;
        for (const auto& t : d.tokens) pieces.push_back(t.text);
        j["tokens"] = pieces;
        j["p_index"] = d.p_index;
        j["a_span"] = {d.a_span.begin, d.a_span.end};
        j["b_span"] = {d.b_span.begin, d.b_span.end};
        list << j.dump() << '\n';
      }
    }
  }
  auto pct = [&](std::size_t n) { return total ? 100.0 * n / total : 0.0; };
  std::fprintf(stderr,
               "records %zu, exact alignments %zu (%.2f%%), surfaces round-trip %zu "
               "(%.2f%%), truncated %zu\n",
               total, exact, pct(exact), round_trip, pct(round_trip), truncated);
  return 0;
}

int run_embed_toy(Inputs& in, const Overrides& o, std::uint16_t layers, std::uint32_t hidden,
                  const std::string& out) {
  RunConfig c = resolve(o, in, nullptr);
  const tok::Vocab vocab = tok::Vocab::load(require(in.vocab, "--vocab"));
  std::vector<embed::EmbeddingSet> sets;
  for (const auto* tsv : {&in.train_tsv, &in.test_tsv}) {
    if (!*tsv) continue;
    const auto records = load_records(**tsv, c.skip_invalid);
    const auto docs = pipeline::tokenize_all(records, vocab, c.token_limit);
    auto more = pipeline::toy_embed_all(docs, layers, hidden, c.model.seed);
    std::move(more.begin(), more.end(), std::back_inserter(sets));
  }
  if (sets.empty()) throw ConfigError("--train-tsv or --test-tsv is required");
  embed::write_file(out, sets);
  std::cerr << "wrote " << sets.size() << " documents to " << out << "\n";
  return 0;
}

void write_manifest(const fs::path& path, RunManifest& m,
                    std::chrono::steady_clock::time_point t0) {
  m.wall_clock_seconds = seconds_since(t0);
  write_text(path, m.to_json().dump(2) + "\n");
}

int run_train(Inputs& in, const Overrides& o, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  RunManifest manifest;
  manifest.command = "train";
  RunConfig c = resolve(o, in, &manifest.inputs);
  const tok::Vocab vocab = tok::Vocab::load(require(in.vocab, "--vocab"));
  const embed::EmbeddingStore store = load_store(in.embeddings);
  Split all = prepare(require(in.train_tsv, "--train-tsv"), vocab, store, c, c.model.layers);
  const model::MsnetConfig cfg = model_config(c, all);

  std::vector<std::size_t> order(all.inputs.size());
  std::iota(order.begin(), order.end(), 0);
  numkit::Rng(c.fold_seed).split(4).shuffle(std::span<std::size_t>(order));
  const auto n_eval = static_cast<std::size_t>(
      std::ceil(c.train.eval_fraction * static_cast<double>(order.size())));
  if (n_eval < 1 || n_eval + 2 > order.size()) {
    throw ValidationError("too few records for the early-stopping split");
  }
  std::vector<model::ExampleInput> train_set, eval_set;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_eval ? eval_set : train_set).push_back(all.inputs[order[i]]);
  }
  const train::TrainResult r = train::train_fold(train_set, eval_set, cfg, c.train);
  checkpoint::save_file(out, model::Msnet(cfg, r.best));

  nlohmann::ordered_json summary;
  summary["best_epoch"] = r.best_epoch;
  summary["epochs_run"] = r.history.size();
  summary["eval_log_loss"] = r.best_val_loss;
  std::cout << summary.dump(2) << "\n";

  manifest.config = c;
  manifest.outputs = {out};
  write_manifest(out + ".manifest.json", manifest, t0);
  return 0;
}

int run_cv(Inputs& in, const Overrides& o, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  RunManifest manifest;
  manifest.command = "cv";
  RunConfig c = resolve(o, in, &manifest.inputs);
  const tok::Vocab vocab = tok::Vocab::load(require(in.vocab, "--vocab"));
  const embed::EmbeddingStore store = load_store(in.embeddings);
  Split train_split = prepare(require(in.train_tsv, "--train-tsv"), vocab, store, c, c.model.layers);
  const model::MsnetConfig cfg = model_config(c, train_split);
  std::optional<Split> test_split;
  if (in.test_tsv) test_split = prepare(*in.test_tsv, vocab, store, c, c.model.layers);

  const gap::FoldAssignment folds = gap::kfold_split(train_split.records, c.k, c.fold_seed);
  const train::CvResult r = train::cross_validate(
      train_split.inputs, folds.fold, c.k, cfg, c.train,
      test_split ? std::span<const model::ExampleInput>(test_split->inputs)
                 : std::span<const model::ExampleInput>(),
      c.parallel_folds);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  const std::string report = r.report.to_json();
  write_text(dir / "cv_report.json", report);
  manifest.outputs.push_back((dir / "cv_report.json").string());
  for (int f = 0; f < c.k; ++f) {
    const fs::path p = dir / ("fold-" + std::to_string(f + 1) + ".msck");
    checkpoint::save_file(p, model::Msnet(cfg, r.models[f]));
    manifest.outputs.push_back(p.string());
  }
  if (r.test_probs) {
    std::vector<std::string> ids;
    for (const auto& x : test_split->inputs) ids.push_back(x.id);
    std::ostringstream csv;
    train::write_predictions(csv, ids, *r.test_probs);
    write_text(dir / "test_predictions.csv", csv.str());
    manifest.outputs.push_back((dir / "test_predictions.csv").string());
  }
  std::cout << report;
  manifest.config = c;
  write_manifest(dir / "manifest.json", manifest, t0);
  std::fprintf(stderr, "cv finished in %.2f s\n", seconds_since(t0));
  return 0;
}

int run_predict(Inputs& in, const Overrides& o, const std::vector<std::string>& models,
                const std::string& out) {
  RunConfig c = resolve(o, in, nullptr);
  if (models.empty()) throw ConfigError("--model is required");
  std::vector<model::Msnet> nets;
  std::size_t layers = 0;
  for (const auto& m : models) {
    nets.push_back(checkpoint::load_file(m));
    layers = std::max(layers, nets.back().config().layers);
  }
  const tok::Vocab vocab = tok::Vocab::load(require(in.vocab, "--vocab"));
  const embed::EmbeddingStore store = load_store(in.embeddings);
  Split s = prepare(require(in.test_tsv, "--test-tsv"), vocab, store, c, layers);
  if (s.inputs.empty()) throw ValidationError("no records to predict");
  std::vector<numkit::Tensor> probs;
  for (auto& net : nets) {
    checkpoint::check_compatible(net.config(), s.inputs.front().hidden, layers);
    probs.push_back(net.predict(s.inputs));
  }
  const numkit::Tensor avg = train::ensemble_average(probs);
  std::vector<std::string> ids;
  for (const auto& r : s.records) ids.push_back(r.id);
  std::ostringstream csv;
  train::write_predictions(csv, ids, avg);
  write_text(out, csv.str());
  std::cerr << "wrote " << ids.size() << " predictions to " << out << "\n";
  return 0;
}

int run_eval(const std::string& pred_path, const std::string& gold_path, bool skip_invalid) {
  std::ifstream pin(pred_path, std::ios::binary);
  if (!pin) throw IoError("cannot open " + pred_path);
  const train::Predictions p = train::read_predictions(pin);
  const auto gold = load_records(gold_path, skip_invalid);
  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < p.ids.size(); ++i) {
    if (!row_of.emplace(p.ids[i], i).second) {
      throw ValidationError("duplicate prediction for " + p.ids[i]);
    }
  }
  numkit::Tensor probs({gold.size(), 3});
  std::vector<int> labels;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto it = row_of.find(gold[i].id);
    if (it == row_of.end()) throw ValidationError("no prediction for " + gold[i].id);
    for (std::size_t k = 0; k < 3; ++k) probs.at(i, k) = p.probs.at(it->second, k);
    labels.push_back(gap::class_index(gap::derive_label(gold[i])));
  }
  if (row_of.size() != gold.size()) {
    throw ValidationError("prediction file has ids that are not in the gold file");
  }
  std::printf("%.6f\n", train::log_loss(probs, labels));
  return 0;
}

std::string param_name(model::MsnetParams& p, std::size_t index) {
  std::vector<std::string> names;
  for (std::size_t g = 0; g < p.w_sim.size(); ++g) names.push_back("w_sim." + std::to_string(g));
  for (std::size_t g = 0; g < p.b_sim.size(); ++g) names.push_back("b_sim." + std::to_string(g));
  for (const char* n : {"w_dist", "b_dist", "w_score", "b_score", "bn.gamma", "bn.beta"}) {
    names.push_back(n);
  }
  return index < names.size() ? names[index] : "?";
}

int run_gradcheck(const std::optional<std::string>& span, std::size_t hidden,
                  std::size_t layers, std::size_t s_dim, std::size_t batch, std::uint64_t seed,
                  double eps) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<model::SpanMethod> methods{model::SpanMethod::kMeanpool,
                                         model::SpanMethod::kAttention};
  if (span) methods = {model::parse_span_method(*span)};
  double worst = 0.0;
  for (const auto method : methods) {
    model::MsnetConfig cfg;
    cfg.layers = layers;
    cfg.s_dim = s_dim;
    cfg.hidden = hidden;
    cfg.span = method;
    cfg.dropout_sim = cfg.dropout_score = cfg.dropout_attn = 0.0;
    cfg.seed = seed;
    numkit::Rng rng = numkit::Rng(seed).split(7);
    std::vector<model::ExampleInput> xs;
    std::vector<int> labels;
    for (std::size_t e = 0; e < batch; ++e) {
      const std::size_t tokens = 6 + rng.below(10);
      embed::EmbeddingSet set{"g" + std::to_string(e), static_cast<std::uint16_t>(layers),
                              static_cast<std::uint32_t>(tokens),
                              static_cast<std::uint32_t>(hidden), {}};
      set.values.resize(layers * tokens * hidden);
      for (float& v : set.values) v = static_cast<float>(rng.uniform(-1.0, 1.0));
      const std::size_t p = 1 + rng.below(tokens - 2);
      const std::size_t a = 1 + rng.below(tokens - 4), b = 1 + rng.below(tokens - 4);
      xs.push_back(model::gather(set, p, {a, a + 1 + rng.below(3)}, {b, b + 1 + rng.below(3)},
                                 layers));
      labels.push_back(static_cast<int>(rng.below(3)));
    }
    std::vector<const model::ExampleInput*> ptrs;
    for (const auto& x : xs) ptrs.push_back(&x);
    model::Msnet net(cfg);
    auto loss = [&](bool with_grad) {
      const model::ForwardCache cache = net.forward(ptrs, model::Mode::kTrain);
      if (with_grad) return net.backward(cache, labels);
      return numkit::softmax_xent(cache.scores, labels).loss;
    };
    const auto params = net.params().all();
    const numkit::GradCheckResult r = numkit::grad_check(loss, params, eps);
    std::printf("span=%s elements=%zu max_rel_error=%.3e worst=%s[%zu] analytic=%.3e "
                "numeric=%.3e\n",
                std::string(model::to_string(method)).c_str(), r.elements, r.max_rel_error,
                param_name(net.params(), r.worst_param).c_str(), r.worst_index, r.analytic,
                r.numeric);
    // The similarity bias feeds batch-statistics normalization, which removes
    // it exactly; its differences are roundoff. Report it separately.
    std::vector<numkit::Parameter*> rest, bias;
    for (auto& b : net.params().b_sim) bias.push_back(&b);
    for (auto* q : params) {
      if (std::find(bias.begin(), bias.end(), q) == bias.end()) rest.push_back(q);
    }
    const numkit::GradCheckResult rr = numkit::grad_check(loss, rest, eps);
    const numkit::GradCheckResult rb = numkit::grad_check(loss, bias, eps);
    double bias_grad = 0.0;
    for (auto* q : bias) {
      for (double g : q->grad.values()) bias_grad = std::max(bias_grad, std::abs(g));
    }
    std::printf("  without b_sim max_rel_error=%.3e; b_sim max|analytic|=%.3e "
                "max|numeric|=%.3e\n",
                rr.max_rel_error, bias_grad, std::abs(rb.numeric));
    worst = std::max(worst, r.max_rel_error);
  }
  std::printf("max_rel_error=%.3e tolerance=%.0e %s (%.2f s)\n", worst, kGradTolerance,
              worst < kGradTolerance ? "PASS" : "FAIL", seconds_since(t0));
  return worst < kGradTolerance ? 0 : kExitCheckFailed;
}

}  // namespace
}  // namespace msnet::cli

int main(int argc, char** argv) {
  using namespace msnet::cli;
  CLI::App app{"MSnet mention-score classifier for gendered pronoun resolution"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Inputs in;
  Overrides o;
  std::string out;
  std::optional<std::string> listing, vocab_out;

  auto* tokenize = app.add_subcommand("tokenize", "alignment diagnostics for GAP records");
  add_input_flags(tokenize, in, false);
  add_model_flags(tokenize, o);
  tokenize->add_option("--out", out, "diagnostic TSV")->required();
  tokenize->add_option("--listing", listing, "JSON-lines token listing per document");

  std::uint16_t toy_layers = 4;
  std::uint32_t toy_hidden = 64;
  auto* embed_toy = app.add_subcommand("embed-toy", "write deterministic toy embeddings");
  add_input_flags(embed_toy, in, false);
  embed_toy->add_option("--layers", toy_layers, "layers stored per document");
  embed_toy->add_option("--hidden", toy_hidden, "hidden size");
  embed_toy->add_option("--seed", o.seed, "embedding seed");
  embed_toy->add_option("--token-limit", o.token_limit, "maximum tokens before specials");
  embed_toy->add_flag("--skip-invalid", o.skip_invalid, "skip invalid TSV rows");
  embed_toy->add_option("--out", out, "MSEB output file")->required();

  std::size_t synth_records = 1000;
  double synth_neither = 0.2;
  std::uint64_t synth_seed = 0;
  std::string synth_prefix = "synth";
  auto* synth = app.add_subcommand("synth", "write a planted GAP-format corpus");
  synth->add_option("--records", synth_records, "number of records");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--neither-share", synth_neither, "share of NEITHER labels");
  synth->add_option("--id-prefix", synth_prefix, "record id prefix");
  synth->add_option("--out", out, "TSV output file")->required();
  synth->add_option("--vocab-out", vocab_out, "vocabulary output file");

  auto* train = app.add_subcommand("train", "train one model with a held-out early-stopping split");
  add_input_flags(train, in, true);
  add_model_flags(train, o);
  add_train_flags(train, o);
  train->add_option("--eval-fraction", o.eval_fraction, "share held out for early stopping");
  train->add_option("--out", out, "checkpoint output file")->required();

  auto* cv = app.add_subcommand("cv", "k-fold cross-validation with fold checkpoints");
  add_input_flags(cv, in, true);
  add_model_flags(cv, o);
  add_train_flags(cv, o);
  cv->add_option("--k", o.k, "number of folds");
  cv->add_option("--parallel-folds", o.parallel_folds, "folds trained concurrently");
  cv->add_option("--out", out, "output directory")->required();

  std::vector<std::string> models;
  auto* predict = app.add_subcommand("predict", "ensemble predictions as a submission CSV");
  add_input_flags(predict, in, true);
  predict->add_option("--model", models, "checkpoint (repeatable)")->required();
  predict->add_option("--token-limit", o.token_limit, "maximum tokens before specials");
  predict->add_flag("--skip-invalid", o.skip_invalid, "skip invalid TSV rows");
  predict->add_option("--out", out, "CSV output file")->required();

  std::string pred_path, gold_path;
  auto* eval = app.add_subcommand("eval", "log-loss of a prediction CSV against gold labels");
  eval->add_option("--pred", pred_path, "prediction CSV")->required();
  eval->add_option("--gold", gold_path, "GAP-format TSV with labels")->required();
  eval->add_flag("--skip-invalid", o.skip_invalid, "skip invalid TSV rows");

  std::optional<std::string> gc_span;
  std::size_t gc_hidden = 8, gc_layers = 2, gc_sdim = 4, gc_batch = 4;
  std::uint64_t gc_seed = 0;
  double gc_eps = 1e-5;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the full model");
  gradcheck->add_option("--span", gc_span, "check one span method only")
      ->check(CLI::IsMember({"meanpool", "attention"}));
  gradcheck->add_option("--hidden", gc_hidden, "hidden size");
  gradcheck->add_option("--layers", gc_layers, "layers");
  gradcheck->add_option("--sdim", gc_sdim, "similarity size");
  gradcheck->add_option("--batch", gc_batch, "batch size");
  gradcheck->add_option("--seed", gc_seed, "seed");
  gradcheck->add_option("--eps", gc_eps, "finite-difference step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*tokenize) return run_tokenize(in, o, out, listing);
    if (*embed_toy) return run_embed_toy(in, o, toy_layers, toy_hidden, out);
    if (*synth) return run_synth(synth_records, synth_seed, synth_neither, synth_prefix, out, vocab_out);
    if (*train) return run_train(in, o, out);
    if (*cv) return run_cv(in, o, out);
    if (*predict) return run_predict(in, o, models, out);
    if (*eval) return run_eval(pred_path, gold_path, o.skip_invalid);
    if (*gradcheck) return run_gradcheck(gc_span, gc_hidden, gc_layers, gc_sdim, gc_batch, gc_seed, gc_eps);
  } catch (const msnet::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const msnet::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
