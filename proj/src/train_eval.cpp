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

#include "msnet/train_eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "msnet/numkit/ops.hpp"
#include "msnet/numkit/rng.hpp"

namespace msnet::train {

using model::ExampleInput;
using model::MsnetConfig;
using model::MsnetParams;
using numkit::Rng;
using numkit::Tensor;

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be >= 0");
  if (batch_size < 2) throw ConfigError("batch size must be at least 2");
  if (max_epochs < 1) throw ConfigError("max epochs must be at least 1");
  if (patience < 1) throw ConfigError("patience must be at least 1");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be >= 0");
  if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) {
    throw ConfigError("eval fraction must be in (0, 1)");
  }
}

double log_loss(const Tensor& probs, std::span<const int> labels) {
  if (probs.rank() != 2 || probs.cols() != 3) {
    throw DimensionError("log_loss: expected [n x 3] probabilities, got " +
                         numkit::shape_string(probs.shape()));
  }
  if (probs.rows() != labels.size()) {
    throw ValidationError("log_loss: " + std::to_string(probs.rows()) +
                          " prediction rows for " + std::to_string(labels.size()) +
                          " labels");
  }
  if (labels.empty()) throw ValidationError("log_loss: no examples");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = probs.row(i);
    const double sum = row[0] + row[1] + row[2];
    if (std::abs(sum - 1.0) > 1e-6) {
      throw ValidationError("log_loss: row " + std::to_string(i) + " sums to " +
                            std::to_string(sum));
    }
    if (labels[i] < 0 || labels[i] > 2) {
      throw ValidationError("log_loss: label out of range at row " + std::to_string(i));
    }
    const double p = std::clamp(row[labels[i]], kProbClip, 1.0 - kProbClip);
    total -= std::log(p);
  }
  return total / static_cast<double>(labels.size());
}

namespace {

std::vector<int> labels_of(std::span<const ExampleInput> xs) {
  std::vector<int> out;
  out.reserve(xs.size());
  for (const auto& x : xs) {
    if (x.label < 0 || x.label > 2) {
      throw ValidationError("example " + x.id + " has no label");
    }
    out.push_back(x.label);
  }
  return out;
}

}  // namespace

TrainResult train_fold(std::span<const ExampleInput> train,
                       std::span<const ExampleInput> val, const MsnetConfig& cfg,
                       const TrainConfig& tc) {
  tc.validate();
  if (val.empty()) throw ValidationError("train_fold: empty validation set");
  if (train.size() < 2) throw ValidationError("train_fold: need at least 2 training examples");
  const std::vector<int> train_labels = labels_of(train);
  const std::vector<int> val_labels = labels_of(val);

  model::Msnet net(cfg);
  std::vector<numkit::Parameter*> params = net.params().all();
  std::vector<numkit::AdamState> states;
  for (const numkit::Parameter* p : params) states.emplace_back(p->value.shape());
  const numkit::AdamOptions opts{tc.lr, 0.9, 0.999, 1e-8, tc.weight_decay};

  const Rng root(tc.seed);
  Rng shuffle_rng = root.split(2);
  Rng dropout_rng = root.split(3);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  std::optional<double> last_val;
  std::size_t since_best = 0;
  std::vector<const ExampleInput*> batch;
  std::vector<int> batch_labels;

  for (std::size_t epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
      const std::size_t size = std::min(tc.batch_size, order.size() - start);
      if (size < 2) continue;
      batch.clear();
      batch_labels.clear();
      for (std::size_t i = start; i < start + size; ++i) {
        batch.push_back(&train[order[i]]);
        batch_labels.push_back(train_labels[order[i]]);
      }
      double loss = 0.0;
      try {
        net.params().zero_grad();
        const model::ForwardCache cache =
            net.forward(batch, model::Mode::kTrain, &dropout_rng);
        loss = net.backward(cache, batch_labels);
        for (std::size_t i = 0; i < params.size(); ++i) {
          numkit::adam_step(*params[i], states[i], opts);
          params[i]->value.check_finite("parameter update");
        }
      } catch (const NumericError& e) {
        throw DivergenceError(std::string("training diverged: ") + e.what(), epoch, last_val);
      }
      if (!std::isfinite(loss)) {
        throw DivergenceError("training diverged: non-finite loss", epoch, last_val);
      }
      loss_sum += loss * static_cast<double>(size);
      seen += size;
    }

    double val_loss = 0.0;
    try {
      val_loss = log_loss(net.predict(val), val_labels);
    } catch (const NumericError& e) {
      throw DivergenceError(std::string("validation diverged: ") + e.what(), epoch, last_val);
    }
    last_val = val_loss;
    result.history.push_back(
        {epoch, seen ? loss_sum / static_cast<double>(seen) : 0.0, val_loss});
    if (val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      result.best = net.params();
      since_best = 0;
    } else if (++since_best >= tc.patience) {
      result.stopped_early = epoch < tc.max_epochs;
      break;
    }
  }
  return result;
}

void CvReport::summarize() {
  const double n = static_cast<double>(folds.size());
  if (folds.empty()) {
    mean = std = 0.0;
    return;
  }
  double sum = 0.0;
  for (const auto& f : folds) sum += f.val_loss;
  mean = sum / n;
  double sq = 0.0;
  for (const auto& f : folds) sq += (f.val_loss - mean) * (f.val_loss - mean);
  std = folds.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
}

std::string CvReport::to_json() const {
  nlohmann::ordered_json j;
  j["k"] = k;
  j["folds"] = nlohmann::ordered_json::array();
  for (const auto& f : folds) {
    j["folds"].push_back({{"fold", f.fold},
                          {"train_size", f.train_size},
                          {"val_size", f.val_size},
                          {"best_epoch", f.best_epoch},
                          {"epochs_run", f.epochs_run},
                          {"val_log_loss", f.val_loss}});
  }
  j["cv_mean"] = mean;
  j["cv_std"] = std;
  j["test_log_loss"] = test_loss ? nlohmann::ordered_json(*test_loss) : nullptr;
  return j.dump(2) + "\n";
}

Tensor ensemble_average(std::span<const Tensor> probs) {
  if (probs.empty()) throw ValidationError("ensemble_average: no models");
  Tensor out(probs.front().shape());
  for (const Tensor& p : probs) {
    numkit::expect_shape(p, probs.front().shape(), "ensemble_average");
    for (std::size_t i = 0; i < p.size(); ++i) out[i] += p[i];
  }
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    double sum = 0.0;
    for (double& v : row) {
      v /= static_cast<double>(probs.size());
      sum += v;
    }
    if (!(sum > 0.0)) throw NumericError("ensemble_average: row with zero mass");
    for (double& v : row) v /= sum;
  }
  return out;
}

Tensor ensemble_predict(std::span<const MsnetParams> models, const MsnetConfig& cfg,
                        std::span<const ExampleInput> inputs) {
  std::vector<Tensor> probs;
  for (const MsnetParams& p : models) {
    model::Msnet net(cfg, p);
    probs.push_back(net.predict(inputs));
  }
  return ensemble_average(probs);
}

CvResult cross_validate(std::span<const ExampleInput> examples, std::span<const int> fold_of,
                        int k, const MsnetConfig& cfg, const TrainConfig& tc,
                        std::span<const ExampleInput> test, std::size_t parallel_folds) {
  if (fold_of.size() != examples.size()) {
    throw ValidationError("cross_validate: fold assignment does not match the examples");
  }
  if (k < 2) throw ConfigError("cross_validate: k must be at least 2");
  for (int f : fold_of) {
    if (f < 0 || f >= k) throw ValidationError("cross_validate: fold index out of range");
  }
  tc.validate();
  cfg.validate();

  std::vector<FoldReport> reports(k);
  std::vector<MsnetParams> models(k);
  std::vector<std::exception_ptr> errors(k);
  const int threads = static_cast<int>(std::clamp<std::size_t>(parallel_folds, 1, k));

#pragma omp parallel for num_threads(threads) schedule(dynamic) if (threads > 1)
  for (int f = 0; f < k; ++f) {
    try {
      std::vector<ExampleInput> train, val;
      for (std::size_t i = 0; i < examples.size(); ++i) {
        (fold_of[i] == f ? val : train).push_back(examples[i]);
      }
      MsnetConfig fold_cfg = cfg;
      fold_cfg.seed = numkit::hash_keys({cfg.seed, static_cast<std::uint64_t>(f)});
      TrainConfig fold_tc = tc;
      fold_tc.seed = numkit::hash_keys({tc.seed, static_cast<std::uint64_t>(f)});
      TrainResult r = train_fold(train, val, fold_cfg, fold_tc);
      reports[f] = {f, train.size(), val.size(), r.best_epoch, r.history.size(),
                    r.best_val_loss};
      models[f] = std::move(r.best);
    } catch (...) {
      errors[f] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  CvResult out;
  out.report.k = k;
  out.report.folds = std::move(reports);
  out.report.summarize();
  out.models = std::move(models);
  if (!test.empty()) {
    out.test_probs = ensemble_predict(out.models, cfg, test);
    bool labelled = true;
    for (const auto& x : test) labelled = labelled && x.label >= 0;
    if (labelled) out.report.test_loss = log_loss(*out.test_probs, labels_of(test));
  }
  return out;
}

void write_predictions(std::ostream& out, std::span<const std::string> ids,
                       const Tensor& probs) {
  if (probs.rank() != 2 || probs.cols() != 3 || probs.rows() != ids.size()) {
    throw DimensionError("write_predictions: probabilities do not match the ids");
  }
  out << "ID,A,B,NEITHER\n";
  char buf[32];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i].find_first_of(",\r\n\"") != std::string::npos) {
      throw ValidationError("write_predictions: id '" + ids[i] +
                            "' cannot be written unquoted");
    }
    out << ids[i];
    for (std::size_t c = 0; c < 3; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", probs.at(i, c));
      out << ',' << buf;
    }
    out << '\n';
  }
}

Predictions read_predictions(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  auto next = [&]() {
    offset += line.size() + (line_no ? 1 : 0);
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next()) throw FormatError("prediction file is empty", 0);
  if (line != "ID,A,B,NEITHER") {
    throw FormatError("prediction header must be ID,A,B,NEITHER", 0);
  }
  Predictions p;
  std::vector<double> values;
  while (next()) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 4) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 4 fields", offset);
    }
    p.ids.push_back(fields[0]);
    for (std::size_t c = 1; c < 4; ++c) {
      double v = 0.0;
      const auto& s = fields[c];
      const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v) || v < 0.0) {
        throw FormatError("line " + std::to_string(line_no) + ": bad probability '" + s + "'",
                          offset);
      }
      values.push_back(v);
    }
  }
  p.probs = Tensor({p.ids.size(), 3}, std::move(values));
  return p;
}

}  // namespace msnet::train
