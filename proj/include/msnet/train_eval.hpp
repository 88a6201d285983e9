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

#ifndef MSNET_TRAIN_EVAL_HPP_
#define MSNET_TRAIN_EVAL_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "msnet/error.hpp"
#include "msnet/model.hpp"
#include "msnet/numkit/tensor.hpp"

namespace msnet::train {

struct TrainConfig {
  double lr = 3e-4;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 30;
  std::size_t patience = 4;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  // Share of the training set held out for early stopping by `train` runs
  // that have no cross-validation fold to monitor.
  double eval_fraction = 0.2;

  // Throws ConfigError.
  void validate() const;
};

// Training produced a non-finite loss or parameter.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, std::size_t epoch,
                  std::optional<double> last_val_loss)
      : NumericError(what), epoch_(epoch), last_val_loss_(last_val_loss) {}
  std::size_t epoch() const { return epoch_; }
  std::optional<double> last_val_loss() const { return last_val_loss_; }

 private:
  std::size_t epoch_;
  std::optional<double> last_val_loss_;
};

inline constexpr double kProbClip = 1e-15;

// Mean of -ln p[label] with p clipped to [1e-15, 1 - 1e-15]. Rows must sum to
// one within 1e-6.
double log_loss(const numkit::Tensor& probs, std::span<const int> labels);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  model::MsnetParams best;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  std::vector<EpochRecord> history;
  bool stopped_early = false;
};

// Minibatch Adam over shuffled epochs, validating in eval mode after each
// epoch and keeping the parameters of the best (strictly lowest) epoch.
// Model weights are initialized from `cfg.seed`; shuffling and dropout draw
// from `tc.seed`.
TrainResult train_fold(std::span<const model::ExampleInput> train,
                       std::span<const model::ExampleInput> val,
                       const model::MsnetConfig& cfg, const TrainConfig& tc);

struct FoldReport {
  int fold = 0;
  std::size_t train_size = 0;
  std::size_t val_size = 0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  double val_loss = 0.0;
};

struct CvReport {
  int k = 0;
  std::vector<FoldReport> folds;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  std::optional<double> test_loss;

  // Fills mean and std from the fold losses.
  void summarize();
  // Deterministic JSON (no timings).
  std::string to_json() const;
};

struct CvResult {
  CvReport report;
  std::vector<model::MsnetParams> models;     // one per fold
  std::optional<numkit::Tensor> test_probs;   // ensemble average
};

// Per-fold model and shuffle seeds are derived from the configured seeds and
// the fold index, so results do not depend on `parallel_folds`.
CvResult cross_validate(std::span<const model::ExampleInput> examples,
                        std::span<const int> fold_of, int k,
                        const model::MsnetConfig& cfg, const TrainConfig& tc,
                        std::span<const model::ExampleInput> test = {},
                        std::size_t parallel_folds = 1);

// Arithmetic mean of the models' probability rows, renormalized to sum 1.
numkit::Tensor ensemble_average(std::span<const numkit::Tensor> probs);
numkit::Tensor ensemble_predict(std::span<const model::MsnetParams> models,
                                const model::MsnetConfig& cfg,
                                std::span<const model::ExampleInput> inputs);

// Header "ID,A,B,NEITHER", probabilities printed with 17 significant digits.
void write_predictions(std::ostream& out, std::span<const std::string> ids,
                       const numkit::Tensor& probs);

struct Predictions {
  std::vector<std::string> ids;
  numkit::Tensor probs;
};
// Throws FormatError on a malformed file.
Predictions read_predictions(std::istream& in);

}  // namespace msnet::train

#endif  // MSNET_TRAIN_EVAL_HPP_
