// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/loss.hpp"
#include "glav/model.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace glav {

struct TrainOptions {
  int batch_size = 64;
  int epochs = 100;
  double learning_rate = 1e-4;  // peak
  double lr_min_ratio = 0.01;
  double warmup_frac = 0.05;  // of one LR cycle
  double lr_cycle_epochs = 200.0;
  double beta_cycle_epochs = 200.0;
  double train_split = 0.8;
  double valid_split = 0.1;
  double test_split = 0.1;
  double grad_clip = 10.0;
  std::uint64_t seed = 0;
  int eval_every = 1;   // epochs between validation passes
  int log_every = 10;   // steps between metric records
  double target_accuracy = -1.0;  // stop once validation reaches this
  int max_seconds = 0;            // wall-clock budget; 0 = unlimited
};

struct DatasetSplits {
  std::vector<Graph> train;
  std::vector<Graph> valid;
  std::vector<Graph> test;
};

/// Deterministic shuffle + fraction split.
DatasetSplits split_dataset(std::vector<Graph> graphs, double train_frac, double valid_frac,
                            double test_frac, std::uint64_t seed);

struct TrainResult {
  std::int64_t steps = 0;
  int epochs_run = 0;
  double best_valid_accuracy = 0.0;
  std::string best_checkpoint;
  std::string last_checkpoint;
  bool reached_target = false;
};

/// Optimization loop: shuffled batches, encode -> sample -> reinject ground
/// truth size -> decode -> focal/size/KL losses -> AdamW, with cosine LR and
/// half-sine beta schedules. Checkpoints the best validation exact
/// reconstruction; fully resumable (parameters, optimizer, step, RNG).
class Trainer {
 public:
  Trainer(GraphVae& model, LossConfig loss, TrainOptions opts, std::string run_dir);

  TrainResult fit(const DatasetSplits& data);

  /// One optimization step over the given graphs; exposed for tests.
  LossReport train_step(const std::vector<Graph>& batch);

  double validate(const std::vector<Graph>& graphs);

  void save_checkpoint(const std::string& path);
  void load_checkpoint(const std::string& path);

  std::int64_t step() const { return step_; }
  int epoch() const { return epoch_; }
  const LossConfig& loss_config() const { return loss_; }

  /// Restores just the model weights (and config consistency check) from a
  /// checkpoint written by save_checkpoint.
  static void load_model(const std::string& path, GraphVae& model);

 private:
  void log_report(const LossReport& report, double lr);
  void dump_diagnostics(const std::vector<Graph>& batch, const LossReport& report);

  GraphVae& model_;
  LossConfig loss_;
  TrainOptions opts_;
  nn::AdamW optim_;
  RandomStream rng_;
  std::int64_t step_ = 0;
  int epoch_ = 0;
  double best_acc_ = -1.0;
  std::string run_dir_;
  std::ofstream metrics_;
};

}  // namespace glav
