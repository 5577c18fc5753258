// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/loss.hpp"
#include "glav/model.hpp"
#include "glav/synthetic.hpp"
#include "glav/train.hpp"

#include <string>
#include <vector>

namespace glav {

/// Flat key-value run configuration. Named presets preload the published
/// hyperparameter columns; a config file and CLI flags override them.
/// Unknown keys are rejected.
struct Config {
  // task / dataset
  std::string dataset_kind = "coloring";  // molecule | coloring | bn | generic
  std::string node_vocab = "C,N,O,F";
  std::string bond_mode = "aromatic";  // aromatic | kekulized
  int n_node_classes = 4;              // generic datasets
  int n_edge_classes = 2;
  bool use_node_attributes = false;
  std::string mode = "vae";  // ae | vae

  // optimizer block (preset columns)
  std::string optimizer = "adamw";
  double learning_rate = 1e-3;
  int batch_size = 64;
  int latent_dimension = 128;
  int encoder_hidden_size = 128;
  int encoder_input_size = 128;
  int graph_transformer_layers = 3;
  int transformer_heads = 4;
  double beta = 1e-4;
  double lr_cycle_length = 200;    // epochs
  double beta_cycle_length = 200;  // epochs
  double ratio_negative_edges = 4;
  double edge_loss_weight = 1.25;
  double train_split = 0.8;
  double valid_split = 0.1;
  double test_split = 0.1;

  // architecture extras
  int decoder_layers = -1;
  int readout_blocks = 1;
  int readin_blocks = 1;
  int d_s = 8;
  int k_lap = 8;
  int k_rw = 8;
  int n_cap = 256;

  // loss extras
  double gamma_focal = 2.0;
  double smooth_l1_beta = 1.0;

  // run control
  int epochs = 100;
  double warmup_frac = 0.05;
  double lr_min_ratio = 0.01;
  double grad_clip = 10.0;
  int eval_every = 1;
  int log_every = 10;
  double target_accuracy = -1.0;
  int max_seconds = 0;
  std::uint64_t seed = 0;

  /// Applies `key = value` lines (# comments allowed); throws ConfigError on
  /// unknown keys or malformed values.
  void apply_text(const std::string& text);
  void apply_line(const std::string& key, const std::string& value);
  void apply_file(const std::string& path);

  /// Resolved snapshot, one key per line, stable order.
  std::string to_text() const;

  // Derived objects.
  ModelConfig model_config() const;
  LossConfig loss_config() const;
  TrainOptions train_options() const;
  chem::MoleculeVocab molecule_vocab() const;

  static std::vector<std::string> preset_names();
  static Config preset(const std::string& name);
};

}  // namespace glav
