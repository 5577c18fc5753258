// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/model.hpp"

#include <cstdint>

namespace glav {

struct LossConfig {
  double gamma = 2.0;          // focal exponent
  double neg_ratio = 4.0;      // r: sampled no-edge pairs per real edge
  double edge_weight = 1.25;   // eta
  double beta_max = 1e-4;      // KL weight plateau
  std::int64_t beta_cycle_steps = 1;
  std::int64_t lr_cycle_steps = 1;
  std::int64_t warmup_steps = 0;
  double lr_peak = 1e-4;
  double lr_min = 1e-6;
  double smooth_l1_beta = 1.0;
  double charge_weight = 1.0;
  double hydrogen_weight = 1.0;

  void validate() const {
    if (gamma < 0.0 || neg_ratio <= 0.0 || edge_weight <= 0.0 || beta_max < 0.0)
      throw ConfigError("loss configuration out of range");
  }
};

struct LossReport {
  double node_loss = 0.0;  // includes charge/hydrogen terms in molecule mode
  double edge_loss = 0.0;
  double size_loss = 0.0;
  double kl_loss = 0.0;
  double total = 0.0;
  double charge_loss = 0.0;
  double hydrogen_loss = 0.0;
  double beta = 0.0;
  int n_negative_sampled = 0;
  int n_real_edges = 0;
};

/// -(1 - p)^gamma * log(p) with p clamped below at 1e-8. gamma = 0 recovers
/// plain cross-entropy.
double focal_loss(double p_true, double gamma);

struct NodeEdgeLossVars {
  ad::Var node;  // 1x1, focal over real nodes (per-graph mean, batch mean)
  ad::Var edge;  // 1x1, focal over real + sampled no-edge pairs
  ad::Var charge;    // 1x1; zero when unsupervised
  ad::Var hydrogen;  // 1x1
  int n_negative_sampled = 0;
  int n_real_edges = 0;
};

/// Assembles the classification losses. Negative pairs are drawn uniformly
/// without replacement from the unmasked upper-triangle no-edge pairs of each
/// graph: min(round(r * N_e), available), or min(round(r), available) for
/// edgeless graphs.
NodeEdgeLossVars node_edge_losses(ad::Tape& t, const GraphVae::DecoderState& dec,
                                  const GraphBatch& batch, const BatchIndex& ix,
                                  const LossConfig& cfg, RandomStream& rng);

/// Smooth-L1 between predicted and true log-sizes, batch mean.
ad::Var size_loss(ad::Tape& t, ad::Var s_hat, ad::Var s_true, double transition);

/// -1/2 sum(1 + log sigma^2 - mu^2 - sigma^2), summed over dims, batch mean.
ad::Var kl_loss(ad::Tape& t, const GraphVae::Latent& latent);

/// Half-sine warmup to beta_max over beta_cycle_steps, constant after.
double beta_schedule(std::int64_t step, const LossConfig& cfg);

/// Linear warmup to lr_peak, then cosine decay to lr_min over lr_cycle_steps
/// with restarts.
double lr_schedule(std::int64_t step, const LossConfig& cfg);

}  // namespace glav
