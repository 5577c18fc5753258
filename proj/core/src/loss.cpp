// SPDX-License-Identifier: Apache-2.0
#include "glav/loss.hpp"

#include <algorithm>
#include <cmath>

namespace glav {

using ad::Tape;
using ad::Var;

double focal_loss(double p_true, double gamma) {
  const double p = std::max(p_true, 1e-8);
  return -std::pow(1.0 - p, gamma) * std::log(p);
}

namespace {

constexpr double kLogProbFloor = -18.420680743952367;  // log(1e-8)

/// Per-row focal loss from selected logits rows and integer targets.
Var focal_column(Tape& t, Var logits, std::vector<int> targets, double gamma) {
  Var lp = t.pick_cols(t.log_softmax_rows(logits), std::move(targets));
  lp = t.clamp(lp, kLogProbFloor, 0.0);
  Var p = t.exp(lp);
  Var mod = t.pow_const(t.add_const(t.neg(p), 1.0), gamma);
  return t.mul(mod, t.neg(lp));
}

}  // namespace

NodeEdgeLossVars node_edge_losses(Tape& t, const GraphVae::DecoderState& dec,
                                  const GraphBatch& batch, const BatchIndex& ix,
                                  const LossConfig& cfg, RandomStream& rng) {
  NodeEdgeLossVars out;
  const int b_count = ix.b;

  // Nodes: all real rows, weighted for per-graph mean then batch mean.
  std::vector<int> node_rows;
  std::vector<int> node_targets;
  Vec node_w(0);
  {
    std::vector<double> weights;
    for (int b = 0; b < b_count; ++b) {
      for (int i = 0; i < ix.sizes[b]; ++i) {
        const int r = b * ix.n + i;
        node_rows.push_back(r);
        node_targets.push_back(batch.node_classes[r]);
        weights.push_back(1.0 / (static_cast<double>(ix.sizes[b]) * b_count));
      }
    }
    node_w = Eigen::Map<Vec>(weights.data(), static_cast<int>(weights.size()));
  }
  Var node_focal = focal_column(t, t.gather_rows(dec.node_logits, node_rows),
                                std::move(node_targets), cfg.gamma);
  out.node = t.sum_all(t.scale_rows(node_focal, node_w));

  // Edges: per graph, all real upper-triangle edges plus sampled negatives.
  std::vector<int> edge_rows;
  std::vector<int> edge_targets;
  std::vector<double> edge_weights;
  for (int b = 0; b < b_count; ++b) {
    const int n_b = ix.sizes[b];
    std::vector<int> positives, negatives;
    for (int i = 0; i < n_b; ++i) {
      for (int j = i + 1; j < n_b; ++j) {
        const int pr = (b * ix.n + i) * ix.n + j;
        if (batch.edge_classes[pr] != 0)
          positives.push_back(pr);
        else
          negatives.push_back(pr);
      }
    }
    const int n_e = static_cast<int>(positives.size());
    const int want = n_e > 0 ? static_cast<int>(std::llround(cfg.neg_ratio * n_e))
                             : static_cast<int>(std::llround(cfg.neg_ratio));
    const int take = std::min(want, static_cast<int>(negatives.size()));
    std::vector<int> chosen = rng.sample_without_replacement(static_cast<int>(negatives.size()), take);
    std::sort(chosen.begin(), chosen.end());

    const int set_size = n_e + take;
    out.n_real_edges += n_e;
    out.n_negative_sampled += take;
    if (set_size == 0) continue;
    const double w = 1.0 / (static_cast<double>(set_size) * b_count);
    for (int pr : positives) {
      edge_rows.push_back(pr);
      edge_targets.push_back(batch.edge_classes[pr]);
      edge_weights.push_back(w);
    }
    for (int idx : chosen) {
      edge_rows.push_back(negatives[idx]);
      edge_targets.push_back(0);
      edge_weights.push_back(w);
    }
  }
  if (edge_rows.empty()) {
    out.edge = t.constant(Mat::Zero(1, 1));
  } else {
    Vec w = Eigen::Map<Vec>(edge_weights.data(), static_cast<int>(edge_weights.size()));
    Var edge_focal = focal_column(t, t.gather_rows(dec.edge_logits, edge_rows),
                                  std::move(edge_targets), cfg.gamma);
    out.edge = t.sum_all(t.scale_rows(edge_focal, w));
  }

  // Charge / hydrogen heads on aromatic-annotated atoms.
  out.charge = t.constant(Mat::Zero(1, 1));
  out.hydrogen = t.constant(Mat::Zero(1, 1));
  if (dec.charge_logits && !batch.charge_targets.empty()) {
    std::vector<int> rows, charge_targets, hydrogen_targets;
    std::vector<double> weights;
    int graphs_with_aromatic = 0;
    std::vector<std::pair<int, int>> per_graph;  // (first index into rows, count)
    for (int b = 0; b < b_count; ++b) {
      const int first = static_cast<int>(rows.size());
      for (int i = 0; i < ix.sizes[b]; ++i) {
        const int r = b * ix.n + i;
        if (batch.charge_targets[r] >= 0) {
          rows.push_back(r);
          charge_targets.push_back(batch.charge_targets[r]);
          hydrogen_targets.push_back(batch.hydrogen_targets[r]);
        }
      }
      const int count = static_cast<int>(rows.size()) - first;
      if (count > 0) ++graphs_with_aromatic;
      per_graph.push_back({first, count});
    }
    if (!rows.empty()) {
      for (const auto& [first, count] : per_graph)
        for (int k = 0; k < count; ++k)
          weights.push_back(1.0 / (static_cast<double>(count) * graphs_with_aromatic));
      Vec w = Eigen::Map<Vec>(weights.data(), static_cast<int>(weights.size()));
      Var c_focal = focal_column(t, t.gather_rows(*dec.charge_logits, rows),
                                 std::move(charge_targets), cfg.gamma);
      Var h_focal = focal_column(t, t.gather_rows(*dec.hydrogen_logits, rows),
                                 std::move(hydrogen_targets), cfg.gamma);
      out.charge = t.sum_all(t.scale_rows(c_focal, w));
      out.hydrogen = t.sum_all(t.scale_rows(h_focal, w));
    }
  }
  return out;
}

Var size_loss(Tape& t, Var s_hat, Var s_true, double transition) {
  Var diff = t.sub(s_hat, s_true);
  return t.scale(t.sum_all(t.smooth_l1(diff, transition)), 1.0 / s_hat.rows());
}

Var kl_loss(Tape& t, const GraphVae::Latent& latent) {
  // -(1/2) * (1 + log sigma^2 - mu^2 - sigma^2)
  Var mu2 = t.mul(latent.mu, latent.mu);
  Var sigma2 = t.exp(latent.logvar);
  Var inner = t.sub(t.sub(t.add_const(latent.logvar, 1.0), mu2), sigma2);
  return t.scale(t.sum_all(inner), -0.5 / latent.mu.rows());
}

double beta_schedule(std::int64_t step, const LossConfig& cfg) {
  const double frac = std::min(static_cast<double>(step) / static_cast<double>(cfg.beta_cycle_steps), 1.0);
  return cfg.beta_max * std::sin(1.5707963267948966 * frac);
}

double lr_schedule(std::int64_t step, const LossConfig& cfg) {
  if (cfg.warmup_steps > 0 && step < cfg.warmup_steps)
    return cfg.lr_peak * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
  std::int64_t k = step - cfg.warmup_steps;
  std::int64_t pos = cfg.lr_cycle_steps > 0 ? k % cfg.lr_cycle_steps : 0;
  if (pos == 0 && k > 0) pos = cfg.lr_cycle_steps;  // cycle end hits lr_min before restarting
  const double frac = cfg.lr_cycle_steps > 0
                          ? static_cast<double>(pos) / static_cast<double>(cfg.lr_cycle_steps)
                          : 0.0;
  return cfg.lr_min + 0.5 * (cfg.lr_peak - cfg.lr_min) * (1.0 + std::cos(3.141592653589793 * frac));
}

}  // namespace glav
