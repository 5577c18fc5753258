// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/graph.hpp"

#include <vector>

namespace glav {

/// Padded, masked stack of graphs. All per-node tensors are padded to the
/// largest graph in the batch; padded slots hold the pad value (0) and carry
/// no meaning. Positional encodings and global features are precomputed here
/// so the model consumes one self-contained object.
struct GraphBatch {
  int batch_size = 0;
  int n_max = 0;
  int n_node_classes = 0;
  int n_edge_classes = 0;

  std::vector<int> node_classes;   // B*N_max, pad = 0
  std::vector<int> edge_classes;   // B*N_max*N_max, pad = 0
  std::vector<std::uint8_t> node_mask;  // B*N_max, 1 = real node
  Mat positional;                  // B*N_max x d_P
  Mat attributes;                  // B*N_max x d_k (zero when absent)
  Mat global_features;             // B x (n_c + n_e + 1)
  std::vector<int> sizes;          // per graph

  // Supervision targets for the molecule heads; -1 where not supervised.
  std::vector<int> charge_targets;    // B*N_max, charge + 1 in {0,1,2}
  std::vector<int> hydrogen_targets;  // B*N_max, in {0..3}

  int node_index(int b, int i) const { return b * n_max + i; }
  int pair_index(int b, int i, int j) const { return (b * n_max + i) * n_max + j; }

  bool is_real(int b, int i) const { return node_mask[node_index(b, i)] != 0; }

  /// Recovers graph b exactly (classes, edges, annotations when present).
  Graph unpad(int b) const;
};

struct BatchOptions {
  int k_lap = 8;
  int k_rw = 8;
  bool use_attributes = false;
  bool use_annotations = false;
  int attr_dim = 0;
};

/// Pads a non-empty list of graphs sharing one class vocabulary. No dummy
/// node class is introduced; masks mark the real nodes.
GraphBatch pad_batch(const std::vector<Graph>& graphs, int n_node_classes, int n_edge_classes,
                     const BatchOptions& opts);

}  // namespace glav
