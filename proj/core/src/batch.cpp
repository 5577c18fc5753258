// SPDX-License-Identifier: Apache-2.0
#include "glav/batch.hpp"

#include "glav/positional.hpp"

#include <algorithm>

namespace glav {

Graph GraphBatch::unpad(int b) const {
  const int n = sizes[b];
  Graph g(n);
  for (int i = 0; i < n; ++i) g.node_classes[i] = node_classes[node_index(b, i)];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g.edge_classes[static_cast<std::size_t>(i) * n + j] = edge_classes[pair_index(b, i, j)];
  if (!charge_targets.empty()) {
    bool any = false;
    for (int i = 0; i < n; ++i)
      if (charge_targets[node_index(b, i)] >= 0) any = true;
    if (any) {
      g.aromatic_annotations.resize(n);
      for (int i = 0; i < n; ++i) {
        const int c = charge_targets[node_index(b, i)];
        if (c >= 0)
          g.aromatic_annotations[i] =
              AromaticAnnotation{c - 1, hydrogen_targets[node_index(b, i)]};
      }
    }
  }
  return g;
}

GraphBatch pad_batch(const std::vector<Graph>& graphs, int n_node_classes, int n_edge_classes,
                     const BatchOptions& opts) {
  if (graphs.empty()) throw ArgumentError("pad_batch: empty graph list");
  GraphBatch b;
  b.batch_size = static_cast<int>(graphs.size());
  b.n_node_classes = n_node_classes;
  b.n_edge_classes = n_edge_classes;
  b.n_max = 0;
  for (const auto& g : graphs) b.n_max = std::max(b.n_max, g.size());

  const int bn = b.batch_size * b.n_max;
  b.node_classes.assign(bn, 0);
  b.edge_classes.assign(static_cast<std::size_t>(bn) * b.n_max, 0);
  b.node_mask.assign(bn, 0);
  const int d_p = opts.k_lap + opts.k_rw;
  b.positional = Mat::Zero(bn, d_p);
  b.attributes = Mat::Zero(bn, std::max(1, opts.attr_dim));
  b.global_features = Mat::Zero(b.batch_size, n_node_classes + n_edge_classes + 1);
  b.sizes.resize(b.batch_size);
  if (opts.use_annotations) {
    b.charge_targets.assign(bn, -1);
    b.hydrogen_targets.assign(bn, -1);
  }

  for (int gi = 0; gi < b.batch_size; ++gi) {
    const Graph& g = graphs[gi];
    g.validate(n_node_classes, n_edge_classes);
    const int n = g.size();
    b.sizes[gi] = n;
    for (int i = 0; i < n; ++i) {
      b.node_classes[b.node_index(gi, i)] = g.node_classes[i];
      b.node_mask[b.node_index(gi, i)] = 1;
      for (int j = 0; j < n; ++j) b.edge_classes[b.pair_index(gi, i, j)] = g.edge(i, j);
    }
    Mat pe = positional_encodings(g, opts.k_lap, opts.k_rw);
    for (int i = 0; i < n; ++i) b.positional.row(b.node_index(gi, i)) = pe.row(i);
    if (opts.use_attributes && g.node_attributes) {
      if (g.node_attributes->cols() != opts.attr_dim)
        throw ArgumentError("pad_batch: attribute dimension mismatch");
      for (int i = 0; i < n; ++i) b.attributes.row(b.node_index(gi, i)) = g.node_attributes->row(i);
    }
    b.global_features.row(gi) = compute_global_features(g, n_node_classes, n_edge_classes).transpose();
    if (opts.use_annotations && g.has_annotations()) {
      for (int i = 0; i < n; ++i) {
        if (g.aromatic_annotations[i]) {
          b.charge_targets[b.node_index(gi, i)] = g.aromatic_annotations[i]->formal_charge + 1;
          b.hydrogen_targets[b.node_index(gi, i)] = g.aromatic_annotations[i]->hydrogen_count;
        }
      }
    }
  }
  return b;
}

}  // namespace glav
