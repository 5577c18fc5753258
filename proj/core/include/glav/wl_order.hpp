// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/graph.hpp"

#include <vector>

namespace glav {

/// Per-node sort key for the deterministic WL-based order: refined label after
/// three rounds, hop distance from the root, hop distance from the anchor,
/// degree, then the node's coordinates (y before x).
struct WLOrderKey {
  int refined_label = 0;
  int dist_root = 0;
  int dist_anchor = 0;
  int degree = 0;
  double y = 0.0;
  double x = 0.0;

  friend bool operator<(const WLOrderKey& a, const WLOrderKey& b) {
    if (a.refined_label != b.refined_label) return a.refined_label < b.refined_label;
    if (a.dist_root != b.dist_root) return a.dist_root < b.dist_root;
    if (a.dist_anchor != b.dist_anchor) return a.dist_anchor < b.dist_anchor;
    if (a.degree != b.degree) return a.degree < b.degree;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  }
};

/// 1-WL refinement: labels start from node classes and are re-compressed to
/// consecutive ids for `rounds` iterations of (label, sorted neighbor labels)
/// signatures.
std::vector<int> wl_refine(const Graph& g, int rounds);

/// Deterministic WL-based node order. Requires coordinates (pairwise distinct
/// for a total order). Returns perm such that position k of the canonical
/// graph is node perm[k] of g, i.e. g.permuted(perm) is canonical.
std::vector<int> wl_canonical_order(const Graph& g);

/// Convenience: g reordered into its canonical form.
Graph wl_canonicalize(const Graph& g);

}  // namespace glav
