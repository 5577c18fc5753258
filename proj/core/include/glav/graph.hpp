// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace glav {

/// Per-node annotation carried by aromatic atoms in molecule datasets.
struct AromaticAnnotation {
  int formal_charge = 0;
  int hydrogen_count = 0;
  bool operator==(const AromaticAnnotation&) const = default;
};

/// One attributed graph. Edge class 0 always means "no edge"; the matrix is
/// symmetric with a no-edge diagonal.
struct Graph {
  std::vector<int> node_classes;                      // length N
  std::vector<int> edge_classes;                      // N*N, row-major, symmetric
  std::optional<Mat> node_attributes;                 // N x d_k
  std::optional<Mat> coordinates;                     // N x 2
  std::vector<std::optional<AromaticAnnotation>> aromatic_annotations;  // empty or length N

  Graph() = default;
  explicit Graph(int n) : node_classes(n, 0), edge_classes(static_cast<std::size_t>(n) * n, 0) {}

  int size() const { return static_cast<int>(node_classes.size()); }

  int edge(int i, int j) const { return edge_classes[static_cast<std::size_t>(i) * size() + j]; }

  void set_edge(int i, int j, int cls) {
    edge_classes[static_cast<std::size_t>(i) * size() + j] = cls;
    edge_classes[static_cast<std::size_t>(j) * size() + i] = cls;
  }

  bool has_annotations() const { return !aromatic_annotations.empty(); }

  int degree(int i) const {
    int d = 0;
    for (int j = 0; j < size(); ++j)
      if (j != i && edge(i, j) != 0) ++d;
    return d;
  }

  int num_edges() const {
    int m = 0;
    for (int i = 0; i < size(); ++i)
      for (int j = i + 1; j < size(); ++j)
        if (edge(i, j) != 0) ++m;
    return m;
  }

  /// Relabels nodes so that node i of the result is node perm[i] of *this.
  Graph permuted(const std::vector<int>& perm) const;

  /// Structural + label equality in the given node order.
  bool operator==(const Graph& other) const;

  /// Throws ArgumentError on any violated invariant (asymmetry, diagonal edge,
  /// class id out of range, empty graph).
  void validate(int n_node_classes, int n_edge_classes) const;
};

/// d_y = n_c + n_e + 1: per-class node counts, per-class unordered pair counts
/// (class 0 = no-edge pairs), then the graph size.
Vec compute_global_features(const Graph& g, int n_node_classes, int n_edge_classes);

/// --- Graph record format ---------------------------------------------------
/// One JSON object per line:
///   {"n":3,"nodes":[0,1,0],"edges":[[0,1,1],[1,2,2]],
///    "coords":[[x,y],...], "attrs":[[...],...],
///    "charge":[0,...], "hcount":[1,...], "aromatic":[0,1,...]}
/// Only non-empty optional fields are written. "edges" lists i<j pairs with
/// nonzero class.
std::string to_record(const Graph& g);
Graph from_record(const std::string& line);

void write_dataset(const std::string& path, const std::vector<Graph>& graphs);
std::vector<Graph> read_dataset(const std::string& path);

/// Appendix-style dataset summary used by the `stats` subcommand.
struct DatasetStats {
  std::size_t count = 0;
  double avg_nodes = 0.0;
  double avg_edges = 0.0;
  int max_size = 0;
  int node_types = 0;  // distinct node classes observed
};
DatasetStats dataset_stats(const std::vector<Graph>& graphs);

}  // namespace glav
