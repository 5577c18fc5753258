// SPDX-License-Identifier: Apache-2.0
#include "glav/graph.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>

namespace glav {

using nlohmann::json;

Graph Graph::permuted(const std::vector<int>& perm) const {
  const int n = size();
  if (static_cast<int>(perm.size()) != n) throw ArgumentError("permuted: permutation size mismatch");
  Graph out(n);
  for (int i = 0; i < n; ++i) out.node_classes[i] = node_classes[perm[i]];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.edge_classes[static_cast<std::size_t>(i) * n + j] =
          edge_classes[static_cast<std::size_t>(perm[i]) * n + perm[j]];
  if (node_attributes) {
    Mat a(n, node_attributes->cols());
    for (int i = 0; i < n; ++i) a.row(i) = node_attributes->row(perm[i]);
    out.node_attributes = a;
  }
  if (coordinates) {
    Mat c(n, 2);
    for (int i = 0; i < n; ++i) c.row(i) = coordinates->row(perm[i]);
    out.coordinates = c;
  }
  if (has_annotations()) {
    out.aromatic_annotations.resize(n);
    for (int i = 0; i < n; ++i) out.aromatic_annotations[i] = aromatic_annotations[perm[i]];
  }
  return out;
}

bool Graph::operator==(const Graph& other) const {
  if (node_classes != other.node_classes) return false;
  if (edge_classes != other.edge_classes) return false;
  if (has_annotations() != other.has_annotations()) return false;
  if (has_annotations()) {
    for (int i = 0; i < size(); ++i)
      if (aromatic_annotations[i] != other.aromatic_annotations[i]) return false;
  }
  return true;
}

void Graph::validate(int n_node_classes, int n_edge_classes) const {
  const int n = size();
  if (n < 1) throw ArgumentError("Graph: N must be >= 1");
  if (edge_classes.size() != static_cast<std::size_t>(n) * n)
    throw ArgumentError("Graph: edge matrix shape mismatch");
  for (int c : node_classes)
    if (c < 0 || c >= n_node_classes) throw ArgumentError("Graph: node class id out of range");
  for (int i = 0; i < n; ++i) {
    if (edge(i, i) != 0) throw ArgumentError("Graph: diagonal must be no-edge");
    for (int j = 0; j < n; ++j) {
      const int e = edge(i, j);
      if (e < 0 || e >= n_edge_classes) throw ArgumentError("Graph: edge class id out of range");
      if (e != edge(j, i)) throw ArgumentError("Graph: edge matrix must be symmetric");
    }
  }
  if (has_annotations() && static_cast<int>(aromatic_annotations.size()) != n)
    throw ArgumentError("Graph: annotation length mismatch");
}

Vec compute_global_features(const Graph& g, int n_node_classes, int n_edge_classes) {
  g.validate(n_node_classes, n_edge_classes);
  Vec y = Vec::Zero(n_node_classes + n_edge_classes + 1);
  for (int c : g.node_classes) y[c] += 1.0;
  const int n = g.size();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) y[n_node_classes + g.edge(i, j)] += 1.0;
  y[n_node_classes + n_edge_classes] = static_cast<double>(n);
  return y;
}

std::string to_record(const Graph& g) {
  json rec;
  rec["n"] = g.size();
  rec["nodes"] = g.node_classes;
  json edges = json::array();
  for (int i = 0; i < g.size(); ++i)
    for (int j = i + 1; j < g.size(); ++j)
      if (g.edge(i, j) != 0) edges.push_back({i, j, g.edge(i, j)});
  rec["edges"] = edges;
  if (g.coordinates) {
    json coords = json::array();
    for (int i = 0; i < g.size(); ++i) coords.push_back({(*g.coordinates)(i, 0), (*g.coordinates)(i, 1)});
    rec["coords"] = coords;
  }
  if (g.node_attributes) {
    json attrs = json::array();
    for (int i = 0; i < g.size(); ++i) {
      json row = json::array();
      for (int k = 0; k < g.node_attributes->cols(); ++k) row.push_back((*g.node_attributes)(i, k));
      attrs.push_back(row);
    }
    rec["attrs"] = attrs;
  }
  if (g.has_annotations()) {
    json arom = json::array(), charge = json::array(), hcount = json::array();
    for (int i = 0; i < g.size(); ++i) {
      const auto& a = g.aromatic_annotations[i];
      arom.push_back(a ? 1 : 0);
      charge.push_back(a ? a->formal_charge : 0);
      hcount.push_back(a ? a->hydrogen_count : 0);
    }
    rec["aromatic"] = arom;
    rec["charge"] = charge;
    rec["hcount"] = hcount;
  }
  return rec.dump();
}

Graph from_record(const std::string& line) {
  json rec;
  try {
    rec = json::parse(line);
  } catch (const json::exception& e) {
    throw IngestError(std::string("bad graph record: ") + e.what());
  }
  const int n = rec.at("n").get<int>();
  if (n < 1) throw IngestError("graph record: n must be >= 1");
  Graph g(n);
  g.node_classes = rec.at("nodes").get<std::vector<int>>();
  if (static_cast<int>(g.node_classes.size()) != n) throw IngestError("graph record: nodes length mismatch");
  for (const auto& e : rec.at("edges")) {
    const int i = e.at(0).get<int>(), j = e.at(1).get<int>(), c = e.at(2).get<int>();
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw IngestError("graph record: bad edge endpoints");
    g.set_edge(i, j, c);
  }
  if (rec.contains("coords")) {
    Mat coords(n, 2);
    const auto& cj = rec["coords"];
    if (static_cast<int>(cj.size()) != n) throw IngestError("graph record: coords length mismatch");
    for (int i = 0; i < n; ++i) {
      coords(i, 0) = cj[i].at(0).get<double>();
      coords(i, 1) = cj[i].at(1).get<double>();
    }
    g.coordinates = coords;
  }
  if (rec.contains("attrs")) {
    const auto& aj = rec["attrs"];
    if (static_cast<int>(aj.size()) != n) throw IngestError("graph record: attrs length mismatch");
    const int d = static_cast<int>(aj[0].size());
    Mat attrs(n, d);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < d; ++k) attrs(i, k) = aj[i].at(k).get<double>();
    g.node_attributes = attrs;
  }
  if (rec.contains("aromatic")) {
    const auto& arom = rec["aromatic"];
    const auto& charge = rec.at("charge");
    const auto& hcount = rec.at("hcount");
    g.aromatic_annotations.resize(n);
    for (int i = 0; i < n; ++i) {
      if (arom[i].get<int>() != 0)
        g.aromatic_annotations[i] = AromaticAnnotation{charge[i].get<int>(), hcount[i].get<int>()};
    }
  }
  return g;
}

void write_dataset(const std::string& path, const std::vector<Graph>& graphs) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot open for writing: " + path);
  for (const auto& g : graphs) out << to_record(g) << '\n';
}

std::vector<Graph> read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open dataset: " + path);
  std::vector<Graph> graphs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    graphs.push_back(from_record(line));
  }
  return graphs;
}

DatasetStats dataset_stats(const std::vector<Graph>& graphs) {
  DatasetStats s;
  s.count = graphs.size();
  std::set<int> classes;
  for (const auto& g : graphs) {
    s.avg_nodes += g.size();
    s.avg_edges += g.num_edges();
    s.max_size = std::max(s.max_size, g.size());
    for (int c : g.node_classes) classes.insert(c);
  }
  if (!graphs.empty()) {
    s.avg_nodes /= static_cast<double>(graphs.size());
    s.avg_edges /= static_cast<double>(graphs.size());
  }
  s.node_types = static_cast<int>(classes.size());
  return s;
}

}  // namespace glav
