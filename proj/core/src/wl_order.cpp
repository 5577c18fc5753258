// SPDX-License-Identifier: Apache-2.0
#include "glav/wl_order.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>

namespace glav {

namespace {

std::vector<int> bfs_distances(const Graph& g, int source) {
  const int n = g.size();
  std::vector<int> dist(n, n + 1);  // unreachable sentinel beyond any real distance
  std::queue<int> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int u = 0; u < n; ++u) {
      if (u != v && g.edge(v, u) != 0 && dist[u] > dist[v] + 1) {
        dist[u] = dist[v] + 1;
        q.push(u);
      }
    }
  }
  return dist;
}

}  // namespace

std::vector<int> wl_refine(const Graph& g, int rounds) {
  const int n = g.size();
  std::vector<int> labels = g.node_classes;
  for (int t = 0; t < rounds; ++t) {
    std::vector<std::pair<std::vector<int>, int>> signatures(n);
    for (int v = 0; v < n; ++v) {
      std::vector<int> sig;
      sig.push_back(labels[v]);
      std::vector<int> neigh;
      for (int u = 0; u < n; ++u)
        if (u != v && g.edge(v, u) != 0) neigh.push_back(labels[u]);
      std::sort(neigh.begin(), neigh.end());
      sig.insert(sig.end(), neigh.begin(), neigh.end());
      signatures[v] = {std::move(sig), v};
    }
    // Compress signatures to consecutive ids by lexicographic order.
    std::map<std::vector<int>, int> ids;
    for (const auto& [sig, v] : signatures) ids.emplace(sig, 0);
    int next = 0;
    for (auto& [sig, id] : ids) id = next++;
    for (const auto& [sig, v] : signatures) labels[v] = ids[sig];
  }
  return labels;
}

std::vector<int> wl_canonical_order(const Graph& g) {
  const int n = g.size();
  if (!g.coordinates) throw ArgumentError("wl_canonical_order: coordinates required");
  const Mat& coords = *g.coordinates;

  const std::vector<int> h3 = wl_refine(g, 3);
  std::vector<int> deg(n);
  for (int v = 0; v < n; ++v) deg[v] = g.degree(v);

  // Root: smallest (h3, deg, y, x).
  int root = 0;
  auto root_key = [&](int v) {
    return std::make_tuple(h3[v], deg[v], coords(v, 1), coords(v, 0));
  };
  for (int v = 1; v < n; ++v)
    if (root_key(v) < root_key(root)) root = v;

  const std::vector<int> d_r = bfs_distances(g, root);

  // Anchor: largest (d_r, deg, -h3); coordinates break remaining ties so the
  // choice is permutation-invariant.
  int anchor = 0;
  auto anchor_key = [&](int v) {
    return std::make_tuple(d_r[v], deg[v], -h3[v], coords(v, 1), coords(v, 0));
  };
  for (int v = 1; v < n; ++v)
    if (anchor_key(anchor) < anchor_key(v)) anchor = v;

  const std::vector<int> d_a = bfs_distances(g, anchor);

  std::vector<WLOrderKey> keys(n);
  for (int v = 0; v < n; ++v)
    keys[v] = WLOrderKey{h3[v], d_r[v], d_a[v], deg[v], coords(v, 1), coords(v, 0)};

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return keys[a] < keys[b]; });
  return perm;
}

Graph wl_canonicalize(const Graph& g) { return g.permuted(wl_canonical_order(g)); }

}  // namespace glav
