// SPDX-License-Identifier: Apache-2.0
#include "glav/edit_distance.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace glav {

namespace {

/// Edit cost of mapping node i of `small` to node image[i] of `large`.
/// image is injective; unmatched nodes of `large` are insertions.
int assignment_cost(const Graph& small, const Graph& large, const std::vector<int>& image) {
  const int na = small.size();
  const int nb = large.size();
  int cost = nb - na;  // node insertions
  std::vector<char> in_image(nb, 0);
  for (int i = 0; i < na; ++i) in_image[image[i]] = 1;
  for (int i = 0; i < na; ++i)
    if (small.node_classes[i] != large.node_classes[image[i]]) ++cost;
  for (int i = 0; i < na; ++i)
    for (int j = i + 1; j < na; ++j)
      if (small.edge(i, j) != large.edge(image[i], image[j])) ++cost;
  // Edges of `large` touching an unmatched node must all be inserted.
  for (int u = 0; u < nb; ++u)
    for (int v = u + 1; v < nb; ++v)
      if (large.edge(u, v) != 0 && (!in_image[u] || !in_image[v])) ++cost;
  return cost;
}

}  // namespace

int edit_distance_exact(const Graph& g1, const Graph& g2) {
  const Graph& small = g1.size() <= g2.size() ? g1 : g2;
  const Graph& large = g1.size() <= g2.size() ? g2 : g1;
  if (large.size() > 8)
    throw ScaleError("edit_distance_exact: graphs above 8 nodes; use edit_distance_fast");
  const int na = small.size();
  const int nb = large.size();
  std::vector<int> perm(nb);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> image(na);
  int best = INT32_MAX;
  do {
    std::copy(perm.begin(), perm.begin() + na, image.begin());
    best = std::min(best, assignment_cost(small, large, image));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double edit_distance_fast(const Graph& g1, const Graph& g2) {
  const Graph& small = g1.size() <= g2.size() ? g1 : g2;
  const Graph& large = g1.size() <= g2.size() ? g2 : g1;
  const int na = small.size();
  const int nb = large.size();

  std::vector<int> slots(nb);  // slots[i] for i < na is the image of small node i
  std::iota(slots.begin(), slots.end(), 0);
  std::vector<int> image(slots.begin(), slots.begin() + na);
  int cost = assignment_cost(small, large, image);

  bool improved = cost > 0;
  while (improved) {
    improved = false;
    for (int i = 0; i < na && cost > 0; ++i) {
      for (int j = i + 1; j < nb; ++j) {
        std::swap(slots[i], slots[j]);
        std::copy(slots.begin(), slots.begin() + na, image.begin());
        const int c = assignment_cost(small, large, image);
        if (c < cost) {
          cost = c;
          improved = true;
        } else {
          std::swap(slots[i], slots[j]);
        }
      }
    }
  }
  return static_cast<double>(cost);
}

}  // namespace glav
