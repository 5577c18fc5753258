// SPDX-License-Identifier: Apache-2.0
#include "glav/edit_distance.hpp"

#include "glav/synthetic.hpp"

#include <doctest.h>

using namespace glav;

namespace {

Graph triangle() {
  Graph g(3);
  g.node_classes = {0, 1, 2};
  g.set_edge(0, 1, 1);
  g.set_edge(1, 2, 1);
  g.set_edge(0, 2, 1);
  return g;
}

Graph three_path() {
  Graph g(3);
  g.node_classes = {0, 1, 2};
  g.set_edge(0, 1, 1);
  g.set_edge(1, 2, 1);
  return g;
}

Graph random_graph(std::uint64_t seed, int n, int n_classes = 3, int e_classes = 3) {
  RandomStream rng(seed);
  Graph g(n);
  for (int i = 0; i < n; ++i) g.node_classes[i] = static_cast<int>(rng.uniform_index(n_classes));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(0.45)) g.set_edge(i, j, rng.uniform_int(1, e_classes - 1));
  return g;
}

}  // namespace

TEST_CASE("identity distance is zero") {
  Graph g = random_graph(1, 5);
  CHECK(edit_distance_exact(g, g) == 0);
  CHECK(edit_distance_fast(g, g) == 0.0);
}

TEST_CASE("single node relabel costs one") {
  Graph g = random_graph(2, 5);
  Graph h = g;
  h.node_classes[2] = (h.node_classes[2] + 1) % 3;
  CHECK(edit_distance_exact(g, h) == 1);
  CHECK(edit_distance_fast(g, h) == 1.0);
}

TEST_CASE("single edge-class flip costs one") {
  Graph g = triangle();
  Graph h = g;
  h.set_edge(0, 1, 2);
  CHECK(edit_distance_exact(g, h) == 1);
  CHECK(edit_distance_fast(g, h) == 1.0);
}

TEST_CASE("triangle vs path differs by one edge deletion") {
  CHECK(edit_distance_exact(triangle(), three_path()) == 1);
}

TEST_CASE("distance is symmetric and positive for distinct graphs") {
  for (int trial = 0; trial < 20; ++trial) {
    Graph a = random_graph(100 + trial, 4 + trial % 3);
    Graph b = random_graph(200 + trial, 4 + (trial + 1) % 3);
    const int ab = edit_distance_exact(a, b);
    const int ba = edit_distance_exact(b, a);
    CHECK(ab == ba);
    if (!(a == b)) CHECK(ab >= 0);
  }
}

TEST_CASE("size difference forces at least the insertion count") {
  Graph small = random_graph(7, 3);
  Graph large = random_graph(8, 6);
  CHECK(edit_distance_exact(small, large) >= 3);
}

TEST_CASE("fast distance upper-bounds the exact oracle") {
  for (int trial = 0; trial < 60; ++trial) {
    Graph a = random_graph(300 + trial, 3 + trial % 4);
    Graph b = random_graph(400 + trial, 3 + (trial * 7) % 4);
    const double fast = edit_distance_fast(a, b);
    const int exact = edit_distance_exact(a, b);
    CHECK(fast >= static_cast<double>(exact));
  }
}

TEST_CASE("oracle is capped at eight nodes") {
  Graph big = random_graph(5, 9);
  CHECK_THROWS_AS(edit_distance_exact(big, big), ScaleError);
  CHECK(edit_distance_fast(big, big) == 0.0);  // no cap on the bound
}
