// SPDX-License-Identifier: Apache-2.0
#include "glav/wl_order.hpp"

#include "glav/synthetic.hpp"

#include <doctest.h>

using namespace glav;

namespace {

std::vector<int> random_permutation(int n, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  return perm;
}

}  // namespace

TEST_CASE("hand-traced 3-node path") {
  // Path A-B-C, colors red(0) green(1) red(0), coords A=(0,0) B=(1,0) C=(2,1).
  Graph g(3);
  g.node_classes = {0, 1, 0};
  g.set_edge(0, 1, 1);
  g.set_edge(1, 2, 1);
  Mat coords(3, 2);
  coords << 0, 0, 1, 0, 2, 1;
  g.coordinates = coords;

  // Endpoints share the refined label; B is alone in its class.
  auto labels = wl_refine(g, 3);
  CHECK(labels[0] == labels[2]);
  CHECK(labels[0] != labels[1]);

  // Root must be A (ties on label/degree broken by y then x); anchor is C.
  auto perm = wl_canonical_order(g);
  CHECK(perm[0] == 0);        // A first
  CHECK(perm[1] == 2);        // C (other endpoint, label class before B's)
  CHECK(perm[2] == 1);        // B last
}

TEST_CASE("single node is the identity permutation") {
  Graph g(1);
  Mat coords(1, 2);
  coords << 0.5, 0.5;
  g.coordinates = coords;
  CHECK(wl_canonical_order(g) == std::vector<int>{0});
}

TEST_CASE("missing coordinates raise an ordering error") {
  Graph g(2);
  g.set_edge(0, 1, 1);
  CHECK_THROWS_AS(wl_canonical_order(g), ArgumentError);
}

TEST_CASE("canonicalized graphs agree across input permutations") {
  for (int trial = 0; trial < 50; ++trial) {
    Graph g = coloring_generate(3, 9, 1000 + trial, 1)[0];
    Graph canonical = wl_canonicalize(g);
    for (int p = 0; p < 5; ++p) {
      Graph pg = g.permuted(random_permutation(g.size(), 999 * trial + p));
      Graph canonical_p = wl_canonicalize(pg);
      CHECK(canonical == canonical_p);
      REQUIRE(canonical_p.coordinates.has_value());
      CHECK((*canonical.coordinates - *canonical_p.coordinates).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("wl_refine distinguishes local topology within three hops") {
  // 6-path with uniform colors: ends, next-to-ends, and middles all differ
  // after three rounds.
  Graph g(6);
  for (int i = 0; i + 1 < 6; ++i) g.set_edge(i, i + 1, 1);
  auto labels = wl_refine(g, 3);
  CHECK(labels[0] == labels[5]);
  CHECK(labels[1] == labels[4]);
  CHECK(labels[2] == labels[3]);
  CHECK(labels[0] != labels[1]);
  CHECK(labels[1] != labels[2]);
}
