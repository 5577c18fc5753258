// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/graph.hpp"

namespace glav {

/// Exact graph edit distance under unit costs (node relabel/insert/delete,
/// edge relabel/insert/delete) by exhaustive search over node assignments.
/// Throws ScaleError beyond 8 nodes; use edit_distance_fast there.
int edit_distance_exact(const Graph& g1, const Graph& g2);

/// Upper bound on the exact edit distance: identity alignment refined by a
/// greedy local-swap pass. Equals the exact value whenever the identity
/// correspondence is optimal.
double edit_distance_fast(const Graph& g1, const Graph& g2);

}  // namespace glav
