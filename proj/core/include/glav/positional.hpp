// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/graph.hpp"

namespace glav {

/// Eigenvectors of the symmetric normalized Laplacian for the k_lap smallest
/// nonzero eigenvalues, one column each, zero-padded when the graph has fewer.
/// Zero eigenvalues (one per connected component) are skipped. Each column is
/// sign-fixed: the entry of largest magnitude (lowest index on ties) is made
/// positive.
Mat laplacian_pe(const Graph& g, int k_lap);

/// Column t (1-based) holds the diagonal of (D^-1 A)^t, i.e. the probability
/// of a t-step random walk returning to its start. Isolated nodes get zeros.
Mat random_walk_pe(const Graph& g, int k_rw);

/// laplacian_pe and random_walk_pe concatenated, N x (k_lap + k_rw).
Mat positional_encodings(const Graph& g, int k_lap, int k_rw);

}  // namespace glav
