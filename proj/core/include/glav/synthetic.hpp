// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/chem.hpp"
#include "glav/graph.hpp"

#include <vector>

namespace glav {

constexpr int kColoringClasses = 4;   // node classes (colors)
constexpr int kColoringEdgeClasses = 2;  // no-edge, edge

/// Desk-scale stand-in for the COLORING dataset: connected graphs with a
/// proper 4-coloring, pairwise-distinct 2-D coordinates, deterministic per
/// seed.
std::vector<Graph> coloring_generate(int n_min, int n_max, std::uint64_t seed, int count);

constexpr int kBnNodes = 8;
constexpr int kBnNodeClasses = 8;     // one class per network variable
constexpr int kBnEdgeClasses = 3;     // no-edge, low->high, high->low

/// Desk-scale 8-node directed-acyclic-network stand-in. Node i always carries
/// class i; edges are random DAG edges whose orientation relative to the index
/// order selects the edge class.
std::vector<Graph> bn_generate(std::uint64_t seed, int count);

/// Deterministic structural score for a bn_generate graph, shipped as the
/// "given label" for the downstream regression task.
double bn_score(const Graph& g);

struct MoleculeGenOptions {
  int min_atoms = 4;
  int max_atoms = 9;
  double ring_prob = 0.45;      // chance to attempt one ring closure
  double aromatic_prob = 0.35;  // chance to plant a benzene-like ring
  double multibond_prob = 0.3;  // chance to upgrade eligible bonds
};

/// Desk-scale stand-in for a QM9-like molecule set: valence-respecting graphs
/// over the given vocabulary, deterministic per seed, all valid under the
/// built-in oracle.
std::vector<Graph> molecule_generate(const chem::MoleculeVocab& vocab, std::uint64_t seed,
                                     int count, const MoleculeGenOptions& opts = {});

}  // namespace glav
