// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/chem.hpp"
#include "glav/cma_es.hpp"
#include "glav/model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace glav {

/// Decodes the linear path (1-t) z1 + t z2 at `steps` points and drops
/// consecutive duplicates. `canonicalize` supplies the duplicate key for
/// molecule datasets; labeled-graph equality is used when absent.
std::vector<Graph> interpolate(GraphVae& model, const Vec& z1, const Vec& z2, int steps,
                               const std::function<std::string(const Graph&)>& canonicalize = {});

constexpr double kInvalidPenalty = -1e3;

/// Oracle logP; invalid or unparseable graphs score the fixed penalty.
double logp_objective(const Graph& g, chem::Oracle& oracle, const chem::MoleculeVocab& vocab);

struct TrajectoryEntry {
  Vec z;
  Graph graph;
  double objective = 0.0;
  int generation = 0;
};

struct OptimizationTrajectory {
  std::vector<TrajectoryEntry> best_so_far;  // objectives non-decreasing
  double start_objective = 0.0;
  double best_objective = 0.0;
  std::int64_t evaluations = 0;
  bool aborted = false;
  CmaesOptions options;
};

/// CMA-ES in latent space: each candidate decodes to a graph that the
/// objective scores. Deterministic given the seed in `opts`.
OptimizationTrajectory optimize_property(GraphVae& model, const Vec& z0,
                                         const std::function<double(const Graph&)>& objective,
                                         const CmaesOptions& opts);

}  // namespace glav
