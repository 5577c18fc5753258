// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/chem.hpp"
#include "glav/model.hpp"

#include <map>
#include <unordered_set>
#include <vector>

namespace glav {

struct ReconstructionReport {
  double exact_accuracy = 0.0;
  double mean_edit_distance = 0.0;
  std::size_t count = 0;
  std::map<int, std::pair<int, int>> per_size;  // size -> (total, exact)
};

/// Encode with z_mu (no sampling), decode, and score the strict exact-match
/// criterion plus the fast edit distance.
ReconstructionReport reconstruction_eval(GraphVae& model, const std::vector<Graph>& graphs,
                                         int batch_size = 64);

struct GenerationReport {
  double validity_mean = 0.0, validity_std = 0.0;
  double uniqueness_mean = 0.0, uniqueness_std = 0.0;
  double novelty_mean = 0.0, novelty_std = 0.0;
  bool oracle_validity = true;  // false when only structural checks ran
};

std::unordered_set<std::string> build_canonical_index(chem::Oracle& oracle,
                                                      const chem::MoleculeVocab& vocab,
                                                      const std::vector<Graph>& graphs);

/// Samples z ~ N(0, I), decodes, and reports validity / uniqueness (among
/// valid) / novelty (among unique) percentages, mean +- std over batches.
GenerationReport generation_eval(GraphVae& model, chem::Oracle& oracle,
                                 const chem::MoleculeVocab& vocab, int n_batches, int batch_size,
                                 const std::unordered_set<std::string>& train_index,
                                 std::uint64_t seed);

/// Uniform label noise: `node_edits` distinct nodes get a different class,
/// `edge_edits` distinct unordered pairs get a different edge class (which may
/// create or delete edges).
Graph apply_noise(const Graph& g, int node_edits, int edge_edits, int n_node_classes,
                  int n_edge_classes, RandomStream& rng);

struct DenoiseGrid {
  Mat pre;   // validity fraction after noising, rows = node edits 0..A
  Mat post;  // validity fraction after the model round-trip
};

DenoiseGrid denoise_eval(GraphVae& model, chem::Oracle& oracle, const chem::MoleculeVocab& vocab,
                         const std::vector<Graph>& graphs, int max_node_edits, int max_edge_edits,
                         std::uint64_t seed);

struct RegressionReport {
  double mse_mean = 0.0, mse_std = 0.0;
  double rmse_mean = 0.0, rmse_std = 0.0;
  double pearson_mean = 0.0, pearson_std = 0.0;
  int k_folds = 0;
};

/// k-fold MLP regression on frozen latents with standardized targets.
RegressionReport downstream_regression(const Mat& latents, const Vec& targets, int k_folds,
                                       std::uint64_t seed);

double pearson_correlation(const Vec& a, const Vec& b);

}  // namespace glav
