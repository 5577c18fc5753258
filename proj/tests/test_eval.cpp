// SPDX-License-Identifier: Apache-2.0
#include "glav/eval.hpp"

#include "glav/synthetic.hpp"

#include <doctest.h>

using namespace glav;

namespace {

ModelConfig mol_config() {
  ModelConfig cfg;
  auto vocab = chem::MoleculeVocab::qm9(true);
  cfg.n_node_classes = vocab.n_node_classes();
  cfg.n_edge_classes = vocab.n_edge_classes();
  cfg.molecule_heads = true;
  cfg.input_size = 16;
  cfg.hidden_size = 16;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.latent_dim = 12;
  cfg.d_s = 4;
  cfg.k_lap = 0;
  cfg.k_rw = 4;
  return cfg;
}

}  // namespace

TEST_CASE("apply_noise edits exactly the requested positions") {
  auto graphs = coloring_generate(5, 9, 3, 10);
  RandomStream rng(4);
  for (const auto& g : graphs) {
    Graph same = apply_noise(g, 0, 0, 4, 2, rng);
    CHECK(same == g);

    Graph noisy = apply_noise(g, 2, 3, 4, 2, rng);
    int node_diffs = 0;
    for (int i = 0; i < g.size(); ++i)
      if (noisy.node_classes[i] != g.node_classes[i]) ++node_diffs;
    CHECK(node_diffs == 2);
    int edge_diffs = 0;
    for (int i = 0; i < g.size(); ++i)
      for (int j = i + 1; j < g.size(); ++j)
        if (noisy.edge(i, j) != g.edge(i, j)) ++edge_diffs;
    CHECK(edge_diffs == 3);
    noisy.validate(4, 2);
  }
  // Requests beyond the available positions are capped.
  Graph tiny(2);
  tiny.node_classes = {0, 1};
  Graph capped = apply_noise(tiny, 10, 10, 4, 2, rng);
  capped.validate(4, 2);
}

TEST_CASE("noise is deterministic per seed") {
  Graph g = coloring_generate(6, 9, 8, 1)[0];
  RandomStream r1(99), r2(99);
  CHECK(apply_noise(g, 3, 3, 4, 2, r1) == apply_noise(g, 3, 3, 4, 2, r2));
}

TEST_CASE("reconstruction report arithmetic") {
  // An untrained model reconstructs essentially nothing; the report must
  // still be consistent.
  GraphVae model(mol_config(), 5);
  auto vocab = chem::MoleculeVocab::qm9(true);
  auto graphs = molecule_generate(vocab, 17, 12);
  auto report = reconstruction_eval(model, graphs, 4);
  CHECK(report.count == graphs.size());
  CHECK(report.exact_accuracy >= 0.0);
  CHECK(report.exact_accuracy <= 1.0);
  if (report.exact_accuracy == 1.0) CHECK(report.mean_edit_distance == 0.0);
  int total = 0;
  for (const auto& [size, counts] : report.per_size) total += counts.first;
  CHECK(total == static_cast<int>(graphs.size()));
}

TEST_CASE("generation report stays in range and is deterministic") {
  GraphVae model(mol_config(), 6);
  auto vocab = chem::MoleculeVocab::qm9(true);
  chem::BuiltinOracle oracle;
  auto train_index = build_canonical_index(oracle, vocab, molecule_generate(vocab, 18, 20));
  auto r1 = generation_eval(model, oracle, vocab, 3, 16, train_index, 7);
  auto r2 = generation_eval(model, oracle, vocab, 3, 16, train_index, 7);
  for (auto* r : {&r1, &r2}) {
    CHECK(r->validity_mean >= 0.0);
    CHECK(r->validity_mean <= 100.0);
    CHECK(r->uniqueness_mean <= 100.0);
    CHECK(r->novelty_mean <= 100.0);
  }
  CHECK(r1.validity_mean == r2.validity_mean);
  CHECK(r1.uniqueness_mean == r2.uniqueness_mean);
  CHECK(r1.novelty_mean == r2.novelty_mean);
}

TEST_CASE("denoise grid has the requested shape and [0,1] entries") {
  GraphVae model(mol_config(), 7);
  auto vocab = chem::MoleculeVocab::qm9(true);
  chem::BuiltinOracle oracle;
  auto graphs = molecule_generate(vocab, 19, 6);
  auto grid = denoise_eval(model, oracle, vocab, graphs, 2, 2, 11);
  CHECK(grid.pre.rows() == 3);
  CHECK(grid.pre.cols() == 3);
  CHECK(grid.post.rows() == 3);
  // The (0,0) cell of `pre` is the dataset validity: all generated molecules
  // are valid by construction.
  CHECK(grid.pre(0, 0) == doctest::Approx(1.0));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(grid.pre(i, j) >= 0.0);
      CHECK(grid.pre(i, j) <= 1.0);
      CHECK(grid.post(i, j) >= 0.0);
      CHECK(grid.post(i, j) <= 1.0);
    }
}

TEST_CASE("pearson correlation basics") {
  Vec a(4), b(4);
  a << 1, 2, 3, 4;
  b << 2, 4, 6, 8;
  CHECK(pearson_correlation(a, b) == doctest::Approx(1.0));
  b = -b;
  CHECK(pearson_correlation(a, b) == doctest::Approx(-1.0));
}

TEST_CASE("regression on a realizable target reaches near-zero error") {
  RandomStream rng(23);
  Mat latents(250, 8);
  for (int i = 0; i < latents.size(); ++i) latents.data()[i] = rng.normal();
  Vec target = latents.col(0);
  auto report = downstream_regression(latents, target, 5, 3);
  CHECK(report.k_folds == 5);
  CHECK(report.mse_mean < 1e-4);
  CHECK(report.pearson_mean > 0.999);
}

TEST_CASE("regression on a constant target is exact") {
  RandomStream rng(29);
  Mat latents(100, 6);
  for (int i = 0; i < latents.size(); ++i) latents.data()[i] = rng.normal();
  Vec target = Vec::Constant(100, 3.25);
  auto report = downstream_regression(latents, target, 5, 3);
  CHECK(report.mse_mean < 1e-4);
}

TEST_CASE("regression rejects mismatched lengths") {
  Mat latents(10, 3);
  latents.setZero();
  Vec target(9);
  target.setZero();
  CHECK_THROWS_AS(downstream_regression(latents, target, 5, 1), ArgumentError);
}
