// SPDX-License-Identifier: Apache-2.0
#include "glav/config.hpp"

#include "glav/manifest.hpp"
#include "glav/plot.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace glav;

TEST_CASE("presets carry the published hyperparameter columns") {
  Config qm9 = Config::preset("qm9");
  CHECK(qm9.learning_rate == doctest::Approx(2e-4));
  CHECK(qm9.batch_size == 64);
  CHECK(qm9.latent_dimension == 64);
  CHECK(qm9.encoder_hidden_size == 128);
  CHECK(qm9.encoder_input_size == 128);
  CHECK(qm9.graph_transformer_layers == 2);
  CHECK(qm9.transformer_heads == 4);
  CHECK(qm9.beta == doctest::Approx(1e-5));
  CHECK(qm9.lr_cycle_length == doctest::Approx(200));
  CHECK(qm9.beta_cycle_length == doctest::Approx(400));
  CHECK(qm9.ratio_negative_edges == doctest::Approx(4));
  CHECK(qm9.edge_loss_weight == doctest::Approx(1.25));
  CHECK(qm9.train_split == doctest::Approx(0.8));

  Config pc16 = Config::preset("pubchem16");
  CHECK(pc16.latent_dimension == 256);
  CHECK(pc16.encoder_hidden_size == 512);
  CHECK(pc16.graph_transformer_layers == 5);
  CHECK(pc16.train_split == doctest::Approx(0.9736));

  Config pc32 = Config::preset("pubchem32");
  CHECK(pc32.batch_size == 256);
  CHECK(pc32.latent_dimension == 512);
  CHECK(pc32.graph_transformer_layers == 7);
  CHECK(pc32.transformer_heads == 8);

  Config coloring = Config::preset("coloring");
  CHECK(coloring.latent_dimension == 128);
  CHECK(coloring.encoder_hidden_size == 256);
  CHECK(coloring.lr_cycle_length == doctest::Approx(300));
  CHECK(coloring.edge_loss_weight == doctest::Approx(1.0));
  CHECK(coloring.train_split == doctest::Approx(0.9375));

  Config asia = Config::preset("asia-bn");
  CHECK(asia.latent_dimension == 64);
  CHECK(asia.encoder_hidden_size == 64);
  CHECK(asia.graph_transformer_layers == 1);
  CHECK(asia.transformer_heads == 1);
  CHECK(asia.beta == doctest::Approx(1e-3));
  CHECK(asia.lr_cycle_length == doctest::Approx(30));

  CHECK_THROWS_AS(Config::preset("nope"), ConfigError);
}

TEST_CASE("unknown keys are rejected, never ignored") {
  Config c;
  CHECK_THROWS_AS(c.apply_text("no_such_key = 3"), ConfigError);
  CHECK_THROWS_AS(c.apply_text("learning_rate 3"), ConfigError);
  CHECK_THROWS_AS(c.apply_text("batch_size = soup"), ConfigError);
  CHECK_NOTHROW(c.apply_text("# comment only\n\nbatch_size = 16\n"));
  CHECK(c.batch_size == 16);
}

TEST_CASE("config snapshot round-trips") {
  Config c = Config::preset("coloring");
  c.seed = 1234;
  c.epochs = 7;
  Config back;
  back.apply_text(c.to_text());
  CHECK(back.to_text() == c.to_text());
}

TEST_CASE("derived model and loss configs reflect the task") {
  Config mol = Config::preset("qm9");
  ModelConfig mc = mol.model_config();
  CHECK(mc.n_node_classes == 4);
  CHECK(mc.n_edge_classes == 5);  // aromatic mode
  CHECK(mc.molecule_heads);
  CHECK(mc.use_attributes);
  CHECK(mc.attr_dim == chem::kElementAttrDim);

  mol.bond_mode = "kekulized";
  CHECK(mol.model_config().n_edge_classes == 4);

  mol.mode = "ae";
  CHECK_FALSE(mol.model_config().variational);
  CHECK(mol.loss_config().beta_max == 0.0);

  Config bad = mol;
  bad.mode = "zz";
  CHECK_THROWS_AS(bad.model_config(), ConfigError);
  bad = mol;
  bad.optimizer = "sgd";
  CHECK_THROWS_AS(bad.model_config(), ConfigError);

  Config coloring = Config::preset("coloring");
  CHECK(coloring.model_config().n_node_classes == 4);
  CHECK(coloring.model_config().n_edge_classes == 2);

  Config asia = Config::preset("asia-bn");
  CHECK(asia.model_config().n_node_classes == 8);
  CHECK(asia.model_config().n_edge_classes == 3);
}

TEST_CASE("manifest hashes are stable and run dirs never clobber") {
  namespace fs = std::filesystem;
  const auto root = fs::temp_directory_path() / "glav_manifest_test";
  fs::remove_all(root);
  fs::create_directories(root);

  const auto dataset = root / "data.graphs";
  {
    std::ofstream out(dataset);
    out << "{\"n\":1,\"nodes\":[0],\"edges\":[]}\n";
  }

  RunManifest m;
  m.subcommand = "train";
  m.command_line = "glav train --dataset data.graphs";
  m.config_text = "batch_size = 4\n";
  m.dataset_path = dataset.string();
  m.dataset_fingerprint = fingerprint_file(dataset.string());
  m.seed = 7;

  const std::string h1 = m.hash();
  CHECK(h1 == m.hash());
  RunManifest m2 = m;
  m2.seed = 8;
  CHECK(m2.hash() != h1);

  const std::string dir1 = create_run_dir(root.string(), m);
  CHECK(fs::exists(dir1 + "/manifest.json"));
  // Same manifest resumes the same directory.
  CHECK(create_run_dir(root.string(), m) == dir1);
  // A different command line (not part of the hash inputs) but equal content
  // keys still collides by hash; force a different payload.
  RunManifest m3 = m;
  m3.command_line = "glav train --dataset data.graphs --out elsewhere";
  const std::string dir3 = create_run_dir(root.string(), m3);
  CHECK(dir3 != dir1);
  fs::remove_all(root);
}

TEST_CASE("plots are written as image files") {
  namespace fs = std::filesystem;
  const auto root = fs::temp_directory_path() / "glav_plot_test";
  fs::remove_all(root);
  fs::create_directories(root);

  Mat grid(3, 4);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) grid(i, j) = i * 0.3 + j * 0.1;
  const std::string heat = heatmap_png((root / "heat").string(), grid);
  CHECK(fs::exists(heat));
  CHECK(fs::file_size(heat) > 100);

  auto graphs = coloring_generate(4, 7, 3, 6);
  const std::string gridfile =
      graph_grid_png((root / "mols").string(), graphs, {"1.00", "2.50", "-0.75"}, 3);
  CHECK(fs::exists(gridfile));
  CHECK(fs::file_size(gridfile) > 100);
  fs::remove_all(root);
}
