// SPDX-License-Identifier: Apache-2.0
#include "glav/train.hpp"

#include "glav/synthetic.hpp"

#include <doctest.h>

#include <filesystem>

using namespace glav;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.n_node_classes = 4;
  cfg.n_edge_classes = 2;
  cfg.input_size = 24;
  cfg.hidden_size = 32;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.latent_dim = 24;
  cfg.d_s = 4;
  cfg.k_lap = 0;
  cfg.k_rw = 4;
  return cfg;
}

TrainOptions quick_options() {
  TrainOptions opts;
  opts.batch_size = 8;
  opts.epochs = 2;
  opts.learning_rate = 3e-3;
  opts.lr_cycle_epochs = 50;
  opts.beta_cycle_epochs = 10;
  opts.seed = 9;
  opts.eval_every = 1;
  opts.log_every = 1;
  return opts;
}

std::string temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("glav_train_" + tag);
  std::filesystem::remove_all(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("split_dataset is deterministic and respects fractions") {
  auto graphs = coloring_generate(3, 6, 21, 100);
  auto s1 = split_dataset(graphs, 0.8, 0.1, 0.1, 5);
  auto s2 = split_dataset(graphs, 0.8, 0.1, 0.1, 5);
  CHECK(s1.train.size() == 80);
  CHECK(s1.valid.size() == 10);
  CHECK(s1.test.size() == 10);
  for (std::size_t i = 0; i < s1.train.size(); ++i) CHECK(s1.train[i] == s2.train[i]);
  CHECK_THROWS_AS(split_dataset(graphs, 0.9, 0.2, 0.1, 5), ArgumentError);
}

TEST_CASE("loss decomposition identity holds on every step") {
  GraphVae model(tiny_config(), 30);
  LossConfig loss;
  loss.edge_weight = 1.25;
  loss.beta_max = 1e-3;
  loss.beta_cycle_steps = 4;
  Trainer trainer(model, loss, quick_options(), "");
  auto graphs = coloring_generate(3, 6, 31, 16);
  for (int step = 0; step < 6; ++step) {
    auto report = trainer.train_step(graphs);
    const double recombined = report.node_loss + 1.25 * report.edge_loss + report.size_loss +
                              report.beta * report.kl_loss;
    CHECK(report.total == doctest::Approx(recombined).epsilon(1e-12));
    CHECK(std::isfinite(report.total));
  }
}

TEST_CASE("a few steps of memorization reduce the reconstruction loss") {
  GraphVae model(tiny_config(), 31);
  LossConfig loss;
  Trainer trainer(model, loss, quick_options(), "");
  auto graphs = coloring_generate(3, 5, 33, 8);
  // Compare the reconstruction part only; the KL weight ramps up over steps.
  double first = 0.0, last = 0.0;
  for (int step = 0; step < 60; ++step) {
    auto report = trainer.train_step(graphs);
    const double recon = report.node_loss + report.edge_loss + report.size_loss;
    if (step < 5) first += recon;
    if (step >= 55) last += recon;
  }
  CHECK(last < first);
}

TEST_CASE("checkpoint save/load restores the exact trajectory") {
  auto graphs = coloring_generate(3, 5, 35, 24);
  DatasetSplits data;
  data.train = graphs;

  const std::string dir_a = temp_dir("a");
  const std::string dir_b = temp_dir("b");

  // Uninterrupted: 2 epochs.
  GraphVae model_a(tiny_config(), 77);
  TrainOptions opts = quick_options();
  Trainer trainer_a(model_a, LossConfig{}, opts, dir_a);
  trainer_a.fit(data);

  // Interrupted after epoch 1, then resumed.
  GraphVae model_b(tiny_config(), 77);
  TrainOptions opts_1 = opts;
  opts_1.epochs = 1;
  {
    Trainer trainer_b1(model_b, LossConfig{}, opts_1, dir_b);
    trainer_b1.fit(data);
  }
  GraphVae model_c(tiny_config(), 123);  // different init, overwritten by the load
  Trainer trainer_b2(model_c, LossConfig{}, opts, dir_b);
  trainer_b2.load_checkpoint(dir_b + "/last.ckpt");
  CHECK(trainer_b2.epoch() == 1);
  trainer_b2.fit(data);

  CHECK(trainer_a.step() == trainer_b2.step());
  for (const auto& name : model_a.params().names()) {
    const Mat& a = model_a.params().at(name);
    const Mat& c = model_c.params().at(name);
    CHECK((a - c).cwiseAbs().maxCoeff() == 0.0);
  }
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
}

TEST_CASE("checkpoints reject mismatched model configurations") {
  GraphVae model(tiny_config(), 1);
  const std::string dir = temp_dir("c");
  Trainer trainer(model, LossConfig{}, quick_options(), dir);
  trainer.save_checkpoint(dir + "/x.ckpt");

  ModelConfig other = tiny_config();
  other.latent_dim = 16;
  GraphVae model2(other, 1);
  Trainer trainer2(model2, LossConfig{}, quick_options(), "");
  CHECK_THROWS_AS(trainer2.load_checkpoint(dir + "/x.ckpt"), ConfigError);
  CHECK_THROWS_AS(Trainer::load_model(dir + "/x.ckpt", model2), ConfigError);
  CHECK_NOTHROW(Trainer::load_model(dir + "/x.ckpt", model));
  std::filesystem::remove_all(dir);
}

TEST_CASE("AE mode trains without a KL term") {
  ModelConfig cfg = tiny_config();
  cfg.variational = false;
  GraphVae model(cfg, 33);
  LossConfig loss;
  loss.beta_max = 0.0;
  Trainer trainer(model, loss, quick_options(), "");
  auto graphs = coloring_generate(3, 5, 39, 8);
  auto report = trainer.train_step(graphs);
  CHECK(report.kl_loss == 0.0);
  CHECK(report.beta == 0.0);
  CHECK(report.total == doctest::Approx(report.node_loss + report.edge_loss * loss.edge_weight +
                                        report.size_loss));
}
