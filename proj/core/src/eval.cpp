// SPDX-License-Identifier: Apache-2.0
#include "glav/eval.hpp"

#include "glav/edit_distance.hpp"
#include "glav/nn.hpp"

#include <algorithm>
#include <cmath>

namespace glav {

using ad::Tape;
using ad::Var;

ReconstructionReport reconstruction_eval(GraphVae& model, const std::vector<Graph>& graphs,
                                         int batch_size) {
  ReconstructionReport report;
  report.count = graphs.size();
  if (graphs.empty()) return report;
  double ed_sum = 0.0;
  int exact = 0;
  for (std::size_t off = 0; off < graphs.size(); off += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(graphs.size(), off + static_cast<std::size_t>(batch_size));
    std::vector<Graph> chunk(graphs.begin() + off, graphs.begin() + end);
    Mat mu = model.encode_mean_batch(chunk);
    for (std::size_t k = 0; k < chunk.size(); ++k) {
      Graph decoded = model.decode(mu.row(static_cast<int>(k)).transpose()).graph;
      const bool ok = decoded == chunk[k];
      exact += ok ? 1 : 0;
      ed_sum += ok ? 0.0 : edit_distance_fast(chunk[k], decoded);
      auto& [total, hits] = report.per_size[chunk[k].size()];
      ++total;
      hits += ok ? 1 : 0;
    }
  }
  report.exact_accuracy = static_cast<double>(exact) / static_cast<double>(graphs.size());
  report.mean_edit_distance = ed_sum / static_cast<double>(graphs.size());
  return report;
}

std::unordered_set<std::string> build_canonical_index(chem::Oracle& oracle,
                                                      const chem::MoleculeVocab& vocab,
                                                      const std::vector<Graph>& graphs) {
  std::unordered_set<std::string> index;
  for (const auto& g : graphs) {
    const std::string text = oracle.canonical_text(g, vocab);
    if (!text.empty()) index.insert(text);
  }
  return index;
}

GenerationReport generation_eval(GraphVae& model, chem::Oracle& oracle,
                                 const chem::MoleculeVocab& vocab, int n_batches, int batch_size,
                                 const std::unordered_set<std::string>& train_index,
                                 std::uint64_t seed) {
  if (n_batches < 1 || batch_size < 1) throw ArgumentError("generation_eval: bad batch shape");
  RandomStream rng(seed);
  std::vector<double> validity, uniqueness, novelty;
  const int d_z = model.config().latent_dim;
  for (int b = 0; b < n_batches; ++b) {
    int n_valid = 0, n_novel = 0;
    std::unordered_set<std::string> unique_texts;
    for (int k = 0; k < batch_size; ++k) {
      Vec z(d_z);
      for (int j = 0; j < d_z; ++j) z[j] = rng.normal();
      Graph g = model.decode(z).graph;
      if (!oracle.validity(g, vocab).valid) continue;
      ++n_valid;
      const std::string text = oracle.canonical_text(g, vocab);
      if (unique_texts.insert(text).second && !train_index.count(text)) ++n_novel;
    }
    validity.push_back(100.0 * n_valid / batch_size);
    uniqueness.push_back(n_valid > 0 ? 100.0 * unique_texts.size() / n_valid : 0.0);
    novelty.push_back(!unique_texts.empty() ? 100.0 * n_novel / unique_texts.size() : 0.0);
  }
  auto mean_std = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    return std::pair<double, double>(mean, std::sqrt(var));
  };
  GenerationReport report;
  std::tie(report.validity_mean, report.validity_std) = mean_std(validity);
  std::tie(report.uniqueness_mean, report.uniqueness_std) = mean_std(uniqueness);
  std::tie(report.novelty_mean, report.novelty_std) = mean_std(novelty);
  return report;
}

Graph apply_noise(const Graph& g, int node_edits, int edge_edits, int n_node_classes,
                  int n_edge_classes, RandomStream& rng) {
  Graph noisy = g;
  const int n = g.size();
  const int n_nodes = std::min(node_edits, n);
  for (int idx : rng.sample_without_replacement(n, n_nodes)) {
    const int old = noisy.node_classes[idx];
    int next = static_cast<int>(rng.uniform_index(n_node_classes - 1));
    if (next >= old) ++next;
    noisy.node_classes[idx] = next;
  }
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});
  const int n_pairs = std::min<int>(edge_edits, static_cast<int>(pairs.size()));
  if (!pairs.empty()) {
    for (int idx : rng.sample_without_replacement(static_cast<int>(pairs.size()), n_pairs)) {
      const auto [i, j] = pairs[idx];
      const int old = noisy.edge(i, j);
      int next = static_cast<int>(rng.uniform_index(n_edge_classes - 1));
      if (next >= old) ++next;
      noisy.set_edge(i, j, next);
    }
  }
  return noisy;
}

DenoiseGrid denoise_eval(GraphVae& model, chem::Oracle& oracle, const chem::MoleculeVocab& vocab,
                         const std::vector<Graph>& graphs, int max_node_edits, int max_edge_edits,
                         std::uint64_t seed) {
  DenoiseGrid grid;
  grid.pre = Mat::Zero(max_node_edits + 1, max_edge_edits + 1);
  grid.post = Mat::Zero(max_node_edits + 1, max_edge_edits + 1);
  if (graphs.empty()) return grid;
  const int n_c = model.config().n_node_classes;
  const int n_e = model.config().n_edge_classes;
  for (int a = 0; a <= max_node_edits; ++a) {
    for (int b = 0; b <= max_edge_edits; ++b) {
      RandomStream rng(seed ^ (static_cast<std::uint64_t>(a) << 32) ^ static_cast<std::uint64_t>(b));
      int pre_valid = 0, post_valid = 0;
      for (const auto& g : graphs) {
        Graph noisy = apply_noise(g, a, b, n_c, n_e, rng);
        if (oracle.validity(noisy, vocab).valid) ++pre_valid;
        Graph roundtrip = model.reconstruct(noisy);
        if (oracle.validity(roundtrip, vocab).valid) ++post_valid;
      }
      grid.pre(a, b) = static_cast<double>(pre_valid) / graphs.size();
      grid.post(a, b) = static_cast<double>(post_valid) / graphs.size();
    }
  }
  return grid;
}

double pearson_correlation(const Vec& a, const Vec& b) {
  if (a.size() != b.size() || a.size() < 2) throw ArgumentError("pearson: length mismatch");
  const double ma = a.mean(), mb = b.mean();
  const Vec da = a.array() - ma, db = b.array() - mb;
  const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
  if (denom == 0.0) return 0.0;
  return da.dot(db) / denom;
}

namespace {

/// Two-layer regressor trained with AdamW and early stopping on a held-out
/// slice of the fold's training portion.
Vec fit_and_predict(const Mat& x_train, const Vec& y_train, const Mat& x_test,
                    std::uint64_t seed) {
  nn::ParameterStore params(seed);
  nn::AdamW optim;
  optim.weight_decay = 0.0;
  const int hidden = 256;

  const int n = static_cast<int>(x_train.rows());
  const int n_val = std::max(1, n / 10);
  const int n_fit = n - n_val;
  Mat x_fit = x_train.topRows(n_fit), x_val = x_train.bottomRows(n_val);
  Vec y_fit = y_train.head(n_fit), y_val = y_train.tail(n_val);

  auto forward = [&](Tape& t, const Mat& x) {
    Var h = t.gelu(nn::dense(t, params, "reg.fc1", t.constant(x), hidden));
    return nn::dense(t, params, "reg.fc2", h, 1);
  };

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::string, Mat>> best_params;
  int stale = 0;
  for (int epoch = 0; epoch < 600 && stale < 8; ++epoch) {
    Tape t;
    Var pred = forward(t, x_fit);
    Var diff = t.sub(pred, t.constant(Mat(y_fit)));
    Var loss = t.scale(t.sum_all(t.mul(diff, diff)), 1.0 / n_fit);
    t.backward(loss);
    optim.step(params, t, 1e-3);
    if (epoch % 10 == 9) {
      Tape tv;
      Mat pv = forward(tv, x_val).value();
      const double val = (pv.col(0) - y_val).squaredNorm() / n_val;
      if (val < best_val - 1e-7) {
        best_val = val;
        stale = 0;
        best_params.clear();
        for (const auto& name : params.names()) best_params.push_back({name, params.at(name)});
      } else {
        ++stale;
      }
    }
  }
  for (auto& [name, value] : best_params) params.at(name) = value;
  Tape t;
  return forward(t, x_test).value().col(0);
}

}  // namespace

RegressionReport downstream_regression(const Mat& latents, const Vec& targets, int k_folds,
                                       std::uint64_t seed) {
  if (latents.rows() != targets.size()) throw ArgumentError("regression: length mismatch");
  if (k_folds < 2 || latents.rows() < k_folds) throw ArgumentError("regression: bad fold count");
  const int n = static_cast<int>(latents.rows());

  // Standardize targets over the full set.
  const double mean = targets.mean();
  const double stdev = std::sqrt((targets.array() - mean).square().mean());
  Vec y = (targets.array() - mean) / (stdev > 0 ? stdev : 1.0);

  RandomStream rng(seed);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<double> mses, rmses, pearsons;
  for (int fold = 0; fold < k_folds; ++fold) {
    std::vector<int> train_idx, test_idx;
    for (int i = 0; i < n; ++i)
      (i % k_folds == fold ? test_idx : train_idx).push_back(order[i]);

    Mat x_train(train_idx.size(), latents.cols()), x_test(test_idx.size(), latents.cols());
    Vec y_train(train_idx.size()), y_test(test_idx.size());
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
      x_train.row(i) = latents.row(train_idx[i]);
      y_train[i] = y[train_idx[i]];
    }
    for (std::size_t i = 0; i < test_idx.size(); ++i) {
      x_test.row(i) = latents.row(test_idx[i]);
      y_test[i] = y[test_idx[i]];
    }

    Vec pred = fit_and_predict(x_train, y_train, x_test, seed + fold + 1);
    const double mse = (pred - y_test).squaredNorm() / y_test.size();
    mses.push_back(mse);
    rmses.push_back(std::sqrt(mse));
    pearsons.push_back(pearson_correlation(pred, y_test));
  }

  auto mean_std = [](const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= xs.size();
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return std::pair<double, double>(m, std::sqrt(v / xs.size()));
  };
  RegressionReport report;
  report.k_folds = k_folds;
  std::tie(report.mse_mean, report.mse_std) = mean_std(mses);
  std::tie(report.rmse_mean, report.rmse_std) = mean_std(rmses);
  std::tie(report.pearson_mean, report.pearson_std) = mean_std(pearsons);
  return report;
}

}  // namespace glav
