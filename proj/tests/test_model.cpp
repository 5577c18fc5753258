// SPDX-License-Identifier: Apache-2.0
#include "glav/model.hpp"

#include "glav/synthetic.hpp"

#include <doctest.h>

using namespace glav;
using ad::Tape;
using ad::Var;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.n_node_classes = 4;
  cfg.n_edge_classes = 2;
  cfg.input_size = 16;
  cfg.hidden_size = 16;
  cfg.layers = 2;
  cfg.heads = 2;
  cfg.latent_dim = 12;
  cfg.d_s = 4;
  cfg.k_lap = 2;
  cfg.k_rw = 3;
  return cfg;
}

Graph sample_graph(std::uint64_t seed, int n_min = 4, int n_max = 6) {
  return coloring_generate(n_min, n_max, seed, 1)[0];
}

std::vector<int> random_permutation(int n, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  return perm;
}

Mat encode_mu(GraphVae& model, const std::vector<Graph>& graphs) {
  return model.encode_mean_batch(graphs);
}

/// Central-difference check of d(probe)/d(param[name]) on a few entries.
void check_param_gradient(GraphVae& model, const std::string& name,
                          const std::function<double()>& probe, const Mat& analytic) {
  Mat base = model.params().at(name);
  RandomStream pick(fnv1a(name));
  for (int trial = 0; trial < 4; ++trial) {
    const int r = static_cast<int>(pick.uniform_index(base.rows()));
    const int c = static_cast<int>(pick.uniform_index(base.cols()));
    const double h = 1e-5;
    model.params().at(name)(r, c) = base(r, c) + h;
    const double f_plus = probe();
    model.params().at(name)(r, c) = base(r, c) - h;
    const double f_minus = probe();
    model.params().at(name)(r, c) = base(r, c);
    const double fd = (f_plus - f_minus) / (2.0 * h);
    const double a = analytic(r, c);
    CHECK(std::abs(a - fd) / std::max({1e-4, std::abs(a), std::abs(fd)}) < 1e-3);
  }
}

}  // namespace

TEST_CASE("encoder is invariant to node permutations (RW-PE only)") {
  ModelConfig cfg = tiny_config();
  cfg.k_lap = 0;  // Laplacian eigenvectors are excluded: degenerate spectra
                  // break strict equivariance of the eigenbasis
  GraphVae model(cfg, 7);
  for (int trial = 0; trial < 5; ++trial) {
    Graph g = sample_graph(100 + trial);
    Graph pg = g.permuted(random_permutation(g.size(), 200 + trial));
    Mat mu = encode_mu(model, {g});
    Mat mu_p = encode_mu(model, {pg});
    CHECK((mu - mu_p).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("encoding does not depend on batch padding") {
  GraphVae model(tiny_config(), 8);
  Graph g = sample_graph(42, 4, 4);
  Graph big1 = sample_graph(43, 9, 9);
  Graph big2 = sample_graph(44, 24, 24);

  Mat alone = encode_mu(model, {g});
  Mat padded = encode_mu(model, {g, big1});
  Mat padded2 = encode_mu(model, {g, big2});
  CHECK((alone.row(0) - padded.row(0)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((alone.row(0) - padded2.row(0)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("altering a pad slot leaves the encoding unchanged") {
  GraphVae model(tiny_config(), 9);
  Graph g = sample_graph(45, 3, 3);
  Graph other = sample_graph(46, 6, 6);
  GraphBatch batch = pad_batch({g, other}, 4, 2, tiny_config().batch_options());
  BatchIndex ix = BatchIndex::from_sizes(batch.sizes, batch.n_max);

  Tape t1;
  Mat mu1 = model.encode(t1, batch, ix).mu.value();
  GraphBatch tampered = batch;
  for (int i = g.size(); i < tampered.n_max; ++i) {
    tampered.node_classes[tampered.node_index(0, i)] = 3;
    tampered.positional.row(tampered.node_index(0, i)).setConstant(7.5);
    for (int j = 0; j < tampered.n_max; ++j) {
      if (j == i) continue;
      tampered.edge_classes[tampered.pair_index(0, i, j)] = 1;
      tampered.edge_classes[tampered.pair_index(0, j, i)] = 1;
    }
  }
  Tape t2;
  Mat mu2 = model.encode(t2, tampered, ix).mu.value();
  CHECK((mu1.row(0) - mu2.row(0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("transformer stack with zero layers is the identity") {
  ModelConfig cfg = tiny_config();
  cfg.layers = 0;
  GraphVae model(cfg, 10);
  Graph g = sample_graph(47);
  GraphBatch batch = pad_batch({g}, 4, 2, cfg.batch_options());
  BatchIndex ix = BatchIndex::from_sizes(batch.sizes, batch.n_max);
  Tape t;
  auto s0 = model.embed_inputs(t, batch, ix);
  auto s1 = model.transformer_stack(t, s0, ix);
  CHECK(s0.x.id == s1.x.id);
  CHECK(s0.e.id == s1.e.id);
}

TEST_CASE("E channel stays symmetric through the stack") {
  GraphVae model(tiny_config(), 11);
  Graph g = sample_graph(48);
  GraphBatch batch = pad_batch({g}, 4, 2, tiny_config().batch_options());
  BatchIndex ix = BatchIndex::from_sizes(batch.sizes, batch.n_max);
  Tape t;
  auto s = model.embed_inputs(t, batch, ix);
  s = model.transformer_stack(t, s, ix);
  const Mat& e = s.e.value();
  const int n = ix.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      CHECK(std::abs(e(i * n + j, 3) - e(j * n + i, 3)) < 1e-12);
}

TEST_CASE("decoder pair features and edge logits are exactly symmetric") {
  ModelConfig cfg = tiny_config();
  GraphVae model(cfg, 12);
  RandomStream rng(5);
  Mat z(2, cfg.latent_dim);
  for (int i = 0; i < z.rows(); ++i)
    for (int j = 0; j < z.cols(); ++j) z(i, j) = rng.normal();

  BatchIndex ix = BatchIndex::from_sizes({4, 3}, 4);
  Tape t;
  auto dec = model.decode_forward(t, t.constant(z), ix);
  const Mat& phi = dec.phi_e.value();
  const Mat& logits = dec.edge_logits.value();
  for (int b = 0; b < 2; ++b)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const int p = (b * 4 + i) * 4 + j;
        const int q = (b * 4 + j) * 4 + i;
        CHECK(phi.row(p) == phi.row(q));
        CHECK(logits.row(p) == logits.row(q));
      }
}

TEST_CASE("readin broadcast rows are identical before positional encoding") {
  ModelConfig cfg = tiny_config();
  cfg.readin_blocks = 0;
  GraphVae model(cfg, 13);
  Mat z = Mat::Ones(1, cfg.latent_dim) * 0.3;
  BatchIndex ix = BatchIndex::from_sizes({3}, 3);
  Tape t;
  Var seq = model.readin(t, t.constant(z), ix);
  Mat pe = sinusoidal_position_encoding(3, cfg.input_size);
  Mat base = seq.value() - pe;
  CHECK((base.row(0) - base.row(1)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((base.row(0) - base.row(2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sinusoidal PE at position zero alternates 0/1") {
  Mat pe = sinusoidal_position_encoding(4, 6);
  CHECK(pe(0, 0) == doctest::Approx(0.0));
  CHECK(pe(0, 1) == doctest::Approx(1.0));
  CHECK(pe(0, 2) == doctest::Approx(0.0));
  CHECK(pe(0, 3) == doctest::Approx(1.0));
}

TEST_CASE("split_and_pair midpoint formula") {
  ModelConfig cfg = tiny_config();
  GraphVae model(cfg, 14);
  BatchIndex ix = BatchIndex::from_sizes({2}, 2);
  Tape t;
  Mat seq = Mat::Zero(2, cfg.input_size);
  const int half = cfg.input_size / 2;
  for (int c = 0; c < half; ++c) {
    seq(0, half + c) = c + 1.0;
    seq(1, half + c) = -(c + 1.0);
  }
  auto [phi_x, phi_e] = model.split_and_pair(t, t.constant(seq), ix);
  (void)phi_x;
  const Mat& phi = phi_e.value();
  // Phi(0,1) = 1/2([a||b] + [b||a]); with b = -a every entry is 0.
  CHECK(phi.row(0 * 2 + 1).cwiseAbs().maxCoeff() < 1e-12);
  // Phi(i,i) = X_e[i] || X_e[i].
  CHECK(phi(0, 0) == doctest::Approx(1.0));
  CHECK(phi(0, half) == doctest::Approx(1.0));
}

TEST_CASE("encoder gradients match central finite differences") {
  ModelConfig cfg = tiny_config();
  cfg.layers = 1;
  GraphVae model(cfg, 15);
  Graph g = sample_graph(50, 4, 4);
  GraphBatch batch = pad_batch({g}, 4, 2, cfg.batch_options());
  BatchIndex ix = BatchIndex::from_sizes(batch.sizes, batch.n_max);

  auto probe = [&]() {
    Tape t;
    return t.sum_all(t.gelu(model.encode(t, batch, ix).mu)).value()(0, 0);
  };
  Tape t;
  Var loss = t.sum_all(t.gelu(model.encode(t, batch, ix).mu));
  t.backward(loss);
  for (const std::string name :
       {"enc.gt0.q.w", "enc.gt0.e_mul.w", "enc.gt0.y_out.w", "emb.node_class",
        "ro.node0.ffn.fc1.w", "ro.edge0.out.w", "head.mu.w"})
    check_param_gradient(model, name, probe, t.param_grad(name));
}

TEST_CASE("decoder gradients match central finite differences") {
  ModelConfig cfg = tiny_config();
  cfg.layers = 1;
  GraphVae model(cfg, 18);
  RandomStream rng(3);
  Mat z(1, cfg.latent_dim);
  for (int j = 0; j < z.cols(); ++j) z(0, j) = rng.normal();
  BatchIndex ix = BatchIndex::from_sizes({3}, 3);

  auto probe = [&]() {
    Tape t;
    auto dec = model.decode_forward(t, t.constant(z), ix);
    return t.sum_all(t.gelu(dec.edge_logits)).value()(0, 0);
  };
  Tape t;
  auto dec = model.decode_forward(t, t.constant(z), ix);
  Var loss = t.sum_all(t.gelu(dec.edge_logits));
  t.backward(loss);
  for (const std::string name :
       {"ri.proj.w", "ri.sa0.q.w", "dec.phi_x.w", "dec.gt0.e_out.w", "head.edge.fc1.w", "dec.y0"})
    check_param_gradient(model, name, probe, t.param_grad(name));
}

TEST_CASE("decode is deterministic and respects graph invariants") {
  ModelConfig cfg = tiny_config();
  GraphVae model(cfg, 16);
  RandomStream rng(77);
  Vec z(cfg.latent_dim);
  for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
  auto r1 = model.decode(z);
  auto r2 = model.decode(z);
  CHECK(r1.graph == r2.graph);
  CHECK(r1.n >= 1);
  r1.graph.validate(cfg.n_node_classes, cfg.n_edge_classes);
}

TEST_CASE("decoder output independent of batch mates") {
  ModelConfig cfg = tiny_config();
  GraphVae model(cfg, 17);
  RandomStream rng(88);
  Mat z(2, cfg.latent_dim);
  for (int i = 0; i < z.rows(); ++i)
    for (int j = 0; j < z.cols(); ++j) z(i, j) = rng.normal();

  Tape t1;
  BatchIndex solo = BatchIndex::from_sizes({3}, 3);
  Mat solo_logits = model.decode_forward(t1, t1.constant(Mat(z.row(0))), solo).node_logits.value();

  Tape t2;
  BatchIndex both = BatchIndex::from_sizes({3, 5}, 5);
  Mat both_logits = model.decode_forward(t2, t2.constant(z), both).node_logits.value();
  for (int i = 0; i < 3; ++i)
    CHECK((solo_logits.row(i) - both_logits.row(i)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("size channel reads and writes only the reserved dims") {
  ModelConfig cfg = tiny_config();
  GraphVae model(cfg, 19);
  RandomStream rng(4);
  Mat z(1, cfg.latent_dim);
  for (int j = 0; j < z.cols(); ++j) z(0, j) = rng.normal();

  Tape t;
  Var zc = t.constant(z);
  Var s1 = model.predict_size(t, zc);
  Mat z2 = z;
  for (int j = cfg.d_s; j < cfg.latent_dim; ++j) z2(0, j) += 3.21;  // beyond d_s
  Var s2 = model.predict_size(t, t.constant(z2));
  CHECK(s1.value()(0, 0) == s2.value()(0, 0));

  Var injected = model.reinject_size(t, zc, t.constant(Mat::Constant(1, 1, std::log(5.0))));
  const Mat& zi = injected.value();
  for (int j = cfg.d_s; j < cfg.latent_dim; ++j) CHECK(zi(0, j) == z(0, j));

  // Idempotence of reinjection.
  Var twice = model.reinject_size(t, injected, t.constant(Mat::Constant(1, 1, std::log(5.0))));
  CHECK((twice.value() - zi).cwiseAbs().maxCoeff() == 0.0);
}
