// SPDX-License-Identifier: Apache-2.0
#include "glav/model.hpp"

#include "glav/chem.hpp"

#include <cmath>

namespace glav {

using ad::Tape;
using ad::Var;

void ModelConfig::validate() const {
  if (n_node_classes < 1 || n_edge_classes < 2) throw ConfigError("class counts out of range");
  if (input_size % 2 != 0) throw ConfigError("encoder input size must be even");
  if (input_size % heads != 0) throw ConfigError("encoder input size must divide by heads");
  if (latent_dim <= d_s) throw ConfigError("latent dimension must exceed d_s");
  if (d_s < 1) throw ConfigError("d_s must be >= 1");
  if (layers < 0 || heads < 1 || hidden_size < 1) throw ConfigError("bad architecture sizes");
  if (use_attributes && attr_dim < 1) throw ConfigError("attr_dim required with attributes");
  if (n_cap < 1) throw ConfigError("n_cap must be >= 1");
}

BatchIndex BatchIndex::from_sizes(const std::vector<int>& sizes, int n_max) {
  BatchIndex ix;
  ix.b = static_cast<int>(sizes.size());
  ix.n = n_max;
  ix.sizes = sizes;
  const int bn = ix.b * ix.n;
  ix.node_mask.assign(bn, 0);
  ix.node_graph.resize(bn);
  ix.pair_mask.assign(static_cast<std::size_t>(bn) * ix.n, 0);
  ix.pair_i.resize(static_cast<std::size_t>(bn) * ix.n);
  ix.pair_j.resize(static_cast<std::size_t>(bn) * ix.n);
  ix.pair_transpose.resize(static_cast<std::size_t>(bn) * ix.n);
  ix.pair_graph.resize(static_cast<std::size_t>(bn) * ix.n);
  ix.pair_rowblock.resize(static_cast<std::size_t>(bn) * ix.n);
  for (int b = 0; b < ix.b; ++b) {
    for (int i = 0; i < ix.n; ++i) {
      const int nr = b * ix.n + i;
      ix.node_graph[nr] = b;
      ix.node_mask[nr] = i < sizes[b] ? 1 : 0;
      for (int j = 0; j < ix.n; ++j) {
        const int pr = nr * ix.n + j;
        ix.pair_i[pr] = nr;
        ix.pair_j[pr] = b * ix.n + j;
        ix.pair_transpose[pr] = (b * ix.n + j) * ix.n + i;
        ix.pair_graph[pr] = b;
        ix.pair_rowblock[pr] = nr;
        ix.pair_mask[pr] = (i < sizes[b] && j < sizes[b]) ? 1 : 0;
      }
    }
  }
  return ix;
}

Mat sinusoidal_position_encoding(int length, int dim) {
  Mat pe(length, dim);
  for (int pos = 0; pos < length; ++pos) {
    for (int c = 0; c < dim; ++c) {
      const double rate = std::pow(10000.0, -2.0 * (c / 2) / static_cast<double>(dim));
      pe(pos, c) = (c % 2 == 0) ? std::sin(pos * rate) : std::cos(pos * rate);
    }
  }
  return pe;
}

namespace {

Vec mask_to_vec(const std::vector<std::uint8_t>& mask) {
  Vec v(static_cast<int>(mask.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = mask[i] ? 1.0 : 0.0;
  return v;
}

int argmax_lowest(const Mat& m, int row) {
  int best = 0;
  for (int c = 1; c < m.cols(); ++c)
    if (m(row, c) > m(row, best)) best = c;
  return best;
}

}  // namespace

GraphVae::GraphVae(ModelConfig cfg, std::uint64_t init_seed)
    : cfg_(std::move(cfg)), params_(init_seed) {
  cfg_.validate();
}

// ---------------------------------------------------------------------------
// Encoder

GraphVae::EncoderState GraphVae::embed_inputs(Tape& t, const GraphBatch& batch,
                                              const BatchIndex& ix) {
  const int d = cfg_.input_size;
  if (batch.n_node_classes != cfg_.n_node_classes || batch.n_edge_classes != cfg_.n_edge_classes)
    throw ConfigError("batch vocabulary does not match model configuration");

  // Node channel: class embedding ++ projected positional encodings
  // (++ projected attributes), projected to width d.
  Var class_table = nn::weight(t, params_, "emb.node_class", cfg_.n_node_classes, d);
  Var class_emb = t.gather_rows(class_table, batch.node_classes);
  Var pe_in = t.constant(batch.positional);
  Var pe_emb = nn::dense(t, params_, "emb.pe", pe_in, d);
  Var x = t.concat_cols(class_emb, pe_emb);
  if (cfg_.use_attributes) {
    Var attr_in = t.constant(batch.attributes);
    Var attr_emb = nn::dense(t, params_, "emb.attr", attr_in, d);
    x = t.concat_cols(x, attr_emb);
  }
  x = nn::dense(t, params_, "emb.node_proj", x, d);
  x = nn::layer_norm(t, params_, "emb.node_ln", x);
  x = t.scale_rows(x, mask_to_vec(ix.node_mask));

  // Edge channel: class embedding.
  Var edge_table = nn::weight(t, params_, "emb.edge_class", cfg_.n_edge_classes, d);
  Var e = t.gather_rows(edge_table, batch.edge_classes);
  e = nn::layer_norm(t, params_, "emb.edge_ln", e);
  e = t.scale_rows(e, mask_to_vec(ix.pair_mask));

  // Global channel: linear projection of the count features.
  Var y_in = t.constant(batch.global_features);
  Var y = nn::dense(t, params_, "emb.global", y_in, d);
  y = nn::layer_norm(t, params_, "emb.global_ln", y);

  return {x, e, y};
}

GraphVae::EncoderState GraphVae::graph_transformer_layer(Tape& t, const std::string& prefix,
                                                         EncoderState s, const BatchIndex& ix) {
  const int d = cfg_.input_size;
  const int heads = cfg_.heads;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(d / heads));
  const Vec node_mask = mask_to_vec(ix.node_mask);
  const Vec pair_mask = mask_to_vec(ix.pair_mask);

  // Pairwise attention features modulated by the edge channel.
  Var q = nn::dense_nobias(t, params_, prefix + ".q", s.x, d);
  Var k = nn::dense_nobias(t, params_, prefix + ".k", s.x, d);
  Var v = nn::dense_nobias(t, params_, prefix + ".v", s.x, d);
  Var y_pair = t.scale(t.mul(t.gather_rows(q, ix.pair_i), t.gather_rows(k, ix.pair_j)),
                       inv_sqrt_dh);
  Var e_mul = nn::dense(t, params_, prefix + ".e_mul", s.e, d);
  Var e_add = nn::dense(t, params_, prefix + ".e_add", s.e, d);
  y_pair = t.add(t.mul(y_pair, t.add_const(e_mul, 1.0)), e_add);

  // Global-feature film on the new edge features, then output projection and
  // re-symmetrization.
  Var ye_add = t.gather_rows(nn::dense(t, params_, prefix + ".ye_add", s.y, d), ix.pair_graph);
  Var ye_mul = t.gather_rows(nn::dense(t, params_, prefix + ".ye_mul", s.y, d), ix.pair_graph);
  Var new_e = t.add(ye_add, t.mul(t.add_const(ye_mul, 1.0), y_pair));
  new_e = nn::dense(t, params_, prefix + ".e_out", new_e, d);
  new_e = t.scale(t.add(new_e, t.gather_rows(new_e, ix.pair_transpose)), 0.5);

  // Per-channel attention over j, then value aggregation.
  Var attn = t.group_softmax(y_pair, ix.pair_rowblock, ix.b * ix.n, ix.pair_mask);
  Var weighted = t.mul(attn, t.gather_rows(v, ix.pair_j));
  Var x_att = t.group_sum(weighted, ix.pair_rowblock, ix.b * ix.n);

  Var yx_add = t.gather_rows(nn::dense(t, params_, prefix + ".yx_add", s.y, d), ix.node_graph);
  Var yx_mul = t.gather_rows(nn::dense(t, params_, prefix + ".yx_mul", s.y, d), ix.node_graph);
  Var new_x = t.add(yx_add, t.mul(t.add_const(yx_mul, 1.0), x_att));
  new_x = nn::dense(t, params_, prefix + ".x_out", new_x, d);

  // Global update from masked means of both channels.
  Vec node_w = node_mask;
  Vec pair_w = pair_mask;
  for (int b = 0; b < ix.b; ++b) {
    const double n_b = static_cast<double>(ix.sizes[b]);
    for (int i = 0; i < ix.n; ++i) {
      node_w[b * ix.n + i] /= n_b;
      for (int j = 0; j < ix.n; ++j) pair_w[(b * ix.n + i) * static_cast<std::size_t>(ix.n) + j] /= n_b * n_b;
    }
  }
  Var x_pool = t.group_sum(t.scale_rows(s.x, node_w), ix.node_graph, ix.b);
  Var e_pool = t.group_sum(t.scale_rows(s.e, pair_w), ix.pair_graph, ix.b);
  Var new_y = t.add(t.add(nn::dense(t, params_, prefix + ".y_y", s.y, d),
                          nn::dense(t, params_, prefix + ".x_y", x_pool, d)),
                    nn::dense(t, params_, prefix + ".e_y", e_pool, d));
  new_y = nn::dense(t, params_, prefix + ".y_out", new_y, d);

  // Residuals, norms, feed-forward on each channel.
  Var x1 = nn::layer_norm(t, params_, prefix + ".x_ln1",
                          t.add(s.x, t.scale_rows(new_x, node_mask)));
  Var x2 = nn::layer_norm(t, params_, prefix + ".x_ln2",
                          t.add(x1, nn::mlp2(t, params_, prefix + ".x_ffn", x1, cfg_.hidden_size, d)));
  x2 = t.scale_rows(x2, node_mask);

  Var e1 = nn::layer_norm(t, params_, prefix + ".e_ln1",
                          t.add(s.e, t.scale_rows(new_e, pair_mask)));
  Var e2 = nn::layer_norm(t, params_, prefix + ".e_ln2",
                          t.add(e1, nn::mlp2(t, params_, prefix + ".e_ffn", e1, cfg_.hidden_size, d)));
  e2 = t.scale_rows(e2, pair_mask);

  Var y1 = nn::layer_norm(t, params_, prefix + ".y_ln1", t.add(s.y, new_y));
  Var y2 = nn::layer_norm(t, params_, prefix + ".y_ln2",
                          t.add(y1, nn::mlp2(t, params_, prefix + ".y_ffn", y1, cfg_.hidden_size, d)));

  return {x2, e2, y2};
}

GraphVae::EncoderState GraphVae::transformer_stack(Tape& t, EncoderState s, const BatchIndex& ix) {
  for (int l = 0; l < cfg_.layers; ++l)
    s = graph_transformer_layer(t, "enc.gt" + std::to_string(l), s, ix);
  return s;
}

Var GraphVae::cross_attention_block(Tape& t, const std::string& prefix, Var query, Var keys,
                                    const std::vector<int>& key_group,
                                    const std::vector<std::uint8_t>& key_mask, int n_groups) {
  const int d = cfg_.input_size;
  const int heads = cfg_.heads;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(d / heads));

  Var q = nn::dense_nobias(t, params_, prefix + ".q", query, d);
  Var k = nn::dense_nobias(t, params_, prefix + ".k", keys, d);
  Var v = nn::dense_nobias(t, params_, prefix + ".v", keys, d);
  Var scores = t.scale(t.heads_dot(t.gather_rows(q, key_group), k, heads), inv_sqrt_dh);
  Var attn = t.group_softmax(scores, key_group, n_groups, key_mask);
  Var ctx = t.group_sum(t.mul_headwise(v, attn, heads), key_group, n_groups);
  ctx = nn::dense(t, params_, prefix + ".out", ctx, d);

  Var q1 = nn::layer_norm(t, params_, prefix + ".ln1", t.add(query, ctx));
  Var q2 = nn::layer_norm(
      t, params_, prefix + ".ln2",
      t.add(q1, nn::mlp2(t, params_, prefix + ".ffn", q1, cfg_.hidden_size, d)));
  return q2;
}

GraphVae::Latent GraphVae::readout(Tape& t, const EncoderState& s, const BatchIndex& ix) {
  // Node readout attends over node rows; edge readout over the strict upper
  // triangle of unmasked pair rows. No positional information is injected, so
  // both are permutation-invariant.
  Var r_x = s.y;
  for (int blk = 0; blk < cfg_.readout_blocks; ++blk)
    r_x = cross_attention_block(t, "ro.node" + std::to_string(blk), r_x, s.x, ix.node_graph,
                                ix.node_mask, ix.b);

  std::vector<int> tri_rows, tri_group;
  for (int b = 0; b < ix.b; ++b)
    for (int i = 0; i < ix.sizes[b]; ++i)
      for (int j = i + 1; j < ix.sizes[b]; ++j) {
        tri_rows.push_back((b * ix.n + i) * ix.n + j);
        tri_group.push_back(b);
      }
  Var e_tri = t.gather_rows(s.e, tri_rows);
  std::vector<std::uint8_t> tri_mask(tri_rows.size(), 1);
  Var r_e = s.y;
  for (int blk = 0; blk < cfg_.readout_blocks; ++blk)
    r_e = cross_attention_block(t, "ro.edge" + std::to_string(blk), r_e, e_tri, tri_group,
                                tri_mask, ix.b);

  r_x = nn::dense(t, params_, "ro.node_proj",
                  nn::layer_norm(t, params_, "ro.node_norm", r_x), cfg_.input_size);
  r_e = nn::dense(t, params_, "ro.edge_proj",
                  nn::layer_norm(t, params_, "ro.edge_norm", r_e), cfg_.input_size);
  Var fused = t.concat_cols(r_x, r_e);

  Latent out;
  out.mu = nn::dense(t, params_, "head.mu", fused, cfg_.latent_dim);
  if (cfg_.variational) {
    out.logvar = t.clamp(nn::dense(t, params_, "head.logvar", fused, cfg_.latent_dim),
                         -cfg_.logvar_clamp, cfg_.logvar_clamp);
    out.sigma = t.exp(t.scale(out.logvar, 0.5));
  } else {
    out.logvar = t.constant(Mat::Zero(ix.b, cfg_.latent_dim));
    out.sigma = t.constant(Mat::Zero(ix.b, cfg_.latent_dim));
  }
  return out;
}

GraphVae::Latent GraphVae::encode(Tape& t, const GraphBatch& batch, const BatchIndex& ix) {
  EncoderState s = embed_inputs(t, batch, ix);
  s = transformer_stack(t, s, ix);
  return readout(t, s, ix);
}

// ---------------------------------------------------------------------------
// Latent bottleneck

Var GraphVae::reparameterize(Tape& t, const Latent& latent, RandomStream& rng) {
  if (!cfg_.variational) return latent.mu;
  Mat eps(latent.mu.rows(), latent.mu.cols());
  for (int r = 0; r < eps.rows(); ++r)
    for (int c = 0; c < eps.cols(); ++c) eps(r, c) = rng.normal();
  return t.add(latent.mu, t.mul(latent.sigma, t.constant(std::move(eps))));
}

Var GraphVae::predict_size(Tape& t, Var z) {
  Var prefix = t.slice_cols(z, 0, cfg_.d_s);
  return nn::mlp2(t, params_, "size.pred", prefix, 4 * cfg_.d_s, 1);
}

Var GraphVae::reinject_size(Tape& t, Var z, Var log_size) {
  Var enc = nn::mlp2(t, params_, "size.enc", log_size, 4 * cfg_.d_s, cfg_.d_s);
  return t.concat_cols(enc, t.slice_cols(z, cfg_.d_s, cfg_.latent_dim - cfg_.d_s));
}

// ---------------------------------------------------------------------------
// Decoder

Var GraphVae::self_attention_block(Tape& t, const std::string& prefix, Var x,
                                   const BatchIndex& ix) {
  const int d = cfg_.input_size;
  const int heads = cfg_.heads;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(d / heads));
  const Vec node_mask = mask_to_vec(ix.node_mask);

  Var q = nn::dense_nobias(t, params_, prefix + ".q", x, d);
  Var k = nn::dense_nobias(t, params_, prefix + ".k", x, d);
  Var v = nn::dense_nobias(t, params_, prefix + ".v", x, d);
  Var scores = t.scale(t.heads_dot(t.gather_rows(q, ix.pair_i), t.gather_rows(k, ix.pair_j), heads),
                       inv_sqrt_dh);
  Var attn = t.group_softmax(scores, ix.pair_rowblock, ix.b * ix.n, ix.pair_mask);
  Var ctx = t.group_sum(t.mul_headwise(t.gather_rows(v, ix.pair_j), attn, heads),
                        ix.pair_rowblock, ix.b * ix.n);
  ctx = nn::dense(t, params_, prefix + ".out", ctx, d);

  Var x1 = nn::layer_norm(t, params_, prefix + ".ln1", t.add(x, t.scale_rows(ctx, node_mask)));
  Var x2 = nn::layer_norm(
      t, params_, prefix + ".ln2",
      t.add(x1, nn::mlp2(t, params_, prefix + ".ffn", x1, cfg_.hidden_size, d)));
  return t.scale_rows(x2, node_mask);
}

Var GraphVae::readin(Tape& t, Var z, const BatchIndex& ix) {
  const int d = cfg_.input_size;
  Var proj = nn::dense(t, params_, "ri.proj", z, d);
  Var seq = t.gather_rows(proj, ix.node_graph);  // broadcast one row per node slot

  Mat pe(ix.b * ix.n, d);
  const Mat table = sinusoidal_position_encoding(ix.n, d);
  for (int b = 0; b < ix.b; ++b)
    for (int i = 0; i < ix.n; ++i) pe.row(b * ix.n + i) = table.row(i);
  seq = t.add(seq, t.constant(std::move(pe)));
  for (int blk = 0; blk < cfg_.readin_blocks; ++blk)
    seq = self_attention_block(t, "ri.sa" + std::to_string(blk), seq, ix);
  return seq;
}

std::pair<Var, Var> GraphVae::split_and_pair(Tape& t, Var seq, const BatchIndex& ix) {
  const int d = cfg_.input_size;
  if (d % 2 != 0) throw ConfigError("split_and_pair: width must be even");
  Var x_half = t.slice_cols(seq, 0, d / 2);
  Var e_half = t.slice_cols(seq, d / 2, d / 2);
  Var phi = t.concat_cols(t.gather_rows(e_half, ix.pair_i), t.gather_rows(e_half, ix.pair_j));
  Var phi_sym = t.scale(t.add(phi, t.gather_rows(phi, ix.pair_transpose)), 0.5);
  Var phi_x = nn::dense(t, params_, "dec.phi_x", x_half, d);
  return {phi_x, phi_sym};
}

GraphVae::DecoderState GraphVae::heads_from(Tape& t, Var phi_x, Var phi_e, Var seq,
                                            const BatchIndex& ix) {
  EncoderState s{phi_x, phi_e,
                 t.gather_rows(nn::weight(t, params_, "dec.y0", 1, cfg_.input_size),
                               std::vector<int>(ix.b, 0))};
  s.x = t.scale_rows(s.x, mask_to_vec(ix.node_mask));
  s.e = t.scale_rows(s.e, mask_to_vec(ix.pair_mask));
  for (int l = 0; l < cfg_.dec_layers(); ++l)
    s = graph_transformer_layer(t, "dec.gt" + std::to_string(l), s, ix);

  DecoderState out;
  out.seq = seq;
  out.phi_x = phi_x;
  out.phi_e = phi_e;
  out.node_logits = nn::mlp2(t, params_, "head.node", s.x, cfg_.hidden_size, cfg_.n_node_classes);
  Var edge_raw = nn::mlp2(t, params_, "head.edge", s.e, cfg_.hidden_size, cfg_.n_edge_classes);
  out.edge_logits = t.scale(t.add(edge_raw, t.gather_rows(edge_raw, ix.pair_transpose)), 0.5);
  if (cfg_.molecule_heads) {
    out.charge_logits = nn::mlp2(t, params_, "head.charge", s.x, cfg_.hidden_size, 3);
    out.hydrogen_logits = nn::mlp2(t, params_, "head.hydrogen", s.x, cfg_.hidden_size, 4);
  }
  return out;
}

GraphVae::DecoderState GraphVae::refine_and_classify(Tape& t, Var phi_x, Var phi_e,
                                                     const BatchIndex& ix) {
  return heads_from(t, phi_x, phi_e, phi_x, ix);
}

GraphVae::DecoderState GraphVae::decode_forward(Tape& t, Var z, const BatchIndex& ix) {
  Var seq = readin(t, z, ix);
  auto [phi_x, phi_e] = split_and_pair(t, seq, ix);
  DecoderState out = heads_from(t, phi_x, phi_e, seq, ix);
  out.seq = seq;
  return out;
}

// ---------------------------------------------------------------------------
// Inference conveniences

Mat GraphVae::encode_mean_batch(const std::vector<Graph>& graphs) {
  GraphBatch batch = pad_batch(graphs, cfg_.n_node_classes, cfg_.n_edge_classes,
                               cfg_.batch_options());
  BatchIndex ix = BatchIndex::from_sizes(batch.sizes, batch.n_max);
  Tape t;
  Latent latent = encode(t, batch, ix);
  return latent.mu.value();
}

Vec GraphVae::encode_mean(const Graph& g) {
  Mat mu = encode_mean_batch({g});
  return mu.row(0).transpose();
}

GraphVae::DecodeResult GraphVae::decode(const Vec& z) {
  if (z.size() != cfg_.latent_dim) throw ArgumentError("decode: latent dimension mismatch");
  DecodeResult result;
  Mat z_row = z.transpose();

  // Size first: round(exp(s_hat)), clamped to [1, n_cap].
  {
    Tape t;
    Var zc = t.constant(z_row);
    result.log_size = predict_size(t, zc).value()(0, 0);
  }
  const double raw = std::round(std::exp(result.log_size));
  result.n = static_cast<int>(std::min<double>(std::max(raw, 1.0), cfg_.n_cap));
  result.size_clamped = raw < 1.0 || raw > cfg_.n_cap;

  Tape t;
  Var zc = t.constant(z_row);
  // The predicted log-size re-enters as a constant; no gradient path exists
  // between the prediction and the reinjection at inference.
  Var s_hat = t.constant(Mat::Constant(1, 1, result.log_size));
  Var z_inj = reinject_size(t, zc, s_hat);
  BatchIndex ix = BatchIndex::from_sizes({result.n}, result.n);
  DecoderState dec = decode_forward(t, z_inj, ix);

  Graph g(result.n);
  const Mat& node_logits = dec.node_logits.value();
  const Mat& edge_logits = dec.edge_logits.value();
  for (int i = 0; i < result.n; ++i) g.node_classes[i] = argmax_lowest(node_logits, i);
  for (int i = 0; i < result.n; ++i)
    for (int j = i + 1; j < result.n; ++j)
      g.set_edge(i, j, argmax_lowest(edge_logits, i * result.n + j));

  if (cfg_.molecule_heads && cfg_.n_edge_classes > chem::kBondAromatic) {
    bool any = false;
    for (int i = 0; i < result.n && !any; ++i)
      for (int j = 0; j < result.n; ++j)
        if (g.edge(i, j) == chem::kBondAromatic) {
          any = true;
          break;
        }
    if (any) {
      const Mat& charge = dec.charge_logits->value();
      const Mat& hydro = dec.hydrogen_logits->value();
      g.aromatic_annotations.resize(result.n);
      for (int i = 0; i < result.n; ++i) {
        bool aromatic = false;
        for (int j = 0; j < result.n; ++j)
          if (g.edge(i, j) == chem::kBondAromatic) aromatic = true;
        if (aromatic)
          g.aromatic_annotations[i] =
              AromaticAnnotation{argmax_lowest(charge, i) - 1, argmax_lowest(hydro, i)};
      }
    }
  }
  result.graph = std::move(g);
  return result;
}

Graph GraphVae::reconstruct(const Graph& g) { return decode(encode_mean(g)).graph; }

}  // namespace glav
