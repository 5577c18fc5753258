// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/batch.hpp"
#include "glav/nn.hpp"

#include <optional>
#include <string>
#include <vector>

namespace glav {

/// Architecture knobs. input_size is the channel width of the node, edge and
/// global representations; hidden_size the feed-forward/MLP width.
struct ModelConfig {
  int n_node_classes = 4;
  int n_edge_classes = 2;
  int k_lap = 8;
  int k_rw = 8;
  bool use_attributes = false;
  int attr_dim = 0;
  bool molecule_heads = false;

  int input_size = 128;
  int hidden_size = 128;
  int layers = 3;
  int decoder_layers = -1;  // -1: same as layers
  int heads = 4;
  int latent_dim = 128;
  int d_s = 8;
  int readout_blocks = 1;
  int readin_blocks = 1;
  int n_cap = 256;
  double logvar_clamp = 10.0;
  bool variational = true;

  int dec_layers() const { return decoder_layers < 0 ? layers : decoder_layers; }
  BatchOptions batch_options() const {
    return BatchOptions{k_lap, k_rw, use_attributes, molecule_heads, attr_dim};
  }
  void validate() const;
};

/// Row indexing for a padded batch: node rows are b*N+i, pair rows are
/// (b*N+i)*N+j. Precomputes the index vectors the grouped tape ops need.
struct BatchIndex {
  int b = 0;
  int n = 0;
  std::vector<std::uint8_t> node_mask;   // BN
  std::vector<std::uint8_t> pair_mask;   // BN^2, both endpoints real
  std::vector<int> pair_i;               // node row of i per pair row
  std::vector<int> pair_j;               // node row of j per pair row
  std::vector<int> pair_transpose;       // pair row of (j, i)
  std::vector<int> node_graph;           // graph id per node row
  std::vector<int> pair_graph;           // graph id per pair row
  std::vector<int> pair_rowblock;        // (b*N+i) per pair row
  std::vector<int> sizes;

  static BatchIndex from_sizes(const std::vector<int>& sizes, int n_max);
};

Mat sinusoidal_position_encoding(int length, int dim);

/// Graph-level variational autoencoder: graph-transformer encoder with a
/// dual-transformer readout, a size-disentangled latent, and a broadcast
/// readin decoder with classification heads.
class GraphVae {
 public:
  struct Latent {
    ad::Var mu;      // B x d_z
    ad::Var logvar;  // B x d_z (clamped); unused in AE mode
    ad::Var sigma;   // B x d_z; zeros in AE mode
  };

  struct EncoderState {
    ad::Var x;  // BN x d
    ad::Var e;  // BN^2 x d
    ad::Var y;  // B x d
  };

  struct DecoderState {
    ad::Var seq;          // BN x d readin output
    ad::Var phi_x;        // BN x d
    ad::Var phi_e;        // BN^2 x d, exactly symmetric
    ad::Var node_logits;  // BN x n_c
    ad::Var edge_logits;  // BN^2 x n_e, symmetrized
    std::optional<ad::Var> charge_logits;    // BN x 3
    std::optional<ad::Var> hydrogen_logits;  // BN x 4
  };

  GraphVae(ModelConfig cfg, std::uint64_t init_seed = 1);

  const ModelConfig& config() const { return cfg_; }
  ModelConfig& config() { return cfg_; }
  nn::ParameterStore& params() { return params_; }
  const nn::ParameterStore& params() const { return params_; }

  // -- encoder ---------------------------------------------------------------
  EncoderState embed_inputs(ad::Tape& t, const GraphBatch& batch, const BatchIndex& ix);
  EncoderState transformer_stack(ad::Tape& t, EncoderState s, const BatchIndex& ix);
  Latent readout(ad::Tape& t, const EncoderState& s, const BatchIndex& ix);
  Latent encode(ad::Tape& t, const GraphBatch& batch, const BatchIndex& ix);

  // -- latent bottleneck -----------------------------------------------------
  ad::Var reparameterize(ad::Tape& t, const Latent& latent, RandomStream& rng);
  ad::Var predict_size(ad::Tape& t, ad::Var z);                    // B x 1 log-size
  ad::Var reinject_size(ad::Tape& t, ad::Var z, ad::Var log_size); // replaces dims [0, d_s)

  // -- decoder ---------------------------------------------------------------
  ad::Var readin(ad::Tape& t, ad::Var z, const BatchIndex& ix);
  std::pair<ad::Var, ad::Var> split_and_pair(ad::Tape& t, ad::Var seq, const BatchIndex& ix);
  DecoderState refine_and_classify(ad::Tape& t, ad::Var phi_x, ad::Var phi_e,
                                   const BatchIndex& ix);
  DecoderState decode_forward(ad::Tape& t, ad::Var z, const BatchIndex& ix);

  // -- inference conveniences (build their own tapes) --------------------------
  Vec encode_mean(const Graph& g);
  Mat encode_mean_batch(const std::vector<Graph>& graphs);

  struct DecodeResult {
    Graph graph;
    double log_size = 0.0;
    int n = 0;
    bool size_clamped = false;
  };
  DecodeResult decode(const Vec& z);
  Graph decode_graph(const Vec& z) { return decode(z).graph; }

  /// One graph -> reconstruction through z_mu (no sampling).
  Graph reconstruct(const Graph& g);

 private:
  EncoderState graph_transformer_layer(ad::Tape& t, const std::string& prefix, EncoderState s,
                                       const BatchIndex& ix);
  ad::Var cross_attention_block(ad::Tape& t, const std::string& prefix, ad::Var query,
                                ad::Var keys, const std::vector<int>& key_group,
                                const std::vector<std::uint8_t>& key_mask, int n_groups);
  ad::Var self_attention_block(ad::Tape& t, const std::string& prefix, ad::Var x,
                               const BatchIndex& ix);
  DecoderState heads_from(ad::Tape& t, ad::Var phi_x, ad::Var phi_e, ad::Var seq,
                          const BatchIndex& ix);

  ModelConfig cfg_;
  nn::ParameterStore params_;
};

}  // namespace glav
