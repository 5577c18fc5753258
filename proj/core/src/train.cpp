// SPDX-License-Identifier: Apache-2.0
#include "glav/train.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>

namespace glav {

using ad::Tape;
using ad::Var;
using nlohmann::json;

namespace {

constexpr char kCheckpointMagic[] = "GLAVCKP1";

json model_config_json(const ModelConfig& c) {
  return json{{"n_node_classes", c.n_node_classes},
              {"n_edge_classes", c.n_edge_classes},
              {"k_lap", c.k_lap},
              {"k_rw", c.k_rw},
              {"use_attributes", c.use_attributes},
              {"attr_dim", c.attr_dim},
              {"molecule_heads", c.molecule_heads},
              {"input_size", c.input_size},
              {"hidden_size", c.hidden_size},
              {"layers", c.layers},
              {"decoder_layers", c.decoder_layers},
              {"heads", c.heads},
              {"latent_dim", c.latent_dim},
              {"d_s", c.d_s},
              {"readout_blocks", c.readout_blocks},
              {"readin_blocks", c.readin_blocks},
              {"n_cap", c.n_cap},
              {"variational", c.variational}};
}

}  // namespace

DatasetSplits split_dataset(std::vector<Graph> graphs, double train_frac, double valid_frac,
                            double test_frac, std::uint64_t seed) {
  if (train_frac < 0 || valid_frac < 0 || test_frac < 0 ||
      train_frac + valid_frac + test_frac > 1.0 + 1e-9)
    throw ArgumentError("split fractions must be non-negative and sum to at most 1");
  RandomStream rng(seed ^ 0x5914ull);
  rng.shuffle(graphs);
  DatasetSplits out;
  const auto n = graphs.size();
  const auto n_train = std::min(n, static_cast<std::size_t>(std::llround(train_frac * n)));
  const auto n_valid = std::min(n - n_train, static_cast<std::size_t>(std::llround(valid_frac * n)));
  const auto n_test =
      std::min(n - n_train - n_valid, static_cast<std::size_t>(std::llround(test_frac * n)));
  out.train.assign(graphs.begin(), graphs.begin() + n_train);
  out.valid.assign(graphs.begin() + n_train, graphs.begin() + n_train + n_valid);
  out.test.assign(graphs.begin() + n_train + n_valid, graphs.begin() + n_train + n_valid + n_test);
  return out;
}

Trainer::Trainer(GraphVae& model, LossConfig loss, TrainOptions opts, std::string run_dir)
    : model_(model), loss_(loss), opts_(opts), rng_(opts.seed), run_dir_(std::move(run_dir)) {
  loss_.validate();
  // Sane schedule defaults for direct train_step use; fit() rescales the
  // cycle lengths from epochs to steps once it knows the dataset size.
  loss_.lr_peak = opts_.learning_rate;
  loss_.lr_min = opts_.learning_rate * opts_.lr_min_ratio;
  loss_.lr_cycle_steps = std::max<std::int64_t>(1, std::llround(opts_.lr_cycle_epochs));
  loss_.beta_cycle_steps = std::max<std::int64_t>(1, std::llround(opts_.beta_cycle_epochs));
  loss_.warmup_steps = 0;
  if (!run_dir_.empty()) {
    std::filesystem::create_directories(run_dir_);
    metrics_.open(run_dir_ + "/metrics.jsonl", std::ios::app);
  }
}

LossReport Trainer::train_step(const std::vector<Graph>& batch_graphs) {
  const ModelConfig& mc = model_.config();
  GraphBatch batch =
      pad_batch(batch_graphs, mc.n_node_classes, mc.n_edge_classes, mc.batch_options());
  BatchIndex ix = BatchIndex::from_sizes(batch.sizes, batch.n_max);

  Tape t;
  GraphVae::Latent latent = model_.encode(t, batch, ix);
  Var z = model_.reparameterize(t, latent, rng_);
  Var s_hat = model_.predict_size(t, z);

  Mat s_true(ix.b, 1);
  for (int b = 0; b < ix.b; ++b) s_true(b, 0) = std::log(static_cast<double>(ix.sizes[b]));
  Var z_inj = model_.reinject_size(t, z, t.constant(s_true));
  GraphVae::DecoderState dec = model_.decode_forward(t, z_inj, ix);

  NodeEdgeLossVars cls = node_edge_losses(t, dec, batch, ix, loss_, rng_);
  Var l_size = size_loss(t, s_hat, t.constant(s_true), loss_.smooth_l1_beta);

  const double beta = mc.variational ? beta_schedule(step_, loss_) : 0.0;
  Var l_node = t.add(cls.node, t.add(t.scale(cls.charge, loss_.charge_weight),
                                     t.scale(cls.hydrogen, loss_.hydrogen_weight)));
  Var total = t.add(t.add(l_node, t.scale(cls.edge, loss_.edge_weight)), l_size);
  Var l_kl = t.constant(Mat::Zero(1, 1));
  if (mc.variational) {
    l_kl = kl_loss(t, latent);
    total = t.add(total, t.scale(l_kl, beta));
  }

  LossReport report;
  report.node_loss = l_node.value()(0, 0);
  report.edge_loss = cls.edge.value()(0, 0);
  report.size_loss = l_size.value()(0, 0);
  report.kl_loss = l_kl.value()(0, 0);
  report.total = total.value()(0, 0);
  report.charge_loss = cls.charge.value()(0, 0);
  report.hydrogen_loss = cls.hydrogen.value()(0, 0);
  report.beta = beta;
  report.n_negative_sampled = cls.n_negative_sampled;
  report.n_real_edges = cls.n_real_edges;

  if (!std::isfinite(report.total)) {
    dump_diagnostics(batch_graphs, report);
    throw Error("non-finite loss at step " + std::to_string(step_) +
                "; offending batch dumped under " + run_dir_);
  }

  t.backward(total);
  const double lr = lr_schedule(step_, loss_);
  optim_.step(model_.params(), t, lr, opts_.grad_clip);
  ++step_;
  log_report(report, lr);
  return report;
}

double Trainer::validate(const std::vector<Graph>& graphs) {
  if (graphs.empty()) return 0.0;
  int exact = 0;
  for (const auto& g : graphs)
    if (model_.reconstruct(g) == g) ++exact;
  return static_cast<double>(exact) / static_cast<double>(graphs.size());
}

TrainResult Trainer::fit(const DatasetSplits& data) {
  if (data.train.empty()) throw ArgumentError("fit: empty training split");
  TrainResult result;
  const auto started = std::chrono::steady_clock::now();
  const auto steps_per_epoch = std::max<std::int64_t>(
      1, static_cast<std::int64_t>((data.train.size() + opts_.batch_size - 1) / opts_.batch_size));
  loss_.lr_cycle_steps =
      std::max<std::int64_t>(1, std::llround(opts_.lr_cycle_epochs * steps_per_epoch));
  loss_.beta_cycle_steps =
      std::max<std::int64_t>(1, std::llround(opts_.beta_cycle_epochs * steps_per_epoch));
  loss_.warmup_steps = std::llround(opts_.warmup_frac * loss_.lr_cycle_steps);
  loss_.lr_peak = opts_.learning_rate;
  loss_.lr_min = opts_.learning_rate * opts_.lr_min_ratio;

  // Memorization runs have no validation split; fall back to (a cap of) the
  // training set so best-checkpoint selection still works.
  const std::vector<Graph>* valid = &data.valid;
  std::vector<Graph> valid_fallback;
  if (valid->empty()) {
    valid_fallback.assign(data.train.begin(),
                          data.train.begin() + std::min<std::size_t>(data.train.size(), 512));
    valid = &valid_fallback;
  }

  const std::string best_path = run_dir_.empty() ? "" : run_dir_ + "/best.ckpt";
  const std::string last_path = run_dir_.empty() ? "" : run_dir_ + "/last.ckpt";

  bool stop = false;
  for (; epoch_ < opts_.epochs && !stop; ++epoch_) {
    // Fresh identity order each epoch: the shuffled order then depends only on
    // the RNG state, which keeps resumed runs on the original trajectory.
    std::vector<int> order(data.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    rng_.shuffle(order);
    for (std::size_t off = 0; off < order.size();
         off += static_cast<std::size_t>(opts_.batch_size)) {
      std::vector<Graph> batch;
      for (std::size_t k = off; k < std::min(order.size(), off + opts_.batch_size); ++k)
        batch.push_back(data.train[order[k]]);
      train_step(batch);
      if (opts_.max_seconds > 0) {
        const auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::steady_clock::now() - started);
        if (elapsed.count() >= opts_.max_seconds) {
          stop = true;
          break;
        }
      }
    }
    if ((epoch_ + 1) % opts_.eval_every == 0 || stop || epoch_ + 1 == opts_.epochs) {
      const double acc = validate(*valid);
      if (metrics_.is_open()) {
        metrics_ << json{{"step", step_}, {"epoch", epoch_ + 1}, {"valid_accuracy", acc}}.dump()
                 << '\n';
        metrics_.flush();
      }
      if (acc > best_acc_) {
        best_acc_ = acc;
        if (!best_path.empty()) save_checkpoint(best_path);
      }
      if (opts_.target_accuracy > 0.0 && acc >= opts_.target_accuracy) {
        result.reached_target = true;
        stop = true;
      }
    }
  }
  if (!last_path.empty()) save_checkpoint(last_path);
  result.steps = step_;
  result.epochs_run = epoch_;
  result.best_valid_accuracy = std::max(best_acc_, 0.0);
  result.best_checkpoint = best_acc_ >= 0.0 && !best_path.empty() ? best_path : last_path;
  result.last_checkpoint = last_path;
  return result;
}

void Trainer::log_report(const LossReport& r, double lr) {
  if (!metrics_.is_open() || step_ % std::max(1, opts_.log_every) != 0) return;
  metrics_ << json{{"step", step_},
                   {"epoch", epoch_},
                   {"node", r.node_loss},
                   {"edge", r.edge_loss},
                   {"size", r.size_loss},
                   {"kl", r.kl_loss},
                   {"total", r.total},
                   {"beta", r.beta},
                   {"lr", lr},
                   {"n_neg", r.n_negative_sampled},
                   {"n_edges", r.n_real_edges}}
                  .dump()
           << '\n';
}

void Trainer::dump_diagnostics(const std::vector<Graph>& batch, const LossReport& report) {
  if (run_dir_.empty()) return;
  write_dataset(run_dir_ + "/diagnostic_batch.graphs", batch);
  std::ofstream info(run_dir_ + "/diagnostic.json");
  info << json{{"step", step_},
               {"node", report.node_loss},
               {"edge", report.edge_loss},
               {"size", report.size_loss},
               {"kl", report.kl_loss}}
              .dump(2);
}

void Trainer::save_checkpoint(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, 8);
  nn::write_string(out, model_config_json(model_.config()).dump());
  out.write(reinterpret_cast<const char*>(&step_), sizeof(step_));
  const std::int64_t epoch64 = epoch_;
  out.write(reinterpret_cast<const char*>(&epoch64), sizeof(epoch64));
  out.write(reinterpret_cast<const char*>(&best_acc_), sizeof(best_acc_));
  nn::write_string(out, rng_.serialize());
  model_.params().save(out);
  optim_.save(out);
}

void Trainer::load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot read checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (std::string(magic, 8) != kCheckpointMagic) throw ArgumentError("bad checkpoint magic");
  const std::string cfg_text = nn::read_string(in);
  if (cfg_text != model_config_json(model_.config()).dump())
    throw ConfigError("checkpoint was written with a different model configuration");
  in.read(reinterpret_cast<char*>(&step_), sizeof(step_));
  std::int64_t epoch64 = 0;
  in.read(reinterpret_cast<char*>(&epoch64), sizeof(epoch64));
  epoch_ = static_cast<int>(epoch64);
  in.read(reinterpret_cast<char*>(&best_acc_), sizeof(best_acc_));
  rng_.deserialize(nn::read_string(in));
  model_.params().load(in);
  optim_.load(in);
}

void Trainer::load_model(const std::string& path, GraphVae& model) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot read checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (std::string(magic, 8) != kCheckpointMagic) throw ArgumentError("bad checkpoint magic");
  const std::string cfg_text = nn::read_string(in);
  if (cfg_text != model_config_json(model.config()).dump())
    throw ConfigError("checkpoint was written with a different model configuration");
  std::int64_t step64 = 0, epoch64 = 0;
  double best = 0.0;
  in.read(reinterpret_cast<char*>(&step64), sizeof(step64));
  in.read(reinterpret_cast<char*>(&epoch64), sizeof(epoch64));
  in.read(reinterpret_cast<char*>(&best), sizeof(best));
  (void)nn::read_string(in);
  model.params().load(in);
}

}  // namespace glav
