// SPDX-License-Identifier: Apache-2.0
#include "glav/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

namespace glav {

namespace {

struct KeyBinding {
  std::string name;
  std::function<void(Config&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw ConfigError("malformed number: " + v);
    return x;
  } catch (const std::logic_error&) {
    throw ConfigError("malformed number: " + v);
  }
}

int parse_int(const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw ConfigError("malformed integer: " + v);
    return static_cast<int>(x);
  } catch (const std::logic_error&) {
    throw ConfigError("malformed integer: " + v);
  }
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("malformed boolean: " + v);
}

std::string fmt(double x) {
  std::ostringstream ss;
  ss << x;
  return ss.str();
}

const std::vector<KeyBinding>& bindings() {
  static const std::vector<KeyBinding> table = {
#define GLAV_KEY_D(name) \
  {#name, [](Config& c, const std::string& v) { c.name = parse_double(v); }, \
   [](const Config& c) { return fmt(c.name); }}
#define GLAV_KEY_I(name) \
  {#name, [](Config& c, const std::string& v) { c.name = parse_int(v); }, \
   [](const Config& c) { return std::to_string(c.name); }}
#define GLAV_KEY_B(name) \
  {#name, [](Config& c, const std::string& v) { c.name = parse_bool(v); }, \
   [](const Config& c) { return c.name ? std::string("true") : std::string("false"); }}
#define GLAV_KEY_S(name) \
  {#name, [](Config& c, const std::string& v) { c.name = v; }, \
   [](const Config& c) { return c.name; }}
      GLAV_KEY_S(dataset_kind),
      GLAV_KEY_S(node_vocab),
      GLAV_KEY_S(bond_mode),
      GLAV_KEY_I(n_node_classes),
      GLAV_KEY_I(n_edge_classes),
      GLAV_KEY_B(use_node_attributes),
      GLAV_KEY_S(mode),
      GLAV_KEY_S(optimizer),
      GLAV_KEY_D(learning_rate),
      GLAV_KEY_I(batch_size),
      GLAV_KEY_I(latent_dimension),
      GLAV_KEY_I(encoder_hidden_size),
      GLAV_KEY_I(encoder_input_size),
      GLAV_KEY_I(graph_transformer_layers),
      GLAV_KEY_I(transformer_heads),
      GLAV_KEY_D(beta),
      GLAV_KEY_D(lr_cycle_length),
      GLAV_KEY_D(beta_cycle_length),
      GLAV_KEY_D(ratio_negative_edges),
      GLAV_KEY_D(edge_loss_weight),
      GLAV_KEY_D(train_split),
      GLAV_KEY_D(valid_split),
      GLAV_KEY_D(test_split),
      GLAV_KEY_I(decoder_layers),
      GLAV_KEY_I(readout_blocks),
      GLAV_KEY_I(readin_blocks),
      GLAV_KEY_I(d_s),
      GLAV_KEY_I(k_lap),
      GLAV_KEY_I(k_rw),
      GLAV_KEY_I(n_cap),
      GLAV_KEY_D(gamma_focal),
      GLAV_KEY_D(smooth_l1_beta),
      GLAV_KEY_I(epochs),
      GLAV_KEY_D(warmup_frac),
      GLAV_KEY_D(lr_min_ratio),
      GLAV_KEY_D(grad_clip),
      GLAV_KEY_I(eval_every),
      GLAV_KEY_I(log_every),
      GLAV_KEY_D(target_accuracy),
      GLAV_KEY_I(max_seconds),
      {"seed",
       [](Config& c, const std::string& v) {
         try {
           c.seed = std::stoull(v);
         } catch (const std::logic_error&) {
           throw ConfigError("malformed seed: " + v);
         }
       },
       [](const Config& c) { return std::to_string(c.seed); }},
#undef GLAV_KEY_D
#undef GLAV_KEY_I
#undef GLAV_KEY_B
#undef GLAV_KEY_S
  };
  return table;
}

}  // namespace

void Config::apply_line(const std::string& key, const std::string& value) {
  for (const auto& b : bindings()) {
    if (b.name == key) {
      b.set(*this, value);
      return;
    }
  }
  throw ConfigError("unknown config key: " + key);
}

void Config::apply_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected `key = value`: " + line);
    apply_line(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void Config::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  apply_text(buffer.str());
}

std::string Config::to_text() const {
  std::ostringstream out;
  for (const auto& b : bindings()) out << b.name << " = " << b.get(*this) << '\n';
  return out.str();
}

chem::MoleculeVocab Config::molecule_vocab() const {
  chem::MoleculeVocab vocab;
  vocab.aromatic_mode = bond_mode == "aromatic";
  if (bond_mode != "aromatic" && bond_mode != "kekulized")
    throw ConfigError("bond_mode must be aromatic or kekulized");
  std::stringstream ss(node_vocab);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) vocab.elements.push_back(item);
  }
  if (vocab.elements.empty()) throw ConfigError("empty node vocabulary");
  return vocab;
}

ModelConfig Config::model_config() const {
  ModelConfig mc;
  if (optimizer != "adamw") throw ConfigError("only the adamw optimizer is supported");
  if (dataset_kind == "molecule") {
    const auto vocab = molecule_vocab();
    mc.n_node_classes = vocab.n_node_classes();
    mc.n_edge_classes = vocab.n_edge_classes();
    mc.molecule_heads = vocab.aromatic_mode;
    mc.use_attributes = use_node_attributes;
    mc.attr_dim = use_node_attributes ? chem::kElementAttrDim : 0;
  } else if (dataset_kind == "coloring") {
    mc.n_node_classes = kColoringClasses;
    mc.n_edge_classes = kColoringEdgeClasses;
  } else if (dataset_kind == "bn") {
    mc.n_node_classes = kBnNodeClasses;
    mc.n_edge_classes = kBnEdgeClasses;
  } else if (dataset_kind == "generic") {
    mc.n_node_classes = n_node_classes;
    mc.n_edge_classes = n_edge_classes;
  } else {
    throw ConfigError("unknown dataset_kind: " + dataset_kind);
  }
  mc.k_lap = k_lap;
  mc.k_rw = k_rw;
  mc.input_size = encoder_input_size;
  mc.hidden_size = encoder_hidden_size;
  mc.layers = graph_transformer_layers;
  mc.decoder_layers = decoder_layers;
  mc.heads = transformer_heads;
  mc.latent_dim = latent_dimension;
  mc.d_s = d_s;
  mc.readout_blocks = readout_blocks;
  mc.readin_blocks = readin_blocks;
  mc.n_cap = n_cap;
  if (mode != "ae" && mode != "vae") throw ConfigError("mode must be ae or vae");
  mc.variational = mode == "vae";
  mc.validate();
  return mc;
}

LossConfig Config::loss_config() const {
  LossConfig lc;
  lc.gamma = gamma_focal;
  lc.neg_ratio = ratio_negative_edges;
  lc.edge_weight = edge_loss_weight;
  lc.beta_max = mode == "ae" ? 0.0 : beta;
  lc.smooth_l1_beta = smooth_l1_beta;
  lc.validate();
  return lc;
}

TrainOptions Config::train_options() const {
  TrainOptions to;
  to.batch_size = batch_size;
  to.epochs = epochs;
  to.learning_rate = learning_rate;
  to.lr_min_ratio = lr_min_ratio;
  to.warmup_frac = warmup_frac;
  to.lr_cycle_epochs = lr_cycle_length;
  to.beta_cycle_epochs = beta_cycle_length;
  to.train_split = train_split;
  to.valid_split = valid_split;
  to.test_split = test_split;
  to.grad_clip = grad_clip;
  to.seed = seed;
  to.eval_every = eval_every;
  to.log_every = log_every;
  to.target_accuracy = target_accuracy;
  to.max_seconds = max_seconds;
  return to;
}

std::vector<std::string> Config::preset_names() {
  return {"qm9", "pubchem16", "pubchem32", "coloring", "asia-bn",
          "qm9-desk", "coloring-desk", "asia-bn-desk"};
}

Config Config::preset(const std::string& name) {
  Config c;
  auto molecule_defaults = [&](Config& cfg) {
    cfg.dataset_kind = "molecule";
    cfg.node_vocab = "C,N,O,F";
    cfg.use_node_attributes = true;
  };
  if (name == "qm9") {
    molecule_defaults(c);
    c.learning_rate = 2e-4;
    c.batch_size = 64;
    c.latent_dimension = 64;
    c.encoder_hidden_size = 128;
    c.encoder_input_size = 128;
    c.graph_transformer_layers = 2;
    c.transformer_heads = 4;
    c.beta = 1e-5;
    c.lr_cycle_length = 200;
    c.beta_cycle_length = 400;
    c.ratio_negative_edges = 4;
    c.edge_loss_weight = 1.25;
    c.train_split = 0.8;
    c.valid_split = 0.1;
    c.test_split = 0.1;
  } else if (name == "pubchem16") {
    molecule_defaults(c);
    c.node_vocab = "C,N,O,F,P,S,Cl,Br,I,B";
    c.learning_rate = 1e-4;
    c.batch_size = 64;
    c.latent_dimension = 256;
    c.encoder_hidden_size = 512;
    c.encoder_input_size = 128;
    c.graph_transformer_layers = 5;
    c.transformer_heads = 4;
    c.beta = 1e-4;
    c.lr_cycle_length = 200;
    c.beta_cycle_length = 200;
    c.ratio_negative_edges = 4;
    c.edge_loss_weight = 1.25;
    c.train_split = 0.9736;
    c.valid_split = 0.003;
    c.test_split = 0.0234;
  } else if (name == "pubchem32") {
    molecule_defaults(c);
    c.node_vocab = "C,N,O,F,P,S,Cl,Br,I,B";
    c.learning_rate = 1e-4;
    c.batch_size = 256;
    c.latent_dimension = 512;
    c.encoder_hidden_size = 512;
    c.encoder_input_size = 128;
    c.graph_transformer_layers = 7;
    c.transformer_heads = 8;
    c.beta = 1e-5;
    c.lr_cycle_length = 800;
    c.beta_cycle_length = 800;
    c.ratio_negative_edges = 4;
    c.edge_loss_weight = 1.25;
    c.train_split = 0.9978;
    c.valid_split = 0.0011;
    c.test_split = 0.0011;
  } else if (name == "coloring") {
    c.dataset_kind = "coloring";
    c.learning_rate = 1e-4;
    c.batch_size = 64;
    c.latent_dimension = 128;
    c.encoder_hidden_size = 256;
    c.encoder_input_size = 128;
    c.graph_transformer_layers = 3;
    c.transformer_heads = 4;
    c.beta = 1e-4;
    c.lr_cycle_length = 300;
    c.beta_cycle_length = 200;
    c.ratio_negative_edges = 4;
    c.edge_loss_weight = 1.0;
    c.train_split = 0.9375;
    c.valid_split = 0.03125;
    c.test_split = 0.03125;
  } else if (name == "asia-bn") {
    c.dataset_kind = "bn";
    c.learning_rate = 1e-4;
    c.batch_size = 64;
    c.latent_dimension = 64;
    c.encoder_hidden_size = 64;
    c.encoder_input_size = 64;
    c.graph_transformer_layers = 1;
    c.transformer_heads = 1;
    c.beta = 1e-3;
    c.lr_cycle_length = 30;
    c.beta_cycle_length = 30;
    c.ratio_negative_edges = 4;
    c.edge_loss_weight = 1.0;
    c.train_split = 0.9;
    c.valid_split = 0.05;
    c.test_split = 0.05;
    c.epochs = 30;
    c.d_s = 4;
  } else if (name == "qm9-desk") {
    molecule_defaults(c);
    c.learning_rate = 1e-3;
    c.batch_size = 32;
    c.latent_dimension = 64;
    c.encoder_hidden_size = 96;
    c.encoder_input_size = 64;
    c.graph_transformer_layers = 2;
    c.transformer_heads = 4;
    c.beta = 1e-4;
    c.lr_cycle_length = 400;
    c.beta_cycle_length = 100;
    c.edge_loss_weight = 1.25;
    c.train_split = 1.0;
    c.valid_split = 0.0;
    c.test_split = 0.0;
    c.epochs = 400;
    c.d_s = 4;
    c.k_lap = 0;
    c.k_rw = 8;
  } else if (name == "coloring-desk") {
    c.dataset_kind = "coloring";
    c.learning_rate = 1e-3;
    c.batch_size = 64;
    c.latent_dimension = 128;
    c.encoder_hidden_size = 128;
    c.encoder_input_size = 96;
    c.graph_transformer_layers = 3;
    c.transformer_heads = 4;
    c.beta = 1e-4;
    c.lr_cycle_length = 600;
    c.beta_cycle_length = 150;
    c.edge_loss_weight = 1.0;
    c.train_split = 1.0;
    c.valid_split = 0.0;
    c.test_split = 0.0;
    c.epochs = 600;
    c.d_s = 8;
    c.k_lap = 0;
    c.k_rw = 8;
  } else if (name == "asia-bn-desk") {
    c = preset("asia-bn");
    c.learning_rate = 5e-4;
    c.epochs = 40;
    c.lr_cycle_length = 40;
    c.beta_cycle_length = 40;
  } else {
    throw ConfigError("unknown preset: " + name);
  }
  return c;
}

}  // namespace glav
