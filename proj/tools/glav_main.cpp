// SPDX-License-Identifier: Apache-2.0
//
// Unified command-line entry point: training, evaluation, generation and the
// latent-space tools, all driven by one flat configuration.

#include "glav/config.hpp"
#include "glav/edit_distance.hpp"
#include "glav/eval.hpp"
#include "glav/latent_tools.hpp"
#include "glav/manifest.hpp"
#include "glav/plot.hpp"
#include "glav/synthetic.hpp"
#include "glav/train.hpp"
#include "glav/wl_order.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace glav;
using nlohmann::json;

struct CommonArgs {
  std::string preset;
  std::string config_file;
  std::string mode;
  std::string out_root = "runs";
  std::uint64_t seed = std::uint64_t(-1);
  std::vector<std::string> overrides;  // extra key=value pairs
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--preset", args.preset, "named preset (qm9, pubchem16, pubchem32, coloring, asia-bn, *-desk)");
  cmd->add_option("--config", args.config_file, "flat key = value config file");
  cmd->add_option("--mode", args.mode, "ae or vae")->check(CLI::IsMember({"ae", "vae"}));
  cmd->add_option("--out", args.out_root, "output root directory");
  cmd->add_option("--seed", args.seed, "master seed");
  cmd->add_option("--set", args.overrides, "extra config overrides, key=value");
}

Config resolve_config(const CommonArgs& args) {
  Config cfg = args.preset.empty() ? Config() : Config::preset(args.preset);
  if (!args.config_file.empty()) cfg.apply_file(args.config_file);
  for (const auto& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("override must be key=value: " + kv);
    cfg.apply_line(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!args.mode.empty()) cfg.mode = args.mode;
  if (args.seed != std::uint64_t(-1)) cfg.seed = args.seed;
  return cfg;
}

std::string make_run_dir(const std::string& subcommand, const Config& cfg, const CommonArgs& args,
                         const std::string& dataset_path, int argc, char** argv) {
  RunManifest manifest;
  manifest.subcommand = subcommand;
  std::ostringstream cmdline;
  for (int i = 0; i < argc; ++i) cmdline << (i ? " " : "") << argv[i];
  manifest.command_line = cmdline.str();
  manifest.config_text = cfg.to_text();
  manifest.dataset_path = dataset_path;
  manifest.dataset_fingerprint = dataset_path.empty() ? "none" : fingerprint_file(dataset_path);
  manifest.seed = cfg.seed;
  return create_run_dir(args.out_root, manifest);
}

std::vector<Graph> load_or_synthesize(const std::string& dataset, const Config& cfg) {
  if (dataset.rfind("synth:", 0) != 0) return read_dataset(dataset);
  // synth:coloring:count[:nmin[:nmax]] | synth:bn:count | synth:molecule:count
  std::vector<std::string> parts;
  std::stringstream ss(dataset);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() < 3) throw ArgumentError("bad synth spec: " + dataset);
  const std::string kind = parts[1];
  const int count = std::stoi(parts[2]);
  if (kind == "coloring") {
    const int n_min = parts.size() > 3 ? std::stoi(parts[3]) : 4;
    const int n_max = parts.size() > 4 ? std::stoi(parts[4]) : 9;
    return coloring_generate(n_min, n_max, cfg.seed, count);
  }
  if (kind == "bn") return bn_generate(cfg.seed, count);
  if (kind == "molecule") return molecule_generate(cfg.molecule_vocab(), cfg.seed, count);
  throw ArgumentError("unknown synth kind: " + kind);
}

GraphVae load_model(const Config& cfg, const std::string& checkpoint) {
  GraphVae model(cfg.model_config(), cfg.seed + 1);
  Trainer::load_model(checkpoint, model);
  return model;
}

Vec latent_from_input(GraphVae& model, chem::Oracle& oracle, const Config& cfg,
                      const std::string& input) {
  Graph g;
  if (!input.empty() && input.front() == '{')
    g = from_record(input);
  else
    g = oracle.ingest(input, cfg.molecule_vocab());
  return model.encode_mean(g);
}

// ---------------------------------------------------------------------------

int cmd_ingest(const CommonArgs& args, const std::string& input, const std::string& out_file,
               bool skip_invalid) {
  Config cfg = resolve_config(args);
  auto oracle = chem::make_oracle();
  const auto vocab = cfg.molecule_vocab();
  std::ifstream in(input);
  if (!in) throw ArgumentError("cannot open SMILES input: " + input);
  std::ofstream out(out_file);
  if (!out) throw ArgumentError("cannot open output: " + out_file);
  std::string line;
  std::size_t kept = 0, skipped = 0, line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto ws = line.find_first_of(" \t");
    const std::string smiles = ws == std::string::npos ? line : line.substr(0, ws);
    if (smiles.empty()) continue;
    try {
      out << to_record(oracle->ingest(smiles, vocab)) << '\n';
      ++kept;
    } catch (const IngestError& e) {
      if (!skip_invalid)
        throw IngestError("line " + std::to_string(line_no) + " (" + smiles + "): " + e.what());
      ++skipped;
    }
  }
  std::cout << "ingested " << kept << " molecules (" << skipped << " skipped) -> " << out_file
            << "\n";
  return 0;
}

int cmd_stats(const CommonArgs& args, const std::string& dataset) {
  Config cfg = resolve_config(args);
  auto graphs = load_or_synthesize(dataset, cfg);
  DatasetStats s = dataset_stats(graphs);
  std::cout << "Name              # Graph   Avg nodes   Avg edges   Max size   Node types\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-16s %8zu   %9.2f   %9.2f   %8d   %10d\n", dataset.c_str(),
                s.count, s.avg_nodes, s.avg_edges, s.max_size, s.node_types);
  std::cout << buf;
  return 0;
}

int cmd_order(const CommonArgs& args, const std::string& dataset, const std::string& out_file) {
  Config cfg = resolve_config(args);
  auto graphs = load_or_synthesize(dataset, cfg);
  std::vector<Graph> ordered;
  ordered.reserve(graphs.size());
  for (const auto& g : graphs) ordered.push_back(wl_canonicalize(g));
  write_dataset(out_file, ordered);
  std::cout << "wrote " << ordered.size() << " canonically ordered graphs -> " << out_file << "\n";
  return 0;
}

int cmd_train(const CommonArgs& args, const std::string& dataset, const std::string& resume,
              int argc, char** argv) {
  Config cfg = resolve_config(args);
  auto graphs = load_or_synthesize(dataset, cfg);
  const std::string run_dir = make_run_dir("train", cfg, args, dataset.rfind("synth:", 0) == 0 ? "" : dataset, argc, argv);
  std::cout << "run dir: " << run_dir << "\n";

  GraphVae model(cfg.model_config(), cfg.seed + 1);
  Trainer trainer(model, cfg.loss_config(), cfg.train_options(), run_dir);
  if (!resume.empty()) trainer.load_checkpoint(resume);

  DatasetSplits data =
      split_dataset(std::move(graphs), cfg.train_split, cfg.valid_split, cfg.test_split, cfg.seed);
  TrainResult result = trainer.fit(data);
  std::cout << "steps: " << result.steps << "\nbest validation accuracy: "
            << result.best_valid_accuracy << "\nbest checkpoint: " << result.best_checkpoint
            << "\n";

  if (!data.test.empty()) {
    auto report = reconstruction_eval(model, data.test, cfg.batch_size);
    std::cout << "test exact accuracy: " << report.exact_accuracy
              << "\ntest mean edit distance: " << report.mean_edit_distance << "\n";
  }
  return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& dataset, const std::string& checkpoint,
             int argc, char** argv) {
  Config cfg = resolve_config(args);
  auto graphs = load_or_synthesize(dataset, cfg);
  const std::string run_dir = make_run_dir("eval", cfg, args, dataset.rfind("synth:", 0) == 0 ? "" : dataset, argc, argv);
  GraphVae model = load_model(cfg, checkpoint);
  auto report = reconstruction_eval(model, graphs, cfg.batch_size);

  json out = {{"exact_accuracy", report.exact_accuracy},
              {"mean_edit_distance", report.mean_edit_distance},
              {"count", report.count}};
  json per_size = json::array();
  for (const auto& [size, counts] : report.per_size)
    per_size.push_back({{"size", size},
                        {"count", counts.first},
                        {"exact", counts.second},
                        {"accuracy", counts.first ? double(counts.second) / counts.first : 0.0}});
  out["per_size"] = per_size;
  std::ofstream(run_dir + "/reconstruction.json") << out.dump(2) << '\n';

  std::cout << "exact accuracy:     " << report.exact_accuracy << "\n"
            << "mean edit distance: " << report.mean_edit_distance << "\n"
            << "per-size breakdown written to " << run_dir << "/reconstruction.json\n";
  return 0;
}

int cmd_generate(const CommonArgs& args, const std::string& checkpoint, int n_batches,
                 int batch_size, const std::string& train_file, int argc, char** argv) {
  Config cfg = resolve_config(args);
  const std::string run_dir = make_run_dir("generate", cfg, args, train_file, argc, argv);
  GraphVae model = load_model(cfg, checkpoint);
  auto oracle = chem::make_oracle();
  const auto vocab = cfg.molecule_vocab();

  std::unordered_set<std::string> train_index;
  if (!train_file.empty())
    train_index = build_canonical_index(*oracle, vocab, load_or_synthesize(train_file, cfg));

  auto report = generation_eval(model, *oracle, vocab, n_batches, batch_size, train_index, cfg.seed);
  json out = {{"validity_mean", report.validity_mean},     {"validity_std", report.validity_std},
              {"uniqueness_mean", report.uniqueness_mean}, {"uniqueness_std", report.uniqueness_std},
              {"novelty_mean", report.novelty_mean},       {"novelty_std", report.novelty_std}};
  std::ofstream(run_dir + "/generation.json") << out.dump(2) << '\n';

  // A small sample sheet of valid generations.
  RandomStream rng(cfg.seed + 17);
  std::vector<Graph> samples;
  std::vector<std::string> captions;
  std::ofstream sample_records(run_dir + "/samples.graphs");
  for (int tries = 0; tries < 512 && samples.size() < 16; ++tries) {
    Vec z(model.config().latent_dim);
    for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
    Graph g = model.decode(z).graph;
    if (!oracle->validity(g, vocab).valid) continue;
    sample_records << to_record(g) << '\n';
    captions.push_back(std::to_string(oracle->logp(g, vocab)).substr(0, 5));
    samples.push_back(std::move(g));
  }
  if (!samples.empty()) graph_grid_png(run_dir + "/samples", samples, captions);

  std::cout << "validity:   " << report.validity_mean << " +- " << report.validity_std << " %\n"
            << "uniqueness: " << report.uniqueness_mean << " +- " << report.uniqueness_std << " %\n"
            << "novelty:    " << report.novelty_mean << " +- " << report.novelty_std << " %\n"
            << "reports in " << run_dir << "\n";
  return 0;
}

int cmd_interpolate(const CommonArgs& args, const std::string& checkpoint, const std::string& from,
                    const std::string& to, int steps, int argc, char** argv) {
  Config cfg = resolve_config(args);
  const std::string run_dir = make_run_dir("interpolate", cfg, args, "", argc, argv);
  GraphVae model = load_model(cfg, checkpoint);
  auto oracle = chem::make_oracle();
  const bool molecules = cfg.dataset_kind == "molecule";
  const auto vocab = cfg.molecule_vocab();

  Vec z1 = latent_from_input(model, *oracle, cfg, from);
  Vec z2 = latent_from_input(model, *oracle, cfg, to);
  std::function<std::string(const Graph&)> canon;
  if (molecules)
    canon = [&](const Graph& g) { return oracle->canonical_text(g, vocab); };
  auto path = interpolate(model, z1, z2, steps, canon);

  std::ofstream records(run_dir + "/interpolation.graphs");
  std::vector<std::string> captions;
  for (std::size_t i = 0; i < path.size(); ++i) {
    records << to_record(path[i]) << '\n';
    captions.push_back(std::to_string(i));
  }
  graph_grid_png(run_dir + "/interpolation", path, captions);
  std::cout << "distinct decodes along the path: " << path.size() << "\nartifacts in " << run_dir
            << "\n";
  return 0;
}

int cmd_optimize(const CommonArgs& args, const std::string& checkpoint, const std::string& start,
                 const std::string& objective_name, int iters, int pop, double sigma0, int argc,
                 char** argv) {
  Config cfg = resolve_config(args);
  const std::string run_dir = make_run_dir("optimize", cfg, args, "", argc, argv);
  GraphVae model = load_model(cfg, checkpoint);
  auto oracle = chem::make_oracle();
  const auto vocab = cfg.molecule_vocab();
  if (objective_name != "logp") throw ConfigError("unknown objective: " + objective_name);

  Vec z0 = latent_from_input(model, *oracle, cfg, start);
  CmaesOptions opts;
  opts.iterations = iters;
  opts.population = pop;
  opts.sigma0 = sigma0;
  opts.seed = cfg.seed;
  auto objective = [&](const Graph& g) { return logp_objective(g, *oracle, vocab); };
  auto traj = optimize_property(model, z0, objective, opts);

  std::ofstream records(run_dir + "/trajectory.jsonl");
  std::vector<Graph> frames;
  std::vector<std::string> captions;
  for (const auto& entry : traj.best_so_far) {
    json rec = {{"generation", entry.generation},
                {"objective", entry.objective},
                {"graph", json::parse(to_record(entry.graph))}};
    const std::string text = oracle->canonical_text(entry.graph, vocab);
    if (!text.empty()) rec["smiles"] = text;
    records << rec.dump() << '\n';
    frames.push_back(entry.graph);
    captions.push_back(std::to_string(entry.objective).substr(0, 6));
  }
  graph_grid_png(run_dir + "/trajectory", frames, captions);

  std::cout << "start objective: " << traj.start_objective
            << "\nbest objective:  " << traj.best_objective
            << "\nevaluations:     " << traj.evaluations << (traj.aborted ? " (aborted)" : "")
            << "\nartifacts in " << run_dir << "\n";
  return 0;
}

int cmd_denoise(const CommonArgs& args, const std::string& checkpoint, const std::string& dataset,
                int max_node_edits, int max_edge_edits, int argc, char** argv) {
  Config cfg = resolve_config(args);
  auto graphs = load_or_synthesize(dataset, cfg);
  const std::string run_dir = make_run_dir("denoise", cfg, args, dataset.rfind("synth:", 0) == 0 ? "" : dataset, argc, argv);
  GraphVae model = load_model(cfg, checkpoint);
  auto oracle = chem::make_oracle();
  auto grid = denoise_eval(model, *oracle, cfg.molecule_vocab(), graphs, max_node_edits,
                           max_edge_edits, cfg.seed);

  auto dump = [&](const Mat& m, const std::string& name) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(row);
    }
    std::ofstream(run_dir + "/" + name + ".json") << rows.dump(2) << '\n';
    heatmap_png(run_dir + "/" + name, m);
  };
  dump(grid.pre, "validity_pre");
  dump(grid.post, "validity_post");
  std::cout << "mean validity before round-trip: " << grid.pre.mean()
            << "\nmean validity after round-trip:  " << grid.post.mean() << "\nheatmaps in "
            << run_dir << "\n";
  return 0;
}

int cmd_regress(const CommonArgs& args, const std::string& checkpoint, const std::string& dataset,
                const std::string& labels_file, int folds, int argc, char** argv) {
  Config cfg = resolve_config(args);
  auto graphs = load_or_synthesize(dataset, cfg);
  const std::string run_dir = make_run_dir("regress", cfg, args, dataset.rfind("synth:", 0) == 0 ? "" : dataset, argc, argv);
  GraphVae model = load_model(cfg, checkpoint);

  Vec targets(graphs.size());
  if (labels_file == "bn-score") {
    for (std::size_t i = 0; i < graphs.size(); ++i) targets[i] = bn_score(graphs[i]);
  } else {
    std::ifstream in(labels_file);
    if (!in) throw ArgumentError("cannot open labels: " + labels_file);
    for (std::size_t i = 0; i < graphs.size(); ++i)
      if (!(in >> targets[i]))
        throw ArgumentError("labels file shorter than dataset: " + labels_file);
  }

  Mat latents(graphs.size(), model.config().latent_dim);
  const int chunk = std::max(1, cfg.batch_size);
  for (std::size_t off = 0; off < graphs.size(); off += chunk) {
    std::vector<Graph> part(graphs.begin() + off,
                            graphs.begin() + std::min(graphs.size(), off + chunk));
    latents.middleRows(static_cast<int>(off), static_cast<int>(part.size())) =
        model.encode_mean_batch(part);
  }

  auto report = downstream_regression(latents, targets, folds, cfg.seed);
  json out = {{"mse_mean", report.mse_mean},         {"mse_std", report.mse_std},
              {"rmse_mean", report.rmse_mean},       {"rmse_std", report.rmse_std},
              {"pearson_mean", report.pearson_mean}, {"pearson_std", report.pearson_std},
              {"folds", report.k_folds}};
  std::ofstream(run_dir + "/regression.json") << out.dump(2) << '\n';
  std::cout << "MSE:       " << report.mse_mean << " +- " << report.mse_std << "\n"
            << "RMSE:      " << report.rmse_mean << " +- " << report.rmse_std << "\n"
            << "Pearson r: " << report.pearson_mean << " +- " << report.pearson_std << "\n"
            << "report in " << run_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-level variational autoencoder toolkit"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string dataset, checkpoint, resume, from, to, start, labels_file, input, out_file;
  std::string objective = "logp";
  int steps = 8, n_batches = 10, gen_batch = 1024, iters = 50, pop = 16;
  int max_node_edits = 8, max_edge_edits = 8, folds = 5;
  double sigma0 = 0.25;
  bool skip_invalid = false;

  auto* train = app.add_subcommand("train", "train a model on a graph dataset");
  add_common(train, common);
  train->add_option("--dataset", dataset, "graph records file or synth:<kind>:<count>")->required();
  train->add_option("--resume", resume, "checkpoint to resume from");

  auto* eval_cmd = app.add_subcommand("eval", "reconstruction metrics for a checkpoint");
  add_common(eval_cmd, common);
  eval_cmd->add_option("--dataset", dataset)->required();
  eval_cmd->add_option("--checkpoint", checkpoint)->required();

  auto* generate = app.add_subcommand("generate", "sample the prior and score the decodes");
  add_common(generate, common);
  generate->add_option("--checkpoint", checkpoint)->required();
  generate->add_option("--batches", n_batches, "number of batches");
  generate->add_option("--batch-size", gen_batch, "molecules per batch");
  generate->add_option("--train-index", dataset, "training records for the novelty index");

  auto* interp = app.add_subcommand("interpolate", "decode the linear latent path between two graphs");
  add_common(interp, common);
  interp->add_option("--checkpoint", checkpoint)->required();
  interp->add_option("--from", from, "SMILES (molecule mode) or graph record JSON")->required();
  interp->add_option("--to", to)->required();
  interp->add_option("--steps", steps);

  auto* optimize = app.add_subcommand("optimize", "CMA-ES property search in latent space");
  add_common(optimize, common);
  optimize->add_option("--checkpoint", checkpoint)->required();
  optimize->add_option("--start", start, "SMILES or graph record JSON")->required();
  optimize->add_option("--objective", objective, "objective name (logp)");
  optimize->add_option("--iters", iters);
  optimize->add_option("--pop", pop);
  optimize->add_option("--sigma0", sigma0);

  auto* denoise = app.add_subcommand("denoise", "validity before/after a model round-trip under label noise");
  add_common(denoise, common);
  denoise->add_option("--checkpoint", checkpoint)->required();
  denoise->add_option("--dataset", dataset)->required();
  denoise->add_option("--max-node-edits", max_node_edits);
  denoise->add_option("--max-edge-edits", max_edge_edits);

  auto* regress = app.add_subcommand("regress", "k-fold regression on frozen encoder latents");
  add_common(regress, common);
  regress->add_option("--checkpoint", checkpoint)->required();
  regress->add_option("--dataset", dataset)->required();
  regress->add_option("--labels", labels_file, "label file (one value per graph) or bn-score")->required();
  regress->add_option("--folds", folds);

  auto* order = app.add_subcommand("order", "rewrite a dataset in canonical WL order");
  add_common(order, common);
  order->add_option("--dataset", dataset)->required();
  order->add_option("--out-file", out_file, "output records file")->required();

  auto* stats = app.add_subcommand("stats", "dataset summary table");
  add_common(stats, common);
  stats->add_option("--dataset", dataset)->required();

  auto* ingest = app.add_subcommand("ingest", "SMILES file to graph records");
  add_common(ingest, common);
  ingest->add_option("--input", input, "SMILES file, one molecule per line")->required();
  ingest->add_option("--out-file", out_file, "output records file")->required();
  ingest->add_flag("--skip-invalid", skip_invalid, "skip unparseable lines instead of aborting");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*train) return cmd_train(common, dataset, resume, argc, argv);
    if (*eval_cmd) return cmd_eval(common, dataset, checkpoint, argc, argv);
    if (*generate) return cmd_generate(common, checkpoint, n_batches, gen_batch, dataset, argc, argv);
    if (*interp) return cmd_interpolate(common, checkpoint, from, to, steps, argc, argv);
    if (*optimize)
      return cmd_optimize(common, checkpoint, start, objective, iters, pop, sigma0, argc, argv);
    if (*denoise)
      return cmd_denoise(common, checkpoint, dataset, max_node_edits, max_edge_edits, argc, argv);
    if (*regress) return cmd_regress(common, checkpoint, dataset, labels_file, folds, argc, argv);
    if (*order) return cmd_order(common, dataset, out_file);
    if (*stats) return cmd_stats(common, dataset);
    if (*ingest) return cmd_ingest(common, input, out_file, skip_invalid);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
