// SPDX-License-Identifier: Apache-2.0
#include "glav/latent_tools.hpp"

namespace glav {

std::vector<Graph> interpolate(GraphVae& model, const Vec& z1, const Vec& z2, int steps,
                               const std::function<std::string(const Graph&)>& canonicalize) {
  if (z1.size() != z2.size()) throw ArgumentError("interpolate: latent dimension mismatch");
  if (steps < 2) throw ArgumentError("interpolate: steps must be >= 2");
  std::vector<Graph> out;
  std::string last_key;
  bool have_last = false;
  for (int k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(steps - 1);
    Vec z = (1.0 - t) * z1 + t * z2;
    Graph g = model.decode(z).graph;
    std::string key = canonicalize ? canonicalize(g) : to_record(g);
    if (have_last && key == last_key) continue;
    out.push_back(std::move(g));
    last_key = std::move(key);
    have_last = true;
  }
  return out;
}

double logp_objective(const Graph& g, chem::Oracle& oracle, const chem::MoleculeVocab& vocab) {
  try {
    if (!oracle.validity(g, vocab).valid) return kInvalidPenalty;
    return oracle.logp(g, vocab);
  } catch (const Error&) {
    return kInvalidPenalty;
  }
}

OptimizationTrajectory optimize_property(GraphVae& model, const Vec& z0,
                                         const std::function<double(const Graph&)>& objective,
                                         const CmaesOptions& opts) {
  OptimizationTrajectory traj;
  traj.options = opts;
  traj.start_objective = objective(model.decode(z0).graph);

  auto latent_objective = [&](const Vec& z) { return objective(model.decode(z).graph); };
  CmaesResult res = cma_es_maximize(latent_objective, z0, opts);

  traj.evaluations = res.evaluations;
  traj.aborted = res.aborted;

  TrajectoryEntry start;
  start.z = z0;
  start.graph = model.decode(z0).graph;
  start.objective = traj.start_objective;
  start.generation = -1;
  traj.best_so_far.push_back(std::move(start));

  double best = traj.start_objective;
  for (std::size_t g = 0; g < res.generations.size(); ++g) {
    const auto& gen = res.generations[g];
    if (gen.best_x.size() == 0) continue;  // fully failed generation
    if (gen.best_f > best) {
      best = gen.best_f;
      TrajectoryEntry entry;
      entry.z = gen.best_x;
      entry.graph = model.decode(gen.best_x).graph;
      entry.objective = best;
      entry.generation = static_cast<int>(g);
      traj.best_so_far.push_back(std::move(entry));
    }
  }
  traj.best_objective = best;
  return traj;
}

}  // namespace glav
