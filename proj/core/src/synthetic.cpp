// SPDX-License-Identifier: Apache-2.0
#include "glav/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace glav {

namespace {

std::vector<int> random_proper_coloring(int n, RandomStream& rng) {
  // Resample until at least two colors are present (n >= 2), so that a
  // spanning tree over differently-colored pairs exists.
  while (true) {
    std::vector<int> colors(n);
    for (int i = 0; i < n; ++i) colors[i] = static_cast<int>(rng.uniform_index(kColoringClasses));
    if (n == 1) return colors;
    const int first = colors[0];
    for (int i = 1; i < n; ++i)
      if (colors[i] != first) return colors;
  }
}

Mat jittered_grid_coordinates(int n, RandomStream& rng) {
  const int w = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  Mat coords(n, 2);
  for (int i = 0; i < n; ++i) {
    coords(i, 0) = (i % w) + 0.3 * rng.uniform();
    coords(i, 1) = (i / w) + 0.3 * rng.uniform();
  }
  return coords;
}

}  // namespace

std::vector<Graph> coloring_generate(int n_min, int n_max, std::uint64_t seed, int count) {
  if (n_min < 1 || n_min > n_max) throw ArgumentError("coloring_generate: need 1 <= n_min <= n_max");
  RandomStream rng(seed);
  std::vector<Graph> graphs;
  graphs.reserve(count);
  for (int g = 0; g < count; ++g) {
    const int n = rng.uniform_int(n_min, n_max);
    Graph graph(n);
    graph.node_classes = random_proper_coloring(n, rng);
    graph.coordinates = jittered_grid_coordinates(n, rng);

    if (n > 1) {
      // Random spanning tree over differently-colored pairs.
      std::vector<int> order(n);
      for (int i = 0; i < n; ++i) order[i] = i;
      rng.shuffle(order);
      std::vector<char> visited(n, 0);
      visited[order[0]] = 1;
      int n_visited = 1;
      while (n_visited < n) {
        std::vector<std::pair<int, int>> frontier;
        for (int u = 0; u < n; ++u) {
          if (!visited[u]) continue;
          for (int v = 0; v < n; ++v)
            if (!visited[v] && graph.node_classes[u] != graph.node_classes[v])
              frontier.push_back({u, v});
        }
        const auto [u, v] = frontier[rng.uniform_index(frontier.size())];
        graph.set_edge(u, v, 1);
        visited[v] = 1;
        ++n_visited;
      }
      // Extra edges between differently-colored pairs.
      for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
          if (graph.edge(u, v) == 0 && graph.node_classes[u] != graph.node_classes[v] &&
              rng.bernoulli(0.3))
            graph.set_edge(u, v, 1);
    }
    graphs.push_back(std::move(graph));
  }
  return graphs;
}

std::vector<Graph> bn_generate(std::uint64_t seed, int count) {
  RandomStream rng(seed);
  std::vector<Graph> graphs;
  graphs.reserve(count);
  for (int g = 0; g < count; ++g) {
    Graph graph(kBnNodes);
    for (int i = 0; i < kBnNodes; ++i) graph.node_classes[i] = i;
    std::vector<int> topo(kBnNodes);
    for (int i = 0; i < kBnNodes; ++i) topo[i] = i;
    rng.shuffle(topo);
    std::vector<int> position(kBnNodes);
    for (int p = 0; p < kBnNodes; ++p) position[topo[p]] = p;
    for (int i = 0; i < kBnNodes; ++i) {
      for (int j = i + 1; j < kBnNodes; ++j) {
        if (!rng.bernoulli(0.2875)) continue;
        // Orient from earlier to later topological position; acyclic by
        // construction.
        graph.set_edge(i, j, position[i] < position[j] ? 1 : 2);
      }
    }
    graphs.push_back(std::move(graph));
  }
  return graphs;
}

double bn_score(const Graph& g) {
  // Fixed pseudo-random weights per (pair, direction), plus a mild density
  // term; stands in for an externally computed structure score.
  RandomStream wrng(0xB1C5C0E);
  double score = 0.0;
  int edges = 0;
  for (int i = 0; i < kBnNodes; ++i) {
    for (int j = i + 1; j < kBnNodes; ++j) {
      const double w_fwd = wrng.uniform(-1.0, 1.0);
      const double w_bwd = wrng.uniform(-1.0, 1.0);
      const int e = g.edge(i, j);
      if (e == 1) score += w_fwd;
      if (e == 2) score += w_bwd;
      if (e != 0) ++edges;
    }
  }
  score -= 0.05 * (edges - 8.0) * (edges - 8.0);
  return score;
}

std::vector<Graph> molecule_generate(const chem::MoleculeVocab& vocab, std::uint64_t seed,
                                     int count, const MoleculeGenOptions& opts) {
  RandomStream rng(seed);
  chem::BuiltinOracle oracle;
  const int carbon = vocab.class_of("C");
  if (carbon < 0) throw ArgumentError("molecule_generate: vocabulary must contain C");

  auto capacity_of = [&](const std::string& elem) {
    if (elem == "C") return 4;
    if (elem == "N") return 3;
    if (elem == "O") return 2;
    return 1;  // F and other halogens
  };

  auto pick_element = [&]() -> int {
    const double u = rng.uniform();
    const auto want = [&](const char* e) { return vocab.class_of(e); };
    if (u < 0.68 || want("N") < 0) return carbon;
    if (u < 0.82) return want("N");
    if (u < 0.94 && want("O") >= 0) return want("O");
    if (want("F") >= 0) return want("F");
    return carbon;
  };

  std::vector<Graph> graphs;
  graphs.reserve(count);
  while (static_cast<int>(graphs.size()) < count) {
    const int n = rng.uniform_int(opts.min_atoms, opts.max_atoms);
    std::vector<int> classes;
    std::vector<int> free_cap;
    std::vector<char> aromatic;
    std::vector<std::tuple<int, int, int>> bonds;  // a, b, class

    const bool plant_ring = n >= 6 && rng.bernoulli(opts.aromatic_prob);
    if (plant_ring) {
      // Benzene-like ring: aromatic edges in aromatic mode, alternating
      // single/double otherwise.
      for (int i = 0; i < 6; ++i) {
        classes.push_back(carbon);
        free_cap.push_back(1);  // one substituent slot on a ring carbon
        aromatic.push_back(1);
      }
      for (int i = 0; i < 6; ++i) {
        const int cls = vocab.aromatic_mode
                            ? chem::kBondAromatic
                            : (i % 2 == 0 ? chem::kBondDouble : chem::kBondSingle);
        bonds.push_back({i, (i + 1) % 6, cls});
      }
    } else {
      classes.push_back(pick_element());
      free_cap.push_back(capacity_of(vocab.elements[classes[0]]));
      aromatic.push_back(0);
    }

    bool failed = false;
    while (static_cast<int>(classes.size()) < n) {
      std::vector<int> hosts;
      for (int i = 0; i < static_cast<int>(classes.size()); ++i)
        if (free_cap[i] > 0) hosts.push_back(i);
      if (hosts.empty()) {
        failed = true;
        break;
      }
      const int host = hosts[rng.uniform_index(hosts.size())];
      const int cls = pick_element();
      classes.push_back(cls);
      aromatic.push_back(0);
      free_cap.push_back(capacity_of(vocab.elements[cls]) - 1);
      free_cap[host] -= 1;
      bonds.push_back({host, static_cast<int>(classes.size()) - 1, chem::kBondSingle});
    }
    if (failed) continue;

    const int total = static_cast<int>(classes.size());
    auto bonded = [&](int a, int b) {
      for (auto& [x, y, c] : bonds)
        if ((x == a && y == b) || (x == b && y == a)) return true;
      return false;
    };

    // Optional ring closure between non-aromatic atoms with spare valence.
    if (rng.bernoulli(opts.ring_prob)) {
      std::vector<std::pair<int, int>> candidates;
      for (int a = 0; a < total; ++a)
        for (int b = a + 1; b < total; ++b)
          if (!aromatic[a] && !aromatic[b] && free_cap[a] > 0 && free_cap[b] > 0 && !bonded(a, b))
            candidates.push_back({a, b});
      if (!candidates.empty()) {
        const auto [a, b] = candidates[rng.uniform_index(candidates.size())];
        bonds.push_back({a, b, chem::kBondSingle});
        free_cap[a] -= 1;
        free_cap[b] -= 1;
      }
    }

    // Bond upgrades between non-aromatic atoms.
    for (auto& [a, b, cls] : bonds) {
      if (aromatic[a] || aromatic[b] || cls != chem::kBondSingle) continue;
      if (free_cap[a] > 0 && free_cap[b] > 0 && rng.bernoulli(opts.multibond_prob)) {
        cls = chem::kBondDouble;
        free_cap[a] -= 1;
        free_cap[b] -= 1;
        if (free_cap[a] > 0 && free_cap[b] > 0 && rng.bernoulli(0.25)) {
          cls = chem::kBondTriple;
          free_cap[a] -= 1;
          free_cap[b] -= 1;
        }
      }
    }

    Graph g(total);
    g.node_classes = classes;
    for (auto& [a, b, cls] : bonds) g.set_edge(a, b, cls);
    if (plant_ring && vocab.aromatic_mode) {
      g.aromatic_annotations.resize(total);
      for (int i = 0; i < 6; ++i)
        g.aromatic_annotations[i] = AromaticAnnotation{0, free_cap[i] > 0 ? 1 : 0};
    }

    if (!oracle.validity(g, vocab).valid) continue;
    graphs.push_back(std::move(g));
  }
  return graphs;
}

}  // namespace glav
