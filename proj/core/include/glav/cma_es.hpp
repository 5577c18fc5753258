// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/types.hpp"

#include <functional>
#include <vector>

namespace glav {

struct CmaesOptions {
  double sigma0 = 0.25;
  int population = 16;
  int iterations = 50;
  std::uint64_t seed = 0;
};

struct CmaesGeneration {
  Vec best_x;
  double best_f = 0.0;  // best raw objective within the generation
  int failed_evaluations = 0;
};

struct CmaesResult {
  Vec best_x;
  double best_f = 0.0;
  std::vector<CmaesGeneration> generations;
  std::int64_t evaluations = 0;  // excludes the initial-point evaluation
  bool aborted = false;          // every member of some generation threw
};

/// Covariance matrix adaptation evolution strategy (maximization convention).
/// Candidates whose objective throws are ranked below everything else; a
/// generation where every candidate throws aborts the run with the partial
/// trajectory.
CmaesResult cma_es_maximize(const std::function<double(const Vec&)>& objective, const Vec& x0,
                            const CmaesOptions& opts);

}  // namespace glav
