// SPDX-License-Identifier: Apache-2.0
#include "glav/cma_es.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace glav {

CmaesResult cma_es_maximize(const std::function<double(const Vec&)>& objective, const Vec& x0,
                            const CmaesOptions& opts) {
  const int n = static_cast<int>(x0.size());
  const int lambda = opts.population;
  if (lambda < 2) throw ArgumentError("cma_es: population must be >= 2");
  const int mu = lambda / 2;

  // Standard rank-based recombination weights and adaptation constants.
  Vec weights(mu);
  for (int i = 0; i < mu; ++i) weights[i] = std::log(mu + 0.5) - std::log(i + 1.0);
  weights /= weights.sum();
  const double mueff = 1.0 / weights.squaredNorm();
  const double cc = (4.0 + mueff / n) / (n + 4.0 + 2.0 * mueff / n);
  const double cs = (mueff + 2.0) / (n + mueff + 5.0);
  const double c1 = 2.0 / ((n + 1.3) * (n + 1.3) + mueff);
  const double cmu =
      std::min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((n + 2.0) * (n + 2.0) + mueff));
  const double damps = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff - 1.0) / (n + 1.0)) - 1.0) + cs;
  const double chi_n = std::sqrt(static_cast<double>(n)) *
                       (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  Vec mean = x0;
  double sigma = opts.sigma0;
  Vec ps = Vec::Zero(n), pc = Vec::Zero(n);
  Mat c = Mat::Identity(n, n);
  Mat b = Mat::Identity(n, n);
  Vec d = Vec::Ones(n);

  RandomStream rng(opts.seed);
  CmaesResult result;
  result.best_f = -std::numeric_limits<double>::infinity();

  for (int gen = 0; gen < opts.iterations; ++gen) {
    std::vector<Vec> zs(lambda), ys(lambda), xs(lambda);
    std::vector<double> fs(lambda);
    std::vector<bool> failed(lambda, false);
    int n_failed = 0;
    for (int k = 0; k < lambda; ++k) {
      Vec z(n);
      for (int i = 0; i < n; ++i) z[i] = rng.normal();
      zs[k] = z;
      ys[k] = b * (d.asDiagonal() * z);
      xs[k] = mean + sigma * ys[k];
      ++result.evaluations;
      try {
        fs[k] = objective(xs[k]);
      } catch (const std::exception&) {
        fs[k] = -std::numeric_limits<double>::infinity();
        failed[k] = true;
        ++n_failed;
      }
    }

    CmaesGeneration record;
    record.failed_evaluations = n_failed;
    if (n_failed == lambda) {
      result.aborted = true;
      result.generations.push_back(std::move(record));
      break;
    }

    std::vector<int> order(lambda);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a2, int b2) { return fs[a2] > fs[b2]; });

    record.best_x = xs[order[0]];
    record.best_f = fs[order[0]];
    result.generations.push_back(record);
    if (record.best_f > result.best_f) {
      result.best_f = record.best_f;
      result.best_x = record.best_x;
    }

    Vec y_w = Vec::Zero(n), z_w = Vec::Zero(n);
    for (int i = 0; i < mu; ++i) {
      y_w += weights[i] * ys[order[i]];
      z_w += weights[i] * zs[order[i]];
    }
    mean += sigma * y_w;

    ps = (1.0 - cs) * ps + std::sqrt(cs * (2.0 - cs) * mueff) * (b * z_w);
    const double ps_norm = ps.norm();
    const double expected =
        std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * (gen + 1))) * chi_n;
    const bool hsig = ps_norm / expected < 1.4 + 2.0 / (n + 1.0);
    pc = (1.0 - cc) * pc + (hsig ? std::sqrt(cc * (2.0 - cc) * mueff) : 0.0) * y_w;

    Mat rank_mu = Mat::Zero(n, n);
    for (int i = 0; i < mu; ++i) rank_mu += weights[i] * (ys[order[i]] * ys[order[i]].transpose());
    c = (1.0 - c1 - cmu) * c +
        c1 * (pc * pc.transpose() + (hsig ? 0.0 : cc * (2.0 - cc)) * c) + cmu * rank_mu;
    sigma *= std::exp((cs / damps) * (ps_norm / chi_n - 1.0));

    Eigen::SelfAdjointEigenSolver<Mat> eig((c + c.transpose()) * 0.5);
    d = eig.eigenvalues().cwiseMax(1e-20).cwiseSqrt();
    b = eig.eigenvectors();
  }
  return result;
}

}  // namespace glav
