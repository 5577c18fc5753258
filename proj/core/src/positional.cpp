// SPDX-License-Identifier: Apache-2.0
#include "glav/positional.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace glav {

namespace {

Mat adjacency(const Graph& g) {
  const int n = g.size();
  Mat a = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && g.edge(i, j) != 0) a(i, j) = 1.0;
  return a;
}

void fix_sign(Eigen::Ref<Mat> column_block, int col) {
  int best = 0;
  double best_abs = -1.0;
  for (int i = 0; i < column_block.rows(); ++i) {
    const double a = std::abs(column_block(i, col));
    if (a > best_abs + 1e-15) {
      best_abs = a;
      best = i;
    }
  }
  if (column_block(best, col) < 0.0) column_block.col(col) *= -1.0;
}

}  // namespace

Mat laplacian_pe(const Graph& g, int k_lap) {
  if (k_lap < 1) throw ArgumentError("laplacian_pe: k_lap must be >= 1");
  const int n = g.size();
  Mat a = adjacency(g);
  Vec deg = a.rowwise().sum();
  Vec dinv_sqrt(n);
  for (int i = 0; i < n; ++i) dinv_sqrt[i] = deg[i] > 0.0 ? 1.0 / std::sqrt(deg[i]) : 0.0;
  Mat lap = -(dinv_sqrt.asDiagonal() * a * dinv_sqrt.asDiagonal());
  // Diagonal is 1 for connected nodes, 0 for isolated ones, so every isolated
  // node sits in the zero eigenspace like any other component.
  for (int i = 0; i < n; ++i) lap(i, i) = deg[i] > 0.0 ? 1.0 : 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> solver(lap);
  const Vec& evals = solver.eigenvalues();
  const Mat& evecs = solver.eigenvectors();

  Mat out = Mat::Zero(n, k_lap);
  int written = 0;
  for (int idx = 0; idx < n && written < k_lap; ++idx) {
    if (evals[idx] < 1e-9) continue;  // skip the zero eigenvalue of each component
    out.col(written) = evecs.col(idx);
    fix_sign(out, written);
    ++written;
  }
  return out;
}

Mat random_walk_pe(const Graph& g, int k_rw) {
  if (k_rw < 1) throw ArgumentError("random_walk_pe: k_rw must be >= 1");
  const int n = g.size();
  Mat a = adjacency(g);
  Mat m = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double d = a.row(i).sum();
    if (d > 0.0) m.row(i) = a.row(i) / d;
  }
  Mat out = Mat::Zero(n, k_rw);
  Mat power = Mat::Identity(n, n);
  for (int t = 0; t < k_rw; ++t) {
    power = (power * m).eval();
    out.col(t) = power.diagonal();
  }
  return out;
}

Mat positional_encodings(const Graph& g, int k_lap, int k_rw) {
  // k = 0 drops that component; both zero yields an empty encoding (the
  // "no positional encoding" ablation).
  Mat out(g.size(), k_lap + k_rw);
  if (k_lap > 0) out.leftCols(k_lap) = laplacian_pe(g, k_lap);
  if (k_rw > 0) out.rightCols(k_rw) = random_walk_pe(g, k_rw);
  return out;
}

}  // namespace glav
