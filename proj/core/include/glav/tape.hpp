// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/types.hpp"

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

namespace glav::ad {

class Tape;

/// Handle to a tape node. Cheap to copy; valid for the tape's lifetime.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  int rows() const;
  int cols() const;
  const Mat& value() const;
};

/// Reverse-mode autodiff over row-major Eigen matrices. Rank-3/4 tensors are
/// laid out as 2-D matrices with a flattened leading index (node rows are
/// b*N+i, pair rows are (b*N+i)*N+j); the grouped ops below make attention
/// and pooling expressible in that layout.
class Tape {
 public:
  Tape() { nodes_.reserve(512); }

  // -- leaves ---------------------------------------------------------------
  Var constant(Mat value);            // no gradient
  Var leaf(Mat value);                // gradient tracked (inputs under test)
  Var param(const std::string& name, const Mat& value);  // named, grads collected

  // -- elementwise ----------------------------------------------------------
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var x, Scalar c);
  Var add_const(Var x, Scalar c);
  Var neg(Var x) { return scale(x, -1.0); }
  Var exp(Var x);
  Var log(Var x);
  Var tanh(Var x);
  Var gelu(Var x);
  Var pow_const(Var x, Scalar p);   // requires x >= 0 when p is fractional
  Var clamp(Var x, Scalar lo, Scalar hi);
  Var smooth_l1(Var x, Scalar beta);

  // -- linear algebra -------------------------------------------------------
  Var matmul(Var a, Var b);
  Var linear(Var x, Var w, Var bias);      // x*w + bias (bias 1 x C)
  Var add_rowvec(Var x, Var v);            // broadcast 1 x C over rows
  Var mul_rowvec(Var x, Var v);
  Var concat_cols(Var a, Var b);
  Var slice_cols(Var x, int first, int count);
  Var concat_rows(Var a, Var b);

  // -- shaping / indexing ---------------------------------------------------
  /// out.row(r) = x.row(index[r]); backward scatter-adds.
  Var gather_rows(Var x, std::vector<int> index);
  /// Multiplies each row by a fixed weight (masks, 1/count factors).
  Var scale_rows(Var x, Vec weights);
  /// out(r, 0) = x(r, col[r]).
  Var pick_cols(Var x, std::vector<int> col);

  // -- grouped ops ----------------------------------------------------------
  /// Column-wise softmax within each group of rows; masked rows yield zeros
  /// and receive no gradient. Groups need not be contiguous.
  Var group_softmax(Var x, std::vector<int> group, int n_groups, std::vector<std::uint8_t> mask);
  /// out.row(g) = sum over rows r with group[r] == g of x.row(r).
  Var group_sum(Var x, std::vector<int> group, int n_groups);

  // -- attention helpers ----------------------------------------------------
  /// out(r, h) = sum over the h-th head's columns of a(r,:) ⊙ b(r,:).
  Var heads_dot(Var a, Var b, int n_heads);
  /// Scales the h-th head's columns of v by s(r, h).
  Var mul_headwise(Var v, Var s, int n_heads);

  // -- normalization / classification ---------------------------------------
  Var layer_norm(Var x, Var gamma, Var beta, Scalar eps = 1e-5);
  Var log_softmax_rows(Var x);

  // -- reductions -----------------------------------------------------------
  Var sum_all(Var x);                  // 1 x 1
  Var row_sum(Var x);                  // R x 1

  /// Stops gradient flow: value copied into a fresh constant.
  Var detach(Var x);

  // -- execution ------------------------------------------------------------
  /// Seeds d(loss)/d(loss) = 1 and propagates. `loss` must be 1 x 1.
  void backward(Var loss);

  const Mat& value(Var v) const { return nodes_[v.id].value; }
  const Mat& grad(Var v) const { return nodes_[v.id].grad; }
  bool has_grad(Var v) const { return nodes_[v.id].grad.size() > 0; }

  /// Gradient accumulated for a named parameter; zero matrix if untouched.
  Mat param_grad(const std::string& name) const;
  const std::unordered_map<std::string, int>& bound_params() const { return param_ids_; }

  std::size_t size() const { return nodes_.size(); }

 private:
  friend struct Var;

  struct Node {
    Mat value;
    Mat grad;  // lazily allocated
    bool requires_grad = false;
    std::function<void(Tape&)> backward;
  };

  Var make(Mat value, bool requires_grad, std::function<void(Tape&)> backward = nullptr);
  Mat& grad_buffer(int id);

  std::vector<Node> nodes_;
  std::unordered_map<std::string, int> param_ids_;
};

/// Central-difference gradient check helper shared by tests: perturbs entries
/// of `leaf_value`, rebuilds the loss via `loss_fn`, and compares against the
/// analytic gradient. Returns the worst relative error.
double finite_difference_check(const Mat& leaf_value,
                               const std::function<Var(Tape&, Var)>& loss_fn,
                               double step = 1e-5);

}  // namespace glav::ad
