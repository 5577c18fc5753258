// SPDX-License-Identifier: Apache-2.0
#include "glav/tape.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <cmath>
#include <limits>
#include <memory>
#include <utility>

namespace glav::ad {

namespace {

// Tape tensors are a few MB each and freed every step; keeping them on the
// heap freelist instead of mmap avoids page-fault churn in the training loop.
struct MallocTuning {
  MallocTuning() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  }
};
const MallocTuning malloc_tuning;

}  // namespace

int Var::rows() const { return static_cast<int>(tape->value(*this).rows()); }
int Var::cols() const { return static_cast<int>(tape->value(*this).cols()); }
const Mat& Var::value() const { return tape->value(*this); }

Var Tape::make(Mat value, bool requires_grad, std::function<void(Tape&)> backward) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  node.backward = requires_grad ? std::move(backward) : nullptr;
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Mat& Tape::grad_buffer(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Tape::constant(Mat value) { return make(std::move(value), false); }

Var Tape::leaf(Mat value) { return make(std::move(value), true); }

Var Tape::param(const std::string& name, const Mat& value) {
  auto it = param_ids_.find(name);
  if (it != param_ids_.end()) return Var{this, it->second};
  Var v = make(value, true);
  param_ids_[name] = v.id;
  return v;
}

Mat Tape::param_grad(const std::string& name) const {
  auto it = param_ids_.find(name);
  if (it == param_ids_.end()) return Mat();
  const Node& n = nodes_[it->second];
  if (n.grad.size() == 0) return Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

// ---------------------------------------------------------------------------

Var Tape::add(Var a, Var b) {
  const bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return make(nodes_[a.id].value + nodes_[b.id].value, rg,
              [a = a.id, b = b.id, out = static_cast<int>(nodes_.size())](Tape& t) {
                const Mat& g = t.nodes_[out].grad;
                if (t.nodes_[a].requires_grad) t.grad_buffer(a) += g;
                if (t.nodes_[b].requires_grad) t.grad_buffer(b) += g;
              });
}

Var Tape::sub(Var a, Var b) {
  const bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return make(nodes_[a.id].value - nodes_[b.id].value, rg,
              [a = a.id, b = b.id, out = static_cast<int>(nodes_.size())](Tape& t) {
                const Mat& g = t.nodes_[out].grad;
                if (t.nodes_[a].requires_grad) t.grad_buffer(a) += g;
                if (t.nodes_[b].requires_grad) t.grad_buffer(b) -= g;
              });
}

Var Tape::mul(Var a, Var b) {
  const bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return make(nodes_[a.id].value.cwiseProduct(nodes_[b.id].value), rg,
              [a = a.id, b = b.id, out = static_cast<int>(nodes_.size())](Tape& t) {
                const Mat& g = t.nodes_[out].grad;
                if (t.nodes_[a].requires_grad)
                  t.grad_buffer(a) += g.cwiseProduct(t.nodes_[b].value);
                if (t.nodes_[b].requires_grad)
                  t.grad_buffer(b) += g.cwiseProduct(t.nodes_[a].value);
              });
}

Var Tape::scale(Var x, Scalar c) {
  return make(nodes_[x.id].value * c, nodes_[x.id].requires_grad,
              [x = x.id, c, out = static_cast<int>(nodes_.size())](Tape& t) {
                if (t.nodes_[x].requires_grad) t.grad_buffer(x) += t.nodes_[out].grad * c;
              });
}

Var Tape::add_const(Var x, Scalar c) {
  return make(nodes_[x.id].value.array() + c, nodes_[x.id].requires_grad,
              [x = x.id, out = static_cast<int>(nodes_.size())](Tape& t) {
                if (t.nodes_[x].requires_grad) t.grad_buffer(x) += t.nodes_[out].grad;
              });
}

Var Tape::exp(Var x) {
  Mat v = nodes_[x.id].value.array().exp();
  return make(std::move(v), nodes_[x.id].requires_grad,
              [x = x.id, out = static_cast<int>(nodes_.size())](Tape& t) {
                if (t.nodes_[x].requires_grad)
                  t.grad_buffer(x) += t.nodes_[out].grad.cwiseProduct(t.nodes_[out].value);
              });
}

Var Tape::log(Var x) {
  Mat v = nodes_[x.id].value.array().log();
  return make(std::move(v), nodes_[x.id].requires_grad,
              [x = x.id, out = static_cast<int>(nodes_.size())](Tape& t) {
                if (t.nodes_[x].requires_grad)
                  t.grad_buffer(x).array() +=
                      t.nodes_[out].grad.array() / t.nodes_[x].value.array();
              });
}

Var Tape::tanh(Var x) {
  Mat v = nodes_[x.id].value.array().tanh();
  return make(std::move(v), nodes_[x.id].requires_grad,
              [x = x.id, out = static_cast<int>(nodes_.size())](Tape& t) {
                if (t.nodes_[x].requires_grad)
                  t.grad_buffer(x).array() +=
                      t.nodes_[out].grad.array() * (1.0 - t.nodes_[out].value.array().square());
              });
}

namespace {
constexpr Scalar kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr Scalar kGeluA = 0.044715;
}  // namespace

Var Tape::gelu(Var x) {
  constexpr Scalar kC = kGeluC;
  constexpr Scalar kA = kGeluA;
  const auto& xv = nodes_[x.id].value.array();
  Mat inner = (kC * (xv + kA * xv.cube())).tanh();
  Mat v = 0.5 * xv * (1.0 + inner.array());
  return make(std::move(v), nodes_[x.id].requires_grad,
              [x = x.id, inner = std::make_shared<Mat>(std::move(inner)),
               out = static_cast<int>(nodes_.size())](Tape& t) {
                if (!t.nodes_[x].requires_grad) return;
                const auto& xv = t.nodes_[x].value.array();
                const auto& th = inner->array();
                Mat d = 0.5 * (1.0 + th) + 0.5 * xv * (1.0 - th.square()) * kGeluC *
                                               (1.0 + 3.0 * kGeluA * xv.square());
                t.grad_buffer(x) += t.nodes_[out].grad.cwiseProduct(d);
              });
}

Var Tape::pow_const(Var x, Scalar p) {
  Mat v = nodes_[x.id].value.array().pow(p);
  return make(std::move(v), nodes_[x.id].requires_grad,
              [x = x.id, p, out = static_cast<int>(nodes_.size())](Tape& t) {
                if (t.nodes_[x].requires_grad)
                  t.grad_buffer(x).array() += t.nodes_[out].grad.array() * p *
                                              t.nodes_[x].value.array().pow(p - 1.0);
              });
}

Var Tape::clamp(Var x, Scalar lo, Scalar hi) {
  Mat v = nodes_[x.id].value.cwiseMax(lo).cwiseMin(hi);
  return make(std::move(v), nodes_[x.id].requires_grad,
              [x = x.id, lo, hi, out = static_cast<int>(nodes_.size())](Tape& t) {
                if (!t.nodes_[x].requires_grad) return;
                const auto& xv = t.nodes_[x].value.array();
                Mat inside = ((xv >= lo) && (xv <= hi)).cast<Scalar>();
                t.grad_buffer(x) += t.nodes_[out].grad.cwiseProduct(inside);
              });
}

Var Tape::smooth_l1(Var x, Scalar beta) {
  const auto& xv = nodes_[x.id].value.array();
  Mat v = (xv.abs() <= beta).select(0.5 * xv.square() / beta, xv.abs() - 0.5 * beta);
  return make(std::move(v), nodes_[x.id].requires_grad,
              [x = x.id, beta, out = static_cast<int>(nodes_.size())](Tape& t) {
                if (!t.nodes_[x].requires_grad) return;
                const auto& xv = t.nodes_[x].value.array();
                Mat d = (xv.abs() <= beta).select(xv / beta, xv.sign());
                t.grad_buffer(x) += t.nodes_[out].grad.cwiseProduct(d);
              });
}

// ---------------------------------------------------------------------------

Var Tape::matmul(Var a, Var b) {
  const bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  Mat v = nodes_[a.id].value * nodes_[b.id].value;
  return make(std::move(v), rg,
              [a = a.id, b = b.id, out = static_cast<int>(nodes_.size())](Tape& t) {
                const Mat& g = t.nodes_[out].grad;
                if (t.nodes_[a].requires_grad)
                  t.grad_buffer(a).noalias() += g * t.nodes_[b].value.transpose();
                if (t.nodes_[b].requires_grad)
                  t.grad_buffer(b).noalias() += t.nodes_[a].value.transpose() * g;
              });
}

Var Tape::add_rowvec(Var x, Var v) {
  const bool rg = nodes_[x.id].requires_grad || nodes_[v.id].requires_grad;
  Mat out = nodes_[x.id].value.rowwise() + nodes_[v.id].value.row(0);
  return make(std::move(out), rg,
              [x = x.id, v = v.id, out = static_cast<int>(nodes_.size())](Tape& t) {
                const Mat& g = t.nodes_[out].grad;
                if (t.nodes_[x].requires_grad) t.grad_buffer(x) += g;
                if (t.nodes_[v].requires_grad) t.grad_buffer(v) += g.colwise().sum();
              });
}

Var Tape::mul_rowvec(Var x, Var v) {
  const bool rg = nodes_[x.id].requires_grad || nodes_[v.id].requires_grad;
  Mat out = nodes_[x.id].value.array().rowwise() * nodes_[v.id].value.row(0).array();
  return make(std::move(out), rg,
              [x = x.id, v = v.id, out = static_cast<int>(nodes_.size())](Tape& t) {
                const Mat& g = t.nodes_[out].grad;
                if (t.nodes_[x].requires_grad)
                  t.grad_buffer(x).array() += g.array().rowwise() * t.nodes_[v].value.row(0).array();
                if (t.nodes_[v].requires_grad)
                  t.grad_buffer(v) += g.cwiseProduct(t.nodes_[x].value).colwise().sum();
              });
}

Var Tape::linear(Var x, Var w, Var bias) { return add_rowvec(matmul(x, w), bias); }

Var Tape::concat_cols(Var a, Var b) {
  const bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  const int ca = a.cols(), cb = b.cols();
  Mat v(a.rows(), ca + cb);
  v.leftCols(ca) = nodes_[a.id].value;
  v.rightCols(cb) = nodes_[b.id].value;
  return make(std::move(v), rg,
              [a = a.id, b = b.id, ca, cb, out = static_cast<int>(nodes_.size())](Tape& t) {
                const Mat& g = t.nodes_[out].grad;
                if (t.nodes_[a].requires_grad) t.grad_buffer(a) += g.leftCols(ca);
                if (t.nodes_[b].requires_grad) t.grad_buffer(b) += g.rightCols(cb);
              });
}

Var Tape::slice_cols(Var x, int first, int count) {
  Mat v = nodes_[x.id].value.middleCols(first, count);
  return make(std::move(v), nodes_[x.id].requires_grad,
              [x = x.id, first, count, out = static_cast<int>(nodes_.size())](Tape& t) {
                if (t.nodes_[x].requires_grad)
                  t.grad_buffer(x).middleCols(first, count) += t.nodes_[out].grad;
              });
}

Var Tape::concat_rows(Var a, Var b) {
  const bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  const int ra = a.rows(), rb = b.rows();
  Mat v(ra + rb, a.cols());
  v.topRows(ra) = nodes_[a.id].value;
  v.bottomRows(rb) = nodes_[b.id].value;
  return make(std::move(v), rg,
              [a = a.id, b = b.id, ra, rb, out = static_cast<int>(nodes_.size())](Tape& t) {
                const Mat& g = t.nodes_[out].grad;
                if (t.nodes_[a].requires_grad) t.grad_buffer(a) += g.topRows(ra);
                if (t.nodes_[b].requires_grad) t.grad_buffer(b) += g.bottomRows(rb);
              });
}

Var Tape::gather_rows(Var x, std::vector<int> index) {
  Mat v(static_cast<int>(index.size()), x.cols());
  for (int r = 0; r < v.rows(); ++r) v.row(r) = nodes_[x.id].value.row(index[r]);
  return make(std::move(v), nodes_[x.id].requires_grad,
              [x = x.id, index = std::move(index), out = static_cast<int>(nodes_.size())](Tape& t) {
                if (!t.nodes_[x].requires_grad) return;
                Mat& gx = t.grad_buffer(x);
                const Mat& g = t.nodes_[out].grad;
                for (int r = 0; r < g.rows(); ++r) gx.row(index[r]) += g.row(r);
              });
}

Var Tape::scale_rows(Var x, Vec weights) {
  Mat v = nodes_[x.id].value.array().colwise() * weights.array();
  return make(std::move(v), nodes_[x.id].requires_grad,
              [x = x.id, weights = std::move(weights), out = static_cast<int>(nodes_.size())](Tape& t) {
                if (t.nodes_[x].requires_grad)
                  t.grad_buffer(x).array() += t.nodes_[out].grad.array().colwise() * weights.array();
              });
}

Var Tape::pick_cols(Var x, std::vector<int> col) {
  Mat v(x.rows(), 1);
  for (int r = 0; r < v.rows(); ++r) v(r, 0) = nodes_[x.id].value(r, col[r]);
  return make(std::move(v), nodes_[x.id].requires_grad,
              [x = x.id, col = std::move(col), out = static_cast<int>(nodes_.size())](Tape& t) {
                if (!t.nodes_[x].requires_grad) return;
                Mat& gx = t.grad_buffer(x);
                const Mat& g = t.nodes_[out].grad;
                for (int r = 0; r < g.rows(); ++r) gx(r, col[r]) += g(r, 0);
              });
}

// ---------------------------------------------------------------------------

Var Tape::group_softmax(Var x, std::vector<int> group, int n_groups,
                        std::vector<std::uint8_t> mask) {
  const Mat& xv = nodes_[x.id].value;
  const int rows = static_cast<int>(xv.rows());
  const int cols = static_cast<int>(xv.cols());
  constexpr Scalar kNegInf = -std::numeric_limits<Scalar>::infinity();

  Mat mx = Mat::Constant(n_groups, cols, kNegInf);
  for (int r = 0; r < rows; ++r)
    if (mask[r]) mx.row(group[r]) = mx.row(group[r]).cwiseMax(xv.row(r));
  Mat sum = Mat::Zero(n_groups, cols);
  Mat v = Mat::Zero(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!mask[r]) continue;
    v.row(r) = (xv.row(r) - mx.row(group[r])).array().exp();
    sum.row(group[r]) += v.row(r);
  }
  for (int r = 0; r < rows; ++r) {
    if (!mask[r]) continue;
    v.row(r).array() /= sum.row(group[r]).array();
  }

  return make(std::move(v), nodes_[x.id].requires_grad,
              [x = x.id, group = std::move(group), n_groups, mask = std::move(mask),
               out = static_cast<int>(nodes_.size())](Tape& t) {
                if (!t.nodes_[x].requires_grad) return;
                const Mat& y = t.nodes_[out].value;
                const Mat& gy = t.nodes_[out].grad;
                Mat dot = Mat::Zero(n_groups, y.cols());
                for (int r = 0; r < y.rows(); ++r)
                  if (mask[r]) dot.row(group[r]) += y.row(r).cwiseProduct(gy.row(r));
                Mat& gx = t.grad_buffer(x);
                for (int r = 0; r < y.rows(); ++r)
                  if (mask[r])
                    gx.row(r) += y.row(r).cwiseProduct(gy.row(r) - dot.row(group[r]));
              });
}

Var Tape::group_sum(Var x, std::vector<int> group, int n_groups) {
  const Mat& xv = nodes_[x.id].value;
  Mat v = Mat::Zero(n_groups, xv.cols());
  for (int r = 0; r < xv.rows(); ++r) v.row(group[r]) += xv.row(r);
  return make(std::move(v), nodes_[x.id].requires_grad,
              [x = x.id, group = std::move(group), out = static_cast<int>(nodes_.size())](Tape& t) {
                if (!t.nodes_[x].requires_grad) return;
                Mat& gx = t.grad_buffer(x);
                const Mat& g = t.nodes_[out].grad;
                for (int r = 0; r < gx.rows(); ++r) gx.row(r) += g.row(group[r]);
              });
}

Var Tape::heads_dot(Var a, Var b, int n_heads) {
  const Mat& av = nodes_[a.id].value;
  const Mat& bv = nodes_[b.id].value;
  const int dh = static_cast<int>(av.cols()) / n_heads;
  Mat v(av.rows(), n_heads);
  for (int h = 0; h < n_heads; ++h)
    v.col(h) = av.middleCols(h * dh, dh).cwiseProduct(bv.middleCols(h * dh, dh)).rowwise().sum();
  const bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return make(std::move(v), rg,
              [a = a.id, b = b.id, n_heads, dh, out = static_cast<int>(nodes_.size())](Tape& t) {
                const Mat& g = t.nodes_[out].grad;
                const Mat& av = t.nodes_[a].value;
                const Mat& bv = t.nodes_[b].value;
                for (int h = 0; h < n_heads; ++h) {
                  if (t.nodes_[a].requires_grad)
                    t.grad_buffer(a).middleCols(h * dh, dh).array() +=
                        bv.middleCols(h * dh, dh).array().colwise() * g.col(h).array();
                  if (t.nodes_[b].requires_grad)
                    t.grad_buffer(b).middleCols(h * dh, dh).array() +=
                        av.middleCols(h * dh, dh).array().colwise() * g.col(h).array();
                }
              });
}

Var Tape::mul_headwise(Var v, Var s, int n_heads) {
  const Mat& vv = nodes_[v.id].value;
  const Mat& sv = nodes_[s.id].value;
  const int dh = static_cast<int>(vv.cols()) / n_heads;
  Mat out(vv.rows(), vv.cols());
  for (int h = 0; h < n_heads; ++h)
    out.middleCols(h * dh, dh) = vv.middleCols(h * dh, dh).array().colwise() * sv.col(h).array();
  const bool rg = nodes_[v.id].requires_grad || nodes_[s.id].requires_grad;
  return make(std::move(out), rg,
              [v = v.id, s = s.id, n_heads, dh, out = static_cast<int>(nodes_.size())](Tape& t) {
                const Mat& g = t.nodes_[out].grad;
                const Mat& vv = t.nodes_[v].value;
                const Mat& sv = t.nodes_[s].value;
                for (int h = 0; h < n_heads; ++h) {
                  if (t.nodes_[v].requires_grad)
                    t.grad_buffer(v).middleCols(h * dh, dh).array() +=
                        g.middleCols(h * dh, dh).array().colwise() * sv.col(h).array();
                  if (t.nodes_[s].requires_grad)
                    t.grad_buffer(s).col(h) +=
                        g.middleCols(h * dh, dh).cwiseProduct(vv.middleCols(h * dh, dh)).rowwise().sum();
                }
              });
}

// ---------------------------------------------------------------------------

Var Tape::layer_norm(Var x, Var gamma, Var beta, Scalar eps) {
  const Mat& xv = nodes_[x.id].value;
  const int cols = static_cast<int>(xv.cols());
  Vec mean = xv.rowwise().mean();
  Mat centered = xv.colwise() - mean;
  Vec var = centered.array().square().rowwise().mean();
  Vec inv_std = (var.array() + eps).rsqrt();
  Mat normed = centered.array().colwise() * inv_std.array();
  Mat v = (normed.array().rowwise() * nodes_[gamma.id].value.row(0).array()).rowwise() +
          nodes_[beta.id].value.row(0).array();
  const bool rg = nodes_[x.id].requires_grad || nodes_[gamma.id].requires_grad ||
                  nodes_[beta.id].requires_grad;
  auto cache_normed = std::make_shared<Mat>(std::move(normed));
  auto cache_inv = std::make_shared<Vec>(std::move(inv_std));
  return make(std::move(v), rg,
              [x = x.id, gamma = gamma.id, beta = beta.id, cols, cache_normed, cache_inv,
               out = static_cast<int>(nodes_.size())](Tape& t) {
                const Mat& gy = t.nodes_[out].grad;
                const Mat& xhat = *cache_normed;
                if (t.nodes_[beta].requires_grad) t.grad_buffer(beta) += gy.colwise().sum();
                if (t.nodes_[gamma].requires_grad)
                  t.grad_buffer(gamma) += gy.cwiseProduct(xhat).colwise().sum();
                if (t.nodes_[x].requires_grad) {
                  Mat gxhat = gy.array().rowwise() * t.nodes_[gamma].value.row(0).array();
                  Vec m1 = gxhat.rowwise().mean();
                  Vec m2 = gxhat.cwiseProduct(xhat).rowwise().mean();
                  Mat gx = ((gxhat.colwise() - m1) - (xhat.array().colwise() * m2.array()).matrix())
                               .array()
                               .colwise() *
                           cache_inv->array();
                  t.grad_buffer(x) += gx;
                }
                (void)cols;
              });
}

Var Tape::log_softmax_rows(Var x) {
  const Mat& xv = nodes_[x.id].value;
  Vec mx = xv.rowwise().maxCoeff();
  Mat shifted = xv.colwise() - mx;
  Vec lse = shifted.array().exp().rowwise().sum().log();
  Mat v = shifted.colwise() - lse;
  return make(std::move(v), nodes_[x.id].requires_grad,
              [x = x.id, out = static_cast<int>(nodes_.size())](Tape& t) {
                if (!t.nodes_[x].requires_grad) return;
                const Mat& y = t.nodes_[out].value;
                const Mat& gy = t.nodes_[out].grad;
                Vec gsum = gy.rowwise().sum();
                t.grad_buffer(x) +=
                    gy - (y.array().exp().colwise() * gsum.array()).matrix();
              });
}

Var Tape::sum_all(Var x) {
  Mat v(1, 1);
  v(0, 0) = nodes_[x.id].value.sum();
  return make(std::move(v), nodes_[x.id].requires_grad,
              [x = x.id, out = static_cast<int>(nodes_.size())](Tape& t) {
                if (t.nodes_[x].requires_grad)
                  t.grad_buffer(x).array() += t.nodes_[out].grad(0, 0);
              });
}

Var Tape::row_sum(Var x) {
  Mat v = nodes_[x.id].value.rowwise().sum();
  return make(std::move(v), nodes_[x.id].requires_grad,
              [x = x.id, out = static_cast<int>(nodes_.size())](Tape& t) {
                if (t.nodes_[x].requires_grad)
                  t.grad_buffer(x).array().colwise() += t.nodes_[out].grad.col(0).array();
              });
}

Var Tape::detach(Var x) { return constant(nodes_[x.id].value); }

void Tape::backward(Var loss) {
  if (loss.rows() != 1 || loss.cols() != 1) throw ArgumentError("backward: loss must be 1x1");
  grad_buffer(loss.id)(0, 0) = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.backward && n.grad.size() > 0) n.backward(*this);
  }
}

double finite_difference_check(const Mat& leaf_value,
                               const std::function<Var(Tape&, Var)>& loss_fn, double step) {
  Mat analytic;
  {
    Tape tape;
    Var x = tape.leaf(leaf_value);
    Var loss = loss_fn(tape, x);
    tape.backward(loss);
    analytic = tape.grad(x);
  }
  auto eval = [&](const Mat& v) {
    Tape tape;
    Var x = tape.leaf(v);
    return loss_fn(tape, x).value()(0, 0);
  };
  double worst = 0.0;
  for (int r = 0; r < leaf_value.rows(); ++r) {
    for (int c = 0; c < leaf_value.cols(); ++c) {
      Mat plus = leaf_value, minus = leaf_value;
      plus(r, c) += step;
      minus(r, c) -= step;
      const double fd = (eval(plus) - eval(minus)) / (2.0 * step);
      const double a = analytic(r, c);
      const double rel = std::abs(a - fd) / std::max({1e-4, std::abs(a), std::abs(fd)});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace glav::ad
