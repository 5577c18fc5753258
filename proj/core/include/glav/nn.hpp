// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/tape.hpp"

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace glav::nn {

enum class Init { Xavier, Zero, One };

/// Named parameter tensors with deterministic per-name initialization, so a
/// model's weights do not depend on the order modules are first executed in.
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t init_seed = 1) : init_seed_(init_seed) {}

  Mat& ensure(const std::string& name, int rows, int cols, Init init);
  Mat& at(const std::string& name);
  const Mat& at(const std::string& name) const;
  bool contains(const std::string& name) const { return values_.count(name) > 0; }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t scalar_count() const;

  void save(std::ostream& out) const;
  void load(std::istream& in);

 private:
  std::uint64_t init_seed_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, Mat> values_;
};

/// Binds (lazily creating) a parameter into the tape.
ad::Var weight(ad::Tape& t, ParameterStore& p, const std::string& name, int rows, int cols,
               Init init = Init::Xavier);

/// x W + b.
ad::Var dense(ad::Tape& t, ParameterStore& p, const std::string& prefix, ad::Var x, int out_dim);
ad::Var dense_nobias(ad::Tape& t, ParameterStore& p, const std::string& prefix, ad::Var x,
                     int out_dim);
/// LayerNorm with learned gain/bias.
ad::Var layer_norm(ad::Tape& t, ParameterStore& p, const std::string& prefix, ad::Var x);
/// dense -> GELU -> dense.
ad::Var mlp2(ad::Tape& t, ParameterStore& p, const std::string& prefix, ad::Var x, int hidden,
             int out_dim);

/// AdamW with decoupled weight decay (skipped for single-row tensors, i.e.
/// biases and norm gains).
class AdamW {
 public:
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;

  void step(ParameterStore& params, const ad::Tape& tape, double lr, double max_grad_norm = 0.0);
  std::int64_t steps_taken() const { return t_; }

  void save(std::ostream& out) const;
  void load(std::istream& in);

 private:
  std::int64_t t_ = 0;
  std::unordered_map<std::string, Mat> m_, v_;
};

void write_matrix(std::ostream& out, const Mat& m);
Mat read_matrix(std::istream& in);
void write_string(std::ostream& out, const std::string& s);
std::string read_string(std::istream& in);

}  // namespace glav::nn
