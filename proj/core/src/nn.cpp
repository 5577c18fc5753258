// SPDX-License-Identifier: Apache-2.0
#include "glav/nn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <vector>

namespace glav::nn {

using ad::Tape;
using ad::Var;

Mat& ParameterStore::ensure(const std::string& name, int rows, int cols, Init init) {
  auto it = values_.find(name);
  if (it != values_.end()) {
    if (it->second.rows() != rows || it->second.cols() != cols)
      throw ConfigError("parameter shape mismatch for " + name);
    return it->second;
  }
  Mat m(rows, cols);
  switch (init) {
    case Init::Zero:
      m.setZero();
      break;
    case Init::One:
      m.setOnes();
      break;
    case Init::Xavier: {
      RandomStream rng(init_seed_ ^ fnv1a(name));
      const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-limit, limit);
      break;
    }
  }
  names_.push_back(name);
  return values_.emplace(name, std::move(m)).first->second;
}

Mat& ParameterStore::at(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) throw ConfigError("unknown parameter: " + name);
  return it->second;
}

const Mat& ParameterStore::at(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw ConfigError("unknown parameter: " + name);
  return it->second;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, m] : values_) n += static_cast<std::size_t>(m.size());
  return n;
}

void write_string(std::ostream& out, const std::string& s) {
  const std::uint64_t len = s.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(s.data(), static_cast<std::streamsize>(len));
}

std::string read_string(std::istream& in) {
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw ArgumentError("truncated string in stream");
  return s;
}

void write_matrix(std::ostream& out, const Mat& m) {
  const std::int64_t rows = m.rows(), cols = m.cols();
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(Scalar) * m.size()));
}

Mat read_matrix(std::istream& in) {
  std::int64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  Mat m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(Scalar) * m.size()));
  if (!in) throw ArgumentError("truncated matrix in stream");
  return m;
}

void ParameterStore::save(std::ostream& out) const {
  const std::uint64_t n = names_.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (const auto& name : names_) {
    write_string(out, name);
    write_matrix(out, values_.at(name));
  }
}

void ParameterStore::load(std::istream& in) {
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  names_.clear();
  values_.clear();
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string name = read_string(in);
    Mat m = read_matrix(in);
    names_.push_back(name);
    values_.emplace(std::move(name), std::move(m));
  }
}

Var weight(Tape& t, ParameterStore& p, const std::string& name, int rows, int cols, Init init) {
  return t.param(name, p.ensure(name, rows, cols, init));
}

Var dense(Tape& t, ParameterStore& p, const std::string& prefix, Var x, int out_dim) {
  Var w = weight(t, p, prefix + ".w", x.cols(), out_dim, Init::Xavier);
  Var b = weight(t, p, prefix + ".b", 1, out_dim, Init::Zero);
  return t.linear(x, w, b);
}

Var dense_nobias(Tape& t, ParameterStore& p, const std::string& prefix, Var x, int out_dim) {
  Var w = weight(t, p, prefix + ".w", x.cols(), out_dim, Init::Xavier);
  return t.matmul(x, w);
}

Var layer_norm(Tape& t, ParameterStore& p, const std::string& prefix, Var x) {
  Var g = weight(t, p, prefix + ".g", 1, x.cols(), Init::One);
  Var b = weight(t, p, prefix + ".b", 1, x.cols(), Init::Zero);
  return t.layer_norm(x, g, b);
}

Var mlp2(Tape& t, ParameterStore& p, const std::string& prefix, Var x, int hidden, int out_dim) {
  Var h = t.gelu(dense(t, p, prefix + ".fc1", x, hidden));
  return dense(t, p, prefix + ".fc2", h, out_dim);
}

void AdamW::step(ParameterStore& params, const ad::Tape& tape, double lr, double max_grad_norm) {
  ++t_;
  const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(t_));

  double scale = 1.0;
  if (max_grad_norm > 0.0) {
    double sq = 0.0;
    for (const auto& [name, id] : tape.bound_params()) {
      Mat g = tape.param_grad(name);
      sq += g.squaredNorm();
    }
    const double norm = std::sqrt(sq);
    if (norm > max_grad_norm) scale = max_grad_norm / norm;
  }

  for (const auto& [name, id] : tape.bound_params()) {
    Mat g = tape.param_grad(name) * scale;
    Mat& p = params.at(name);
    auto& m = m_[name];
    auto& v = v_[name];
    if (m.size() == 0) m = Mat::Zero(p.rows(), p.cols());
    if (v.size() == 0) v = Mat::Zero(p.rows(), p.cols());
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
    if (weight_decay > 0.0 && p.rows() > 1) p -= lr * weight_decay * p;
    p.array() -= lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + eps);
  }
}

void AdamW::save(std::ostream& out) const {
  out.write(reinterpret_cast<const char*>(&t_), sizeof(t_));
  const std::uint64_t n = m_.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  // Deterministic order: sort names.
  std::vector<std::string> names;
  names.reserve(m_.size());
  for (const auto& [name, m] : m_) names.push_back(name);
  std::sort(names.begin(), names.end());
  for (const auto& name : names) {
    write_string(out, name);
    write_matrix(out, m_.at(name));
    write_matrix(out, v_.at(name));
  }
}

void AdamW::load(std::istream& in) {
  in.read(reinterpret_cast<char*>(&t_), sizeof(t_));
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  m_.clear();
  v_.clear();
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string name = read_string(in);
    m_[name] = read_matrix(in);
    v_[name] = read_matrix(in);
  }
}

}  // namespace glav::nn
