#pragma once

// Row-major dense tensor. Everything in this project is 1-D or 2-D; 1-D
// tensors have shape {n} and read as a single row through rows()/cols().

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace srslab {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    data.assign(count(shape), 0.0);
  }

  static std::size_t count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return s.empty() ? 0 : n;
  }

  static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }

  static Tensor full(std::vector<std::size_t> s, double v) {
    Tensor t(std::move(s));
    for (double& x : t.data) x = v;
    return t;
  }

  static Tensor row(std::vector<double> values) {
    Tensor t;
    t.shape = {1, values.size()};
    t.data = std::move(values);
    return t;
  }

  static Tensor matrix(std::size_t r, std::size_t c, std::vector<double> values) {
    if (values.size() != r * c) throw std::invalid_argument("matrix data does not fill shape");
    Tensor t;
    t.shape = {r, c};
    t.data = std::move(values);
    return t;
  }

  std::size_t size() const { return data.size(); }
  std::size_t rows() const { return shape.size() == 2 ? shape[0] : (shape.empty() ? 0 : 1); }
  std::size_t cols() const { return shape.size() == 2 ? shape[1] : (shape.empty() ? 0 : shape[0]); }

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

  void resize2(std::size_t r, std::size_t c) {
    shape = {r, c};
    data.resize(r * c);
  }

  void fill(double v) {
    for (double& x : data) x = v;
  }
};

}  // namespace srslab
