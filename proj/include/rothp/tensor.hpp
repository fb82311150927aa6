#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rothp {

// Dense row-major tensor of 64-bit floats. Values are plain data; all
// operations on tensors are free functions that return new tensors.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }
  bool is_scalar() const { return values_.size() == 1; }

  // 2-D accessors; rows()/cols() throw DimensionError unless rank is 2.
  std::size_t rows() const;
  std::size_t cols() const;
  double& at(std::size_t i, std::size_t j);
  double at(std::size_t i, std::size_t j) const;

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> data() { return values_; }
  std::span<const double> data() const { return values_; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_string() const;

  bool all_finite() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

// Standard matrix product with a fixed left-to-right summation order within
// each dot product. Throws DimensionError naming both shapes on mismatch.
Tensor matmul(const Tensor& a, const Tensor& b);

// a (m×k) times b^T (b given as n×k); same summation order as matmul.
Tensor matmul_nt(const Tensor& a, const Tensor& b);

// Row-wise softmax with per-row max subtraction. An optional mask (same
// shape, nonzero = keep) zeroes the excluded entries exactly; a fully
// masked row raises DataError.
Tensor softmax_rows(const Tensor& a);
Tensor softmax_rows(const Tensor& a, const Tensor& mask);

// beta * log(1 + exp(x / beta)), with the asymptotic branch x for
// x/beta > 30 so large arguments never overflow. beta must be > 0.
double softplus(double x, double beta);

// log(softplus(x, beta)) without underflowing for very negative x.
double log_softplus(double x, double beta);

// d softplus(x, beta) / dx == logistic(x / beta).
double softplus_dx(double x, double beta);

// d softplus(x, beta) / dbeta.
double softplus_dbeta(double x, double beta);

}  // namespace rothp
