#include "rothp/tensor.hpp"

#include <cmath>
#include <limits>

#include "rothp/errors.hpp"

namespace rothp {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive");
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), values_(shape_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != shape_product(shape_)) {
    throw DimensionError("value count " + std::to_string(values_.size()) +
                         " does not match shape " + shape_string());
  }
}

std::size_t Tensor::rows() const {
  if (shape_.size() != 2) throw DimensionError("rows() requires a rank-2 tensor, got " + shape_string());
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (shape_.size() != 2) throw DimensionError("cols() requires a rank-2 tensor, got " + shape_string());
  return shape_[1];
}

double& Tensor::at(std::size_t i, std::size_t j) { return values_[i * cols() + j]; }
double Tensor::at(std::size_t i, std::size_t j) const { return values_[i * cols() + j]; }

std::string Tensor::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

bool Tensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.cols() != b.rows()) {
    throw DimensionError("matmul shape mismatch: " + a.shape_string() + " x " + b.shape_string());
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor c({m, n});
  // i-k-j loop order: contiguous access on b and c, and the accumulation
  // into c(i,j) still runs over k ascending (fixed summation order).
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a.at(i, p);
      const double* brow = &b.data()[p * n];
      double* crow = &c.data()[i * n];
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.cols() != b.cols()) {
    throw DimensionError("matmul_nt shape mismatch: " + a.shape_string() + " x " + b.shape_string() + "^T");
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  Tensor c({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = &a.data()[i * k];
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = &b.data()[j * k];
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      c.at(i, j) = acc;
    }
  }
  return c;
}

namespace {

Tensor softmax_rows_impl(const Tensor& a, const Tensor* mask) {
  if (a.shape().size() != 2) throw DimensionError("softmax_rows requires a rank-2 tensor, got " + a.shape_string());
  if (mask && !a.same_shape(*mask)) {
    throw DimensionError("softmax mask shape " + mask->shape_string() + " does not match input " + a.shape_string());
  }
  const std::size_t m = a.rows(), n = a.cols();
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (mask && mask->at(i, j) == 0.0) continue;
      mx = std::max(mx, a.at(i, j));
    }
    if (mx == -std::numeric_limits<double>::infinity()) {
      throw DataError("softmax_rows: row " + std::to_string(i) + " is fully masked");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask && mask->at(i, j) == 0.0) continue;
      const double e = std::exp(a.at(i, j) - mx);
      out.at(i, j) = e;
      sum += e;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (mask && mask->at(i, j) == 0.0) {
        out.at(i, j) = 0.0;
      } else {
        out.at(i, j) /= sum;
      }
    }
  }
  return out;
}

}  // namespace

Tensor softmax_rows(const Tensor& a) { return softmax_rows_impl(a, nullptr); }
Tensor softmax_rows(const Tensor& a, const Tensor& mask) { return softmax_rows_impl(a, &mask); }

double softplus(double x, double beta) {
  if (!(beta > 0.0)) throw ParameterError("softplus softness must be positive, got " + std::to_string(beta));
  const double z = x / beta;
  if (z > 30.0) return x;
  return beta * std::log1p(std::exp(z));
}

double log_softplus(double x, double beta) {
  if (!(beta > 0.0)) throw ParameterError("softplus softness must be positive, got " + std::to_string(beta));
  const double z = x / beta;
  if (z > 30.0) return std::log(x);
  if (z < -30.0) return std::log(beta) + z;  // log(beta * exp(z)) asymptote
  return std::log(beta) + std::log(std::log1p(std::exp(z)));
}

double softplus_dx(double x, double beta) {
  const double z = x / beta;
  if (z > 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus_dbeta(double x, double beta) {
  const double z = x / beta;
  if (z > 30.0) return (1.0 + z) * std::exp(-z);
  if (z < -30.0) return (1.0 - z) * std::exp(z);
  return std::log1p(std::exp(z)) - z * softplus_dx(x, beta);
}

}  // namespace rothp
