#include "rothp/rotary.hpp"

#include <cmath>
#include <string>

#include "rothp/errors.hpp"

namespace rothp {

RotaryTable build_theta(std::size_t head_dim) {
  if (head_dim < 2 || head_dim % 2 != 0) {
    throw DimensionError("rotary head_dim must be even and >= 2, got " + std::to_string(head_dim));
  }
  RotaryTable table;
  table.head_dim = head_dim;
  table.thetas.resize(head_dim / 2);
  const double d = static_cast<double>(head_dim);
  for (std::size_t j = 0; j < table.thetas.size(); ++j) {
    table.thetas[j] = std::pow(10000.0, -2.0 * static_cast<double>(j) / d);
  }
  return table;
}

void rotate_inplace(std::span<double> x, double t, const RotaryTable& table) {
  if (x.size() != table.head_dim) {
    throw DimensionError("rotate: vector length " + std::to_string(x.size()) +
                         " does not match head_dim " + std::to_string(table.head_dim));
  }
  for (std::size_t j = 0; j < table.thetas.size(); ++j) {
    const double angle = t * table.thetas[j];
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double x1 = x[2 * j];
    const double x2 = x[2 * j + 1];
    x[2 * j] = c * x1 + s * x2;
    x[2 * j + 1] = -s * x1 + c * x2;
  }
}

std::vector<double> rotate(std::span<const double> x, double t, const RotaryTable& table) {
  std::vector<double> out(x.begin(), x.end());
  rotate_inplace(out, t, table);
  return out;
}

double relative_score(std::span<const double> q, std::span<const double> k, double t_i, double t_j,
                      const RotaryTable& table) {
  if (q.size() != table.head_dim || k.size() != table.head_dim) {
    throw DimensionError("relative_score: vector lengths " + std::to_string(q.size()) + "/" +
                         std::to_string(k.size()) + " do not match head_dim " +
                         std::to_string(table.head_dim));
  }
  const std::vector<double> qr = rotate(q, t_i, table);
  const std::vector<double> kr = rotate(k, t_j, table);
  double acc = 0.0;
  for (std::size_t i = 0; i < qr.size(); ++i) acc += qr[i] * kr[i];
  return acc;
}

}  // namespace rothp
