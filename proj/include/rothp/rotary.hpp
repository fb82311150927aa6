#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rothp {

// Frequency ladder for the rotary temporal embedding: one angular
// frequency per 2-d block of a head vector,
//
//   thetas[j] = 10000^(-2j / head_dim),   j = 0 .. head_dim/2 - 1
//
// so thetas[0] == 1 exactly and the ladder is strictly decreasing.
struct RotaryTable {
  std::size_t head_dim = 0;
  std::vector<double> thetas;
};

RotaryTable build_theta(std::size_t head_dim);

// Applies the block-diagonal rotation for timestamp t in place:
// per block j, (x1, x2) -> (cos(t*th)*x1 + sin(t*th)*x2,
//                           -sin(t*th)*x1 + cos(t*th)*x2).
// Orthogonal, so the Euclidean norm is preserved.
void rotate_inplace(std::span<double> x, double t, const RotaryTable& table);

std::vector<double> rotate(std::span<const double> x, double t, const RotaryTable& table);

// rotate(q, t_i) . rotate(k, t_j); equals q . rotate(k, t_j - t_i), so the
// score depends on the timestamps only through their difference.
double relative_score(std::span<const double> q, std::span<const double> k, double t_i, double t_j,
                      const RotaryTable& table);

}  // namespace rothp
