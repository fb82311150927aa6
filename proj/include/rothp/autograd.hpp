#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rothp/tensor.hpp"

namespace rothp {

// Minimal reverse-mode tape. Values are computed eagerly as nodes are
// created; backward() replays the tape in reverse creation order (which is
// a topological order by construction) with fixed accumulation order, so
// gradients are bitwise reproducible.
//
// Generic tensor ops live here; domain-specific fused ops (rotary
// application, intensity terms) are built in their own modules through
// make_node().
class Graph {
 public:
  struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  // Backward callback: read grad(self), accumulate into parents' grads.
  using BackwardFn = std::function<void(Graph&, Var self)>;

  Var leaf(Tensor value, bool requires_grad = false);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  // Registers a node whose value was computed by the caller. backward may
  // be empty when no parent requires gradients.
  Var make_node(const std::vector<Var>& parents, Tensor value, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  const Tensor& grad(Var v) const { return nodes_[v.id].grad; }
  Tensor& grad_mut(Var v) { return nodes_[v.id].grad; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  bool any_requires_grad(const std::vector<Var>& vars) const;

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape once. `loss` must hold a
  // single element.
  void backward(Var loss);

  std::size_t node_count() const { return nodes_.size(); }

  // --- generic ops -------------------------------------------------------
  Var matmul(Var a, Var b);     // (m×k)(k×n)
  Var matmul_nt(Var a, Var b);  // (m×k)(n×k)^T -> m×n
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double c);
  Var add_rowvec(Var a, Var bias);  // bias length = cols(a), added to every row
  Var relu(Var a);
  Var layer_norm(Var x, Var gain, Var bias);  // row-wise, eps 1e-5
  Var slice_cols(Var a, std::size_t begin, std::size_t count);
  Var concat_cols(const std::vector<Var>& parts);
  Var first_rows(Var a, std::size_t count);
  // table is M×K; output n×M with row i = column indices[i] of table.
  Var gather_columns(Var table, const std::vector<int>& indices);
  // scores n×n; row j is softmaxed over columns 0..j, the rest are 0.
  Var causal_softmax(Var scores);
  // sum over rows of -log softmax(logits[row])[targets[row]].
  Var cross_entropy_sum(Var logits, const std::vector<int>& targets);
  // sum of (pred[i] - targets[i])^2; pred shape {n} or {n,1}.
  Var squared_error_sum(Var pred, std::span<const double> targets);
  // scalar: sum_i coeffs[i] * scalars[i].
  Var weighted_sum(const std::vector<Var>& scalars, const std::vector<double>& coeffs);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
};

}  // namespace rothp
