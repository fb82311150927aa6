#include "rothp/autograd.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rothp/errors.hpp"

namespace rothp {

namespace {

constexpr double kLayerNormEps = 1e-5;

// a^T b with a (m×k), b (m×n) -> k×n; used by matmul backwards.
Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor c({k, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a.at(i, p);
      const double* brow = &b.data()[i * n];
      double* crow = &c.data()[p * n];
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

void accumulate(Tensor& dst, const Tensor& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

Graph::Var Graph::leaf(Tensor value, bool requires_grad) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

bool Graph::any_requires_grad(const std::vector<Var>& vars) const {
  for (Var v : vars) {
    if (nodes_[v.id].requires_grad) return true;
  }
  return false;
}

Graph::Var Graph::make_node(const std::vector<Var>& parents, Tensor value, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = any_requires_grad(parents);
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Graph::backward(Var loss) {
  if (value(loss).size() != 1) {
    throw DimensionError("backward: loss must be a scalar, got " + value(loss).shape_string());
  }
  for (Node& node : nodes_) {
    node.grad = Tensor::zeros(node.value.shape());
  }
  nodes_[loss.id].grad[0] = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& node = nodes_[id];
    if (node.requires_grad && node.backward) node.backward(*this, Var{id});
  }
}

Graph::Var Graph::matmul(Var a, Var b) {
  Tensor c = rothp::matmul(value(a), value(b));
  return make_node({a, b}, std::move(c), [a, b](Graph& g, Var self) {
    const Tensor& dc = g.grad(self);
    if (g.requires_grad(a)) accumulate(g.grad_mut(a), rothp::matmul_nt(dc, g.value(b)));
    if (g.requires_grad(b)) accumulate(g.grad_mut(b), matmul_tn(g.value(a), dc));
  });
}

Graph::Var Graph::matmul_nt(Var a, Var b) {
  Tensor c = rothp::matmul_nt(value(a), value(b));
  return make_node({a, b}, std::move(c), [a, b](Graph& g, Var self) {
    const Tensor& dc = g.grad(self);
    if (g.requires_grad(a)) accumulate(g.grad_mut(a), rothp::matmul(dc, g.value(b)));
    if (g.requires_grad(b)) accumulate(g.grad_mut(b), matmul_tn(dc, g.value(a)));
  });
}

Graph::Var Graph::add(Var a, Var b) {
  if (!value(a).same_shape(value(b))) {
    throw DimensionError("add shape mismatch: " + value(a).shape_string() + " vs " + value(b).shape_string());
  }
  Tensor c = value(a);
  accumulate(c, value(b));
  return make_node({a, b}, std::move(c), [a, b](Graph& g, Var self) {
    const Tensor& dc = g.grad(self);
    if (g.requires_grad(a)) accumulate(g.grad_mut(a), dc);
    if (g.requires_grad(b)) accumulate(g.grad_mut(b), dc);
  });
}

Graph::Var Graph::sub(Var a, Var b) {
  if (!value(a).same_shape(value(b))) {
    throw DimensionError("sub shape mismatch: " + value(a).shape_string() + " vs " + value(b).shape_string());
  }
  Tensor c = value(a);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= value(b)[i];
  return make_node({a, b}, std::move(c), [a, b](Graph& g, Var self) {
    const Tensor& dc = g.grad(self);
    if (g.requires_grad(a)) accumulate(g.grad_mut(a), dc);
    if (g.requires_grad(b)) {
      Tensor& db = g.grad_mut(b);
      for (std::size_t i = 0; i < db.size(); ++i) db[i] -= dc[i];
    }
  });
}

Graph::Var Graph::scale(Var a, double c) {
  Tensor out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
  return make_node({a}, std::move(out), [a, c](Graph& g, Var self) {
    const Tensor& dout = g.grad(self);
    Tensor& da = g.grad_mut(a);
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += c * dout[i];
  });
}

Graph::Var Graph::add_rowvec(Var a, Var bias) {
  const Tensor& av = value(a);
  const Tensor& bv = value(bias);
  if (bv.size() != av.cols()) {
    throw DimensionError("add_rowvec: bias length " + bv.shape_string() + " vs columns of " + av.shape_string());
  }
  Tensor out = av;
  const std::size_t m = av.rows(), n = av.cols();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bv[j];
  }
  return make_node({a, bias}, std::move(out), [a, bias, m, n](Graph& g, Var self) {
    const Tensor& dout = g.grad(self);
    if (g.requires_grad(a)) accumulate(g.grad_mut(a), dout);
    if (g.requires_grad(bias)) {
      Tensor& db = g.grad_mut(bias);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) db[j] += dout[i * n + j];
      }
    }
  });
}

Graph::Var Graph::relu(Var a) {
  Tensor out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
  return make_node({a}, std::move(out), [a](Graph& g, Var self) {
    const Tensor& dout = g.grad(self);
    const Tensor& av = g.value(a);
    Tensor& da = g.grad_mut(a);
    for (std::size_t i = 0; i < da.size(); ++i) {
      if (av[i] > 0.0) da[i] += dout[i];
    }
  });
}

Graph::Var Graph::layer_norm(Var x, Var gain, Var bias) {
  const Tensor& xv = value(x);
  const std::size_t m = xv.rows(), n = xv.cols();
  if (value(gain).size() != n || value(bias).size() != n) {
    throw DimensionError("layer_norm: gain/bias length must equal columns of " + xv.shape_string());
  }
  const Tensor& gv = value(gain);
  const Tensor& bv = value(bias);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += xv.at(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = xv.at(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
    for (std::size_t j = 0; j < n; ++j) {
      out.at(i, j) = gv[j] * (xv.at(i, j) - mean) * inv_std + bv[j];
    }
  }
  return make_node({x, gain, bias}, std::move(out), [x, gain, bias, m, n](Graph& g, Var self) {
    const Tensor& dout = g.grad(self);
    const Tensor& xv = g.value(x);
    const Tensor& gv = g.value(gain);
    for (std::size_t i = 0; i < m; ++i) {
      double mean = 0.0;
      for (std::size_t j = 0; j < n; ++j) mean += xv.at(i, j);
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double d = xv.at(i, j) - mean;
        var += d * d;
      }
      var /= static_cast<double>(n);
      const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);

      // dxhat, and the two row reductions needed for dx
      double sum_dxhat = 0.0;
      double sum_dxhat_xhat = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double xhat = (xv.at(i, j) - mean) * inv_std;
        const double dxhat = dout.at(i, j) * gv[j];
        sum_dxhat += dxhat;
        sum_dxhat_xhat += dxhat * xhat;
      }
      if (g.requires_grad(x)) {
        Tensor& dx = g.grad_mut(x);
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) {
          const double xhat = (xv.at(i, j) - mean) * inv_std;
          const double dxhat = dout.at(i, j) * gv[j];
          dx.at(i, j) += inv_std * (dxhat - inv_n * sum_dxhat - xhat * inv_n * sum_dxhat_xhat);
        }
      }
      if (g.requires_grad(gain)) {
        Tensor& dg = g.grad_mut(gain);
        for (std::size_t j = 0; j < n; ++j) {
          const double xhat = (xv.at(i, j) - mean) * inv_std;
          dg[j] += dout.at(i, j) * xhat;
        }
      }
      if (g.requires_grad(bias)) {
        Tensor& db = g.grad_mut(bias);
        for (std::size_t j = 0; j < n; ++j) db[j] += dout.at(i, j);
      }
    }
  });
}

Graph::Var Graph::slice_cols(Var a, std::size_t begin, std::size_t count) {
  const Tensor& av = value(a);
  const std::size_t m = av.rows(), n = av.cols();
  if (begin + count > n) {
    throw DimensionError("slice_cols [" + std::to_string(begin) + "," + std::to_string(begin + count) +
                         ") out of range for " + av.shape_string());
  }
  Tensor out({m, count});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < count; ++j) out.at(i, j) = av.at(i, begin + j);
  }
  return make_node({a}, std::move(out), [a, begin, count, m](Graph& g, Var self) {
    const Tensor& dout = g.grad(self);
    Tensor& da = g.grad_mut(a);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < count; ++j) da.at(i, begin + j) += dout.at(i, j);
    }
  });
}

Graph::Var Graph::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no parts");
  const std::size_t m = value(parts[0]).rows();
  std::size_t total = 0;
  for (Var p : parts) {
    if (value(p).rows() != m) throw DimensionError("concat_cols: row count mismatch");
    total += value(p).cols();
  }
  Tensor out({m, total});
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor& pv = value(p);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < pv.cols(); ++j) out.at(i, offset + j) = pv.at(i, j);
    }
    offset += pv.cols();
  }
  return make_node(parts, std::move(out), [parts, m](Graph& g, Var self) {
    const Tensor& dout = g.grad(self);
    std::size_t offset = 0;
    for (Var p : parts) {
      const std::size_t cols = g.value(p).cols();
      if (g.requires_grad(p)) {
        Tensor& dp = g.grad_mut(p);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < cols; ++j) dp.at(i, j) += dout.at(i, offset + j);
        }
      }
      offset += cols;
    }
  });
}

Graph::Var Graph::first_rows(Var a, std::size_t count) {
  const Tensor& av = value(a);
  const std::size_t n = av.cols();
  if (count > av.rows()) {
    throw DimensionError("first_rows: " + std::to_string(count) + " rows requested from " + av.shape_string());
  }
  Tensor out({count, n});
  for (std::size_t i = 0; i < count * n; ++i) out[i] = av[i];
  return make_node({a}, std::move(out), [a, count, n](Graph& g, Var self) {
    const Tensor& dout = g.grad(self);
    Tensor& da = g.grad_mut(a);
    for (std::size_t i = 0; i < count * n; ++i) da[i] += dout[i];
  });
}

Graph::Var Graph::gather_columns(Var table, const std::vector<int>& indices) {
  const Tensor& tv = value(table);
  const std::size_t m = tv.rows(), k = tv.cols();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || static_cast<std::size_t>(indices[i]) >= k) {
      throw DataError("gather_columns: index " + std::to_string(indices[i]) + " out of range [0," +
                      std::to_string(k) + ") at position " + std::to_string(i));
    }
  }
  Tensor out({indices.size(), m});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t col = static_cast<std::size_t>(indices[i]);
    for (std::size_t r = 0; r < m; ++r) out.at(i, r) = tv.at(r, col);
  }
  return make_node({table}, std::move(out), [table, indices, m](Graph& g, Var self) {
    const Tensor& dout = g.grad(self);
    Tensor& dt = g.grad_mut(table);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const std::size_t col = static_cast<std::size_t>(indices[i]);
      for (std::size_t r = 0; r < m; ++r) dt.at(r, col) += dout.at(i, r);
    }
  });
}

Graph::Var Graph::causal_softmax(Var scores) {
  const Tensor& sv = value(scores);
  const std::size_t n = sv.rows();
  if (sv.cols() != n) throw DimensionError("causal_softmax requires a square matrix, got " + sv.shape_string());
  Tensor out({n, n});
  for (std::size_t j = 0; j < n; ++j) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= j; ++i) mx = std::max(mx, sv.at(j, i));
    double sum = 0.0;
    for (std::size_t i = 0; i <= j; ++i) {
      const double e = std::exp(sv.at(j, i) - mx);
      out.at(j, i) = e;
      sum += e;
    }
    for (std::size_t i = 0; i <= j; ++i) out.at(j, i) /= sum;
  }
  return make_node({scores}, std::move(out), [scores, n](Graph& g, Var self) {
    const Tensor& p = g.value(self);
    const Tensor& dp = g.grad(self);
    Tensor& ds = g.grad_mut(scores);
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t i = 0; i <= j; ++i) dot += dp.at(j, i) * p.at(j, i);
      for (std::size_t i = 0; i <= j; ++i) ds.at(j, i) += p.at(j, i) * (dp.at(j, i) - dot);
    }
  });
}

Graph::Var Graph::cross_entropy_sum(Var logits, const std::vector<int>& targets) {
  const Tensor& lv = value(logits);
  const std::size_t r = lv.rows(), k = lv.cols();
  if (targets.size() != r) {
    throw DimensionError("cross_entropy_sum: " + std::to_string(targets.size()) + " targets for " +
                         lv.shape_string() + " logits");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    const int t = targets[i];
    if (t < 0 || static_cast<std::size_t>(t) >= k) {
      throw DataError("cross_entropy_sum: target " + std::to_string(t) + " out of range at row " +
                      std::to_string(i));
    }
    double mx = lv.at(i, 0);
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, lv.at(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += std::exp(lv.at(i, j) - mx);
    loss += mx + std::log(sum) - lv.at(i, static_cast<std::size_t>(t));
  }
  return make_node({logits}, Tensor::scalar(loss), [logits, targets, r, k](Graph& g, Var self) {
    const double dl = g.grad(self)[0];
    const Tensor& lv = g.value(logits);
    Tensor& dlogits = g.grad_mut(logits);
    for (std::size_t i = 0; i < r; ++i) {
      double mx = lv.at(i, 0);
      for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, lv.at(i, j));
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) sum += std::exp(lv.at(i, j) - mx);
      for (std::size_t j = 0; j < k; ++j) {
        const double p = std::exp(lv.at(i, j) - mx) / sum;
        dlogits.at(i, j) += dl * (p - (static_cast<std::size_t>(targets[i]) == j ? 1.0 : 0.0));
      }
    }
  });
}

Graph::Var Graph::squared_error_sum(Var pred, std::span<const double> targets) {
  const Tensor& pv = value(pred);
  if (pv.size() != targets.size()) {
    throw DimensionError("squared_error_sum: " + std::to_string(targets.size()) + " targets for " +
                         pv.shape_string() + " predictions");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double d = pv[i] - targets[i];
    loss += d * d;
  }
  std::vector<double> t(targets.begin(), targets.end());
  return make_node({pred}, Tensor::scalar(loss), [pred, t = std::move(t)](Graph& g, Var self) {
    const double dl = g.grad(self)[0];
    const Tensor& pv = g.value(pred);
    Tensor& dp = g.grad_mut(pred);
    for (std::size_t i = 0; i < pv.size(); ++i) dp[i] += dl * 2.0 * (pv[i] - t[i]);
  });
}

Graph::Var Graph::weighted_sum(const std::vector<Var>& scalars, const std::vector<double>& coeffs) {
  if (scalars.size() != coeffs.size() || scalars.empty()) {
    throw DimensionError("weighted_sum: need matching, nonempty scalars and coefficients");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    if (value(scalars[i]).size() != 1) {
      throw DimensionError("weighted_sum: operand " + std::to_string(i) + " is not a scalar");
    }
    total += coeffs[i] * value(scalars[i])[0];
  }
  return make_node(scalars, Tensor::scalar(total), [scalars, coeffs](Graph& g, Var self) {
    const double dl = g.grad(self)[0];
    for (std::size_t i = 0; i < scalars.size(); ++i) {
      if (g.requires_grad(scalars[i])) g.grad_mut(scalars[i])[0] += dl * coeffs[i];
    }
  });
}

}  // namespace rothp
