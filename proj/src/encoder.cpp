#include "rothp/encoder.hpp"

#include <cmath>
#include <string>

#include "rothp/autograd.hpp"
#include "rothp/errors.hpp"
#include "rothp/model.hpp"
#include "rothp/rotary.hpp"

namespace rothp {

void EncoderConfig::validate() const {
  if (num_types < 1) throw ParameterError("num_types must be positive");
  if (d_model < 1 || d_ff < 1 || d_v < 1 || num_heads < 1 || num_layers < 1) {
    throw ParameterError("encoder dimensions must be positive");
  }
  if (head_dim < 2 || head_dim % 2 != 0) {
    throw DimensionError("head_dim must be even and >= 2, got " + std::to_string(head_dim));
  }
  if (!(time_scale > 0.0)) throw ParameterError("time_scale must be positive");
}

Tensor sinusoid_encoding(std::span<const double> times, std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) {
    throw DimensionError("sinusoid_encoding dimension must be even and positive, got " + std::to_string(dim));
  }
  Tensor out({times.size(), dim});
  const double d = static_cast<double>(dim);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    for (std::size_t c = 0; c < dim; ++c) {
      const double j = static_cast<double>(c + 1);  // 1-based entry index
      if (c % 2 == 0) {
        out.at(i, c) = std::cos(t / std::pow(10000.0, (j - 1.0) / d));
      } else {
        out.at(i, c) = std::sin(t / std::pow(10000.0, j / d));
      }
    }
  }
  return out;
}

Tensor embed_events(const EventSequence& seq, const EncoderParams& params) {
  const Tensor& table = params.event_embedding;
  const std::size_t m = table.rows(), k = table.cols();
  for (std::size_t i = 0; i < seq.marks.size(); ++i) {
    if (seq.marks[i] < 0 || static_cast<std::size_t>(seq.marks[i]) >= k) {
      throw DataError("embed_events: mark " + std::to_string(seq.marks[i]) +
                      " out of range at position " + std::to_string(i));
    }
  }
  Tensor out({seq.size(), m});
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const std::size_t col = static_cast<std::size_t>(seq.marks[i]);
    for (std::size_t r = 0; r < m; ++r) out.at(i, r) = table.at(r, col);
  }
  return out;
}

namespace {

// Rotates every head block of every row of x (n x heads*head_dim) by that
// row's timestamp. The backward transform is the rotation by -t (the
// blocks are orthogonal).
Graph::Var rotary_rows(Graph& g, Graph::Var x, const std::vector<double>& times,
                       const RotaryTable& table, std::size_t num_heads) {
  const Tensor& xv = g.value(x);
  const std::size_t n = xv.rows();
  const std::size_t width = table.head_dim;
  if (xv.cols() != num_heads * width) {
    throw DimensionError("rotary_rows: " + xv.shape_string() + " does not hold " +
                         std::to_string(num_heads) + " heads of width " + std::to_string(width));
  }
  Tensor out = xv;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t h = 0; h < num_heads; ++h) {
      rotate_inplace(out.data().subspan(i * xv.cols() + h * width, width), times[i], table);
    }
  }
  return g.make_node({x}, std::move(out), [x, times, table, num_heads, n, width](Graph& g, Graph::Var self) {
    const Tensor& dout = g.grad(self);
    Tensor rotated = dout;
    const std::size_t cols = num_heads * width;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t h = 0; h < num_heads; ++h) {
        rotate_inplace(rotated.data().subspan(i * cols + h * width, width), -times[i], table);
      }
    }
    Tensor& dx = g.grad_mut(x);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += rotated[i];
  });
}

}  // namespace

Graph::Var build_hidden_states(Graph& g, const EncoderVars& vars, const EncoderConfig& config,
                               const EventSequence& seq, EncodeTrace* trace) {
  config.validate();
  if (seq.size() == 0) throw DataError("encode: empty sequence");
  seq.validate(config.num_types);

  Graph::Var x = g.gather_columns(vars.event_embedding, seq.marks);

  if (config.mode == TemporalMode::kAbsolute) {
    x = g.add(x, g.constant(sinusoid_encoding(seq.times, config.d_model)));
  }

  const RotaryTable table = build_theta(config.head_dim);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(config.head_dim));

  for (std::size_t l = 0; l < config.num_layers; ++l) {
    const LayerVars& lv = vars.layers[l];

    Graph::Var pre = g.layer_norm(x, lv.ln1_gain, lv.ln1_bias);
    Graph::Var q = g.matmul(pre, lv.w_q);
    Graph::Var k = g.matmul(pre, lv.w_k);
    Graph::Var v = g.matmul(pre, lv.w_v);
    if (config.mode == TemporalMode::kRotary) {
      q = rotary_rows(g, q, seq.times, table, config.num_heads);
      k = rotary_rows(g, k, seq.times, table, config.num_heads);
    }

    std::vector<Graph::Var> head_outputs;
    head_outputs.reserve(config.num_heads);
    for (std::size_t h = 0; h < config.num_heads; ++h) {
      Graph::Var qh = g.slice_cols(q, h * config.head_dim, config.head_dim);
      Graph::Var kh = g.slice_cols(k, h * config.head_dim, config.head_dim);
      Graph::Var scores = g.scale(g.matmul_nt(qh, kh), inv_sqrt_d);
      if (l == 0 && trace) trace->first_layer_scores.push_back(g.value(scores));
      Graph::Var probs = g.causal_softmax(scores);
      Graph::Var vh = g.slice_cols(v, h * config.d_v, config.d_v);
      head_outputs.push_back(g.matmul(probs, vh));
    }
    Graph::Var attn = g.matmul(config.num_heads == 1 ? head_outputs[0] : g.concat_cols(head_outputs), lv.w_o);
    x = g.add(x, attn);

    Graph::Var pre2 = g.layer_norm(x, lv.ln2_gain, lv.ln2_bias);
    Graph::Var hidden = g.relu(g.add_rowvec(g.matmul(pre2, lv.ffn_w1), lv.ffn_b1));
    Graph::Var ffn = g.add_rowvec(g.matmul(hidden, lv.ffn_w2), lv.ffn_b2);
    x = g.add(x, ffn);
  }

  return g.layer_norm(x, vars.final_ln_gain, vars.final_ln_bias);
}

Tensor encode(const EventSequence& seq, const EncoderParams& params, const EncoderConfig& config,
              EncodeTrace* trace) {
  Graph g;
  EncoderVars vars = insert_encoder_parameters(g, params, false);
  Graph::Var h = build_hidden_states(g, vars, config, seq, trace);
  return g.value(h);
}

}  // namespace rothp
