#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rothp/event_sequence.hpp"
#include "rothp/tensor.hpp"

namespace rothp {

enum class TemporalMode { kRotary, kAbsolute };

struct EncoderConfig {
  int num_types = 5;           // K
  std::size_t d_model = 64;    // M
  std::size_t num_heads = 4;
  std::size_t head_dim = 16;   // even; per-head query/key width
  std::size_t d_v = 16;        // per-head value width
  std::size_t d_ff = 256;
  std::size_t num_layers = 4;
  TemporalMode mode = TemporalMode::kRotary;
  double time_scale = 1.0;     // applied to timestamps at ingestion

  void validate() const;
};

struct LayerParams {
  Tensor ln1_gain, ln1_bias;
  Tensor w_q, w_k;  // M x (heads * head_dim)
  Tensor w_v;       // M x (heads * d_v)
  Tensor w_o;       // (heads * d_v) x M
  Tensor ln2_gain, ln2_bias;
  Tensor ffn_w1, ffn_b1;  // M x d_ff, d_ff
  Tensor ffn_w2, ffn_b2;  // d_ff x M, M
};

struct EncoderParams {
  Tensor event_embedding;  // M x K, column k = embedding of event type k
  std::vector<LayerParams> layers;
  Tensor final_ln_gain, final_ln_bias;
};

// Per-head scaled pre-softmax attention scores of the first layer,
// captured for diagnostics and tests.
struct EncodeTrace {
  std::vector<Tensor> first_layer_scores;
};

// Sinusoid temporal encoding: with 1-based entry index j,
// odd j  -> cos(t / 10000^((j-1)/dim)),
// even j -> sin(t / 10000^(j/dim)).
// Not shift invariant; used by the ABSOLUTE encoder mode.
Tensor sinusoid_encoding(std::span<const double> times, std::size_t dim);

// Row i = embedding column of marks[i]; timestamps never enter.
Tensor embed_events(const EventSequence& seq, const EncoderParams& params);

// Causal transformer encoder; returns hidden states H (n x M, row j =
// h(t_j)). Pre-norm residual blocks with a final normalization. In ROTARY
// mode timestamps enter only through rotations of the per-head query/key
// vectors; in ABSOLUTE mode the sinusoid encoding is added to the event
// embeddings once before the first layer.
Tensor encode(const EventSequence& seq, const EncoderParams& params, const EncoderConfig& config,
              EncodeTrace* trace = nullptr);

}  // namespace rothp
