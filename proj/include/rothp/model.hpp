#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rothp/autograd.hpp"
#include "rothp/encoder.hpp"
#include "rothp/tpp_head.hpp"

namespace rothp {

// Every trainable weight of one model: encoder stack, intensity head,
// prediction heads. Parameter traversal order (for_each_parameter,
// flattening, checkpoints) is the declaration order of the fields.
struct ModelParams {
  EncoderConfig config;
  EncoderParams encoder;
  IntensityParams intensity;
  PredictionHeads heads;
};

// Symmetric uniform init with limit sqrt(6 / (fan_in + fan_out)) for
// projection matrices; normalization gains 1; biases, alpha 0; beta 1.
ModelParams init_model(const EncoderConfig& config, std::uint64_t seed);

void for_each_parameter(ModelParams& params,
                        const std::function<void(const std::string&, Tensor&)>& fn);
void for_each_parameter(const ModelParams& params,
                        const std::function<void(const std::string&, const Tensor&)>& fn);

std::size_t parameter_count(const ModelParams& params);
std::vector<double> flatten_parameters(const ModelParams& params);
void unflatten_parameters(ModelParams& params, std::span<const double> flat);

// FNV-1a hash of the canonical config description, hex-encoded.
std::string config_fingerprint(const EncoderConfig& config);

// --- graph assembly ------------------------------------------------------

struct LayerVars {
  Graph::Var ln1_gain, ln1_bias, w_q, w_k, w_v, w_o;
  Graph::Var ln2_gain, ln2_bias, ffn_w1, ffn_b1, ffn_w2, ffn_b2;
};

struct EncoderVars {
  Graph::Var event_embedding;
  std::vector<LayerVars> layers;
  Graph::Var final_ln_gain, final_ln_bias;
};

struct ModelVars {
  EncoderVars encoder;
  Graph::Var alpha, intensity_weights, intensity_bias, beta;
  Graph::Var type_weight, time_weight, time_bias;
};

// Inserts parameter tensors as graph leaves (in traversal order).
EncoderVars insert_encoder_parameters(Graph& g, const EncoderParams& params, bool requires_grad);
ModelVars insert_parameters(Graph& g, const ModelParams& params, bool requires_grad);

// Leaf vars in the same order as for_each_parameter.
std::vector<Graph::Var> parameter_vars(const ModelVars& vars);

// Gradients of all parameters, flattened in traversal order. Call after
// Graph::backward.
std::vector<double> collect_gradients(const Graph& g, const ModelVars& vars);

// Hidden states H (n x M) as a graph node; implemented by the encoder.
Graph::Var build_hidden_states(Graph& g, const EncoderVars& vars, const EncoderConfig& config,
                               const EventSequence& seq, EncodeTrace* trace = nullptr);

// Scalar graph nodes for the loss pieces; implemented by the tpp head.
Graph::Var build_log_likelihood(Graph& g, const ModelVars& vars, Graph::Var hidden,
                                const EventSequence& seq, const IntegratorSpec& integ);
Graph::Var build_event_loss(Graph& g, const ModelVars& vars, Graph::Var hidden,
                            const EventSequence& seq);
Graph::Var build_time_loss(Graph& g, const ModelVars& vars, Graph::Var hidden,
                           const EventSequence& seq);

// -LL + beta1 * event + beta2 * time for one sequence (encoder included).
Graph::Var build_composite_loss(Graph& g, const ModelVars& vars, const EncoderConfig& config,
                                const EventSequence& seq, const IntegratorSpec& integ,
                                double beta1, double beta2);

}  // namespace rothp
