#include "rothp/model.hpp"

#include <cmath>
#include <cstdio>

#include "rothp/errors.hpp"
#include "rothp/rng.hpp"

namespace rothp {

namespace {

Tensor glorot(Rng& rng, std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t({rows, cols});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = (2.0 * rng.next_unit() - 1.0) * a;
  return t;
}

Tensor ones(std::size_t n) {
  Tensor t({n});
  for (std::size_t i = 0; i < n; ++i) t[i] = 1.0;
  return t;
}

// The single source of parameter traversal order.
template <typename Params, typename Fn>
void visit_parameters(Params& p, Fn&& fn) {
  fn("encoder.event_embedding", p.encoder.event_embedding);
  for (std::size_t l = 0; l < p.encoder.layers.size(); ++l) {
    auto& layer = p.encoder.layers[l];
    const std::string prefix = "encoder.layers[" + std::to_string(l) + "].";
    fn(prefix + "ln1_gain", layer.ln1_gain);
    fn(prefix + "ln1_bias", layer.ln1_bias);
    fn(prefix + "w_q", layer.w_q);
    fn(prefix + "w_k", layer.w_k);
    fn(prefix + "w_v", layer.w_v);
    fn(prefix + "w_o", layer.w_o);
    fn(prefix + "ln2_gain", layer.ln2_gain);
    fn(prefix + "ln2_bias", layer.ln2_bias);
    fn(prefix + "ffn_w1", layer.ffn_w1);
    fn(prefix + "ffn_b1", layer.ffn_b1);
    fn(prefix + "ffn_w2", layer.ffn_w2);
    fn(prefix + "ffn_b2", layer.ffn_b2);
  }
  fn("encoder.final_ln_gain", p.encoder.final_ln_gain);
  fn("encoder.final_ln_bias", p.encoder.final_ln_bias);
  fn("intensity.alpha", p.intensity.alpha);
  fn("intensity.weights", p.intensity.weights);
  fn("intensity.bias", p.intensity.bias);
  fn("intensity.beta", p.intensity.beta);
  fn("heads.type_weight", p.heads.type_weight);
  fn("heads.time_weight", p.heads.time_weight);
  fn("heads.time_bias", p.heads.time_bias);
}

}  // namespace

ModelParams init_model(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const std::size_t m = config.d_model;
  const std::size_t k = static_cast<std::size_t>(config.num_types);
  const std::size_t qk = config.num_heads * config.head_dim;
  const std::size_t vw = config.num_heads * config.d_v;

  ModelParams p;
  p.config = config;
  p.encoder.event_embedding = glorot(rng, m, k, k, m);
  p.encoder.layers.resize(config.num_layers);
  for (auto& layer : p.encoder.layers) {
    layer.ln1_gain = ones(m);
    layer.ln1_bias = Tensor({m});
    layer.w_q = glorot(rng, m, qk, m, qk);
    layer.w_k = glorot(rng, m, qk, m, qk);
    layer.w_v = glorot(rng, m, vw, m, vw);
    layer.w_o = glorot(rng, vw, m, vw, m);
    layer.ln2_gain = ones(m);
    layer.ln2_bias = Tensor({m});
    layer.ffn_w1 = glorot(rng, m, config.d_ff, m, config.d_ff);
    layer.ffn_b1 = Tensor({config.d_ff});
    layer.ffn_w2 = glorot(rng, config.d_ff, m, config.d_ff, m);
    layer.ffn_b2 = Tensor({m});
  }
  p.encoder.final_ln_gain = ones(m);
  p.encoder.final_ln_bias = Tensor({m});
  p.intensity.alpha = Tensor({k});
  p.intensity.weights = glorot(rng, k, m, m, k);
  p.intensity.bias = Tensor({k});
  p.intensity.beta = ones(k);
  p.heads.type_weight = glorot(rng, k, m, m, k);
  p.heads.time_weight = glorot(rng, 1, m, m, 1);
  p.heads.time_bias = Tensor({1});
  return p;
}

void for_each_parameter(ModelParams& params,
                        const std::function<void(const std::string&, Tensor&)>& fn) {
  visit_parameters(params, fn);
}

void for_each_parameter(const ModelParams& params,
                        const std::function<void(const std::string&, const Tensor&)>& fn) {
  visit_parameters(params, fn);
}

std::size_t parameter_count(const ModelParams& params) {
  std::size_t n = 0;
  for_each_parameter(params, [&n](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

std::vector<double> flatten_parameters(const ModelParams& params) {
  std::vector<double> flat;
  flat.reserve(parameter_count(params));
  for_each_parameter(params, [&flat](const std::string&, const Tensor& t) {
    flat.insert(flat.end(), t.data().begin(), t.data().end());
  });
  return flat;
}

void unflatten_parameters(ModelParams& params, std::span<const double> flat) {
  std::size_t offset = 0;
  for_each_parameter(params, [&](const std::string&, Tensor& t) {
    if (offset + t.size() > flat.size()) throw DimensionError("unflatten_parameters: flat vector too short");
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = flat[offset + i];
    offset += t.size();
  });
  if (offset != flat.size()) {
    throw DimensionError("unflatten_parameters: " + std::to_string(flat.size()) + " values for " +
                         std::to_string(offset) + " parameters");
  }
}

std::string config_fingerprint(const EncoderConfig& config) {
  std::string desc = "K=" + std::to_string(config.num_types) + ";M=" + std::to_string(config.d_model) +
                     ";heads=" + std::to_string(config.num_heads) + ";head_dim=" + std::to_string(config.head_dim) +
                     ";d_v=" + std::to_string(config.d_v) + ";d_ff=" + std::to_string(config.d_ff) +
                     ";layers=" + std::to_string(config.num_layers) +
                     ";mode=" + (config.mode == TemporalMode::kRotary ? "rotary" : "absolute") +
                     ";time_scale=" + std::to_string(config.time_scale);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : desc) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

EncoderVars insert_encoder_parameters(Graph& g, const EncoderParams& params, bool requires_grad) {
  EncoderVars v;
  v.event_embedding = g.leaf(params.event_embedding, requires_grad);
  v.layers.resize(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const LayerParams& lp = params.layers[l];
    LayerVars& lv = v.layers[l];
    lv.ln1_gain = g.leaf(lp.ln1_gain, requires_grad);
    lv.ln1_bias = g.leaf(lp.ln1_bias, requires_grad);
    lv.w_q = g.leaf(lp.w_q, requires_grad);
    lv.w_k = g.leaf(lp.w_k, requires_grad);
    lv.w_v = g.leaf(lp.w_v, requires_grad);
    lv.w_o = g.leaf(lp.w_o, requires_grad);
    lv.ln2_gain = g.leaf(lp.ln2_gain, requires_grad);
    lv.ln2_bias = g.leaf(lp.ln2_bias, requires_grad);
    lv.ffn_w1 = g.leaf(lp.ffn_w1, requires_grad);
    lv.ffn_b1 = g.leaf(lp.ffn_b1, requires_grad);
    lv.ffn_w2 = g.leaf(lp.ffn_w2, requires_grad);
    lv.ffn_b2 = g.leaf(lp.ffn_b2, requires_grad);
  }
  v.final_ln_gain = g.leaf(params.final_ln_gain, requires_grad);
  v.final_ln_bias = g.leaf(params.final_ln_bias, requires_grad);
  return v;
}

ModelVars insert_parameters(Graph& g, const ModelParams& params, bool requires_grad) {
  ModelVars v;
  v.encoder = insert_encoder_parameters(g, params.encoder, requires_grad);
  v.alpha = g.leaf(params.intensity.alpha, requires_grad);
  v.intensity_weights = g.leaf(params.intensity.weights, requires_grad);
  v.intensity_bias = g.leaf(params.intensity.bias, requires_grad);
  v.beta = g.leaf(params.intensity.beta, requires_grad);
  v.type_weight = g.leaf(params.heads.type_weight, requires_grad);
  v.time_weight = g.leaf(params.heads.time_weight, requires_grad);
  v.time_bias = g.leaf(params.heads.time_bias, requires_grad);
  return v;
}

std::vector<Graph::Var> parameter_vars(const ModelVars& vars) {
  std::vector<Graph::Var> out;
  out.push_back(vars.encoder.event_embedding);
  for (const LayerVars& lv : vars.encoder.layers) {
    out.push_back(lv.ln1_gain);
    out.push_back(lv.ln1_bias);
    out.push_back(lv.w_q);
    out.push_back(lv.w_k);
    out.push_back(lv.w_v);
    out.push_back(lv.w_o);
    out.push_back(lv.ln2_gain);
    out.push_back(lv.ln2_bias);
    out.push_back(lv.ffn_w1);
    out.push_back(lv.ffn_b1);
    out.push_back(lv.ffn_w2);
    out.push_back(lv.ffn_b2);
  }
  out.push_back(vars.encoder.final_ln_gain);
  out.push_back(vars.encoder.final_ln_bias);
  out.push_back(vars.alpha);
  out.push_back(vars.intensity_weights);
  out.push_back(vars.intensity_bias);
  out.push_back(vars.beta);
  out.push_back(vars.type_weight);
  out.push_back(vars.time_weight);
  out.push_back(vars.time_bias);
  return out;
}

std::vector<double> collect_gradients(const Graph& g, const ModelVars& vars) {
  std::vector<double> flat;
  for (Graph::Var v : parameter_vars(vars)) {
    const Tensor& grad = g.grad(v);
    flat.insert(flat.end(), grad.data().begin(), grad.data().end());
  }
  return flat;
}

Graph::Var build_composite_loss(Graph& g, const ModelVars& vars, const EncoderConfig& config,
                                const EventSequence& seq, const IntegratorSpec& integ,
                                double beta1, double beta2) {
  if (beta1 < 0.0 || beta2 < 0.0) throw ParameterError("loss weights must be nonnegative");
  Graph::Var hidden = build_hidden_states(g, vars.encoder, config, seq);
  Graph::Var ll = build_log_likelihood(g, vars, hidden, seq, integ);
  Graph::Var ev = build_event_loss(g, vars, hidden, seq);
  Graph::Var tl = build_time_loss(g, vars, hidden, seq);
  return g.weighted_sum({ll, ev, tl}, {-1.0, beta1, beta2});
}

}  // namespace rothp
