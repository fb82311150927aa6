#include "rothp/tpp_head.hpp"

#include <cmath>
#include <string>

#include "rothp/autograd.hpp"
#include "rothp/errors.hpp"
#include "rothp/model.hpp"
#include "rothp/rng.hpp"

namespace rothp {

void IntensityParams::validate() const {
  const std::size_t k = alpha.size();
  if (bias.size() != k || beta.size() != k || weights.rows() != k) {
    throw DimensionError("intensity parameter shapes disagree on the number of event types");
  }
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (!(beta[i] > 0.0)) {
      throw ParameterError("intensity beta[" + std::to_string(i) + "] must be positive, got " +
                           std::to_string(beta[i]));
    }
  }
}

void IntegratorSpec::validate() const {
  if (samples_per_interval < 1) throw ParameterError("samples_per_interval must be >= 1");
}

int argmax_lowest(std::span<const double> v) {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = static_cast<int>(i);
  }
  return best;
}

namespace {

// d log softplus(x, beta) / dx, stable over the full range.
double dlog_softplus_dx(double z, double beta, double value) {
  if (z < -30.0) return 1.0 / beta;
  return softplus_dx(z * beta, beta) / value;
}

// d log softplus(x, beta) / dbeta; the z -> -inf limit avoids 0/0.
double dlog_softplus_dbeta(double z, double beta, double value) {
  if (z < -30.0) return (1.0 - z) / beta;
  return softplus_dbeta(z * beta, beta) / value;
}

// Sum over events i = 2..n of log lambda_{k_i}(t_i) conditioned on
// h(t_{i-1}): argument alpha_k * gap + scores(i-1, k) with softness
// beta_k. With non-null grad outputs, also accumulates d(sum)/d(inputs)
// scaled by `upstream`.
double event_term_sum(const Tensor& scores, const Tensor& alpha, const Tensor& beta,
                      const EventSequence& seq, double upstream = 0.0, Tensor* d_scores = nullptr,
                      Tensor* d_alpha = nullptr, Tensor* d_beta = nullptr) {
  double total = 0.0;
  for (std::size_t e = 1; e < seq.size(); ++e) {
    const int k = seq.marks[e];
    const double gap = seq.times[e] - seq.times[e - 1];
    const double x = alpha[k] * gap + scores.at(e - 1, k);
    const double b = beta[k];
    total += log_softplus(x, b);
    if (d_scores) {
      const double value = softplus(x, b);
      const double dx = upstream * dlog_softplus_dx(x / b, b, value);
      d_scores->at(e - 1, k) += dx;
      (*d_alpha)[k] += dx * gap;
      (*d_beta)[k] += upstream * dlog_softplus_dbeta(x / b, b, value);
    }
  }
  return total;
}

struct QuadratureNode {
  double offset;  // from the interval's lower bound
  double weight;
};

// Quadrature nodes depend on the interval only through its width (and the
// counter-based draws), which keeps the integral translation invariant.
std::vector<QuadratureNode> quadrature_nodes(double width, const IntegratorSpec& integ,
                                             std::uint64_t stream, std::uint64_t interval_index) {
  const int s = integ.samples_per_interval;
  std::vector<QuadratureNode> nodes;
  if (integ.method == IntegratorMethod::kTrapezoid) {
    nodes.reserve(static_cast<std::size_t>(s) + 1);
    const double h = width / static_cast<double>(s);
    for (int i = 0; i <= s; ++i) {
      const double w = (i == 0 || i == s) ? 0.5 * h : h;
      nodes.push_back({width * (static_cast<double>(i) / static_cast<double>(s)), w});
    }
  } else {
    nodes.reserve(static_cast<std::size_t>(s));
    const double w = width / static_cast<double>(s);
    for (int i = 0; i < s; ++i) {
      const double u = counter_unit(integ.seed, stream, interval_index, static_cast<std::uint64_t>(i));
      nodes.push_back({u * width, w});
    }
  }
  return nodes;
}

// Integral of the total intensity over one interval given the score row
// of the event opening it. Optionally accumulates gradients.
double interval_integral(double width, std::span<const double> score_row, const Tensor& alpha,
                         const Tensor& beta, const IntegratorSpec& integ, std::uint64_t stream,
                         std::uint64_t interval_index, double upstream = 0.0,
                         double* d_score_row = nullptr, Tensor* d_alpha = nullptr,
                         Tensor* d_beta = nullptr) {
  if (width == 0.0) return 0.0;
  const std::size_t num_types = score_row.size();
  double total = 0.0;
  for (const QuadratureNode& node : quadrature_nodes(width, integ, stream, interval_index)) {
    for (std::size_t k = 0; k < num_types; ++k) {
      const double x = alpha[k] * node.offset + score_row[k];
      const double b = beta[k];
      total += node.weight * softplus(x, b);
      if (d_score_row) {
        const double dx = upstream * node.weight * softplus_dx(x, b);
        d_score_row[k] += dx;
        (*d_alpha)[k] += dx * node.offset;
        (*d_beta)[k] += upstream * node.weight * softplus_dbeta(x, b);
      }
    }
  }
  return total;
}

double integral_sum(const Tensor& scores, const Tensor& alpha, const Tensor& beta,
                    const EventSequence& seq, const IntegratorSpec& integ, double upstream = 0.0,
                    Tensor* d_scores = nullptr, Tensor* d_alpha = nullptr, Tensor* d_beta = nullptr) {
  const std::size_t num_types = alpha.size();
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < seq.size(); ++j) {
    const double width = seq.times[j + 1] - seq.times[j];
    std::span<const double> row = scores.data().subspan(j * num_types, num_types);
    double* d_row = d_scores ? &d_scores->at(j, 0) : nullptr;
    total += interval_integral(width, row, alpha, beta, integ, seq.key, j, upstream, d_row, d_alpha,
                               d_beta);
  }
  return total;
}

// scores = hidden . weights^T + bias, one row per event, one column per type.
Graph::Var build_scores(Graph& g, Graph::Var hidden, Graph::Var weights, Graph::Var bias) {
  return g.add_rowvec(g.matmul_nt(hidden, weights), bias);
}

Graph::Var build_ll_node(Graph& g, Graph::Var scores, Graph::Var alpha, Graph::Var beta,
                         const EventSequence& seq, const IntegratorSpec& integ) {
  integ.validate();
  if (seq.size() < 2) throw DataError("log_likelihood: need at least 2 events, got " + std::to_string(seq.size()));
  const Tensor& sv = g.value(scores);
  const Tensor& av = g.value(alpha);
  const Tensor& bv = g.value(beta);
  if (sv.rows() != seq.size() || sv.cols() != av.size()) {
    throw DimensionError("log_likelihood: score shape " + sv.shape_string() + " does not match sequence/types");
  }
  const double value = event_term_sum(sv, av, bv, seq) - integral_sum(sv, av, bv, seq, integ);
  return g.make_node({scores, alpha, beta}, Tensor::scalar(value),
                     [scores, alpha, beta, seq, integ](Graph& g, Graph::Var self) {
                       const double up = g.grad(self)[0];
                       const Tensor& sv = g.value(scores);
                       const Tensor& av = g.value(alpha);
                       const Tensor& bv = g.value(beta);
                       Tensor& ds = g.grad_mut(scores);
                       Tensor& da = g.grad_mut(alpha);
                       Tensor& db = g.grad_mut(beta);
                       event_term_sum(sv, av, bv, seq, up, &ds, &da, &db);
                       integral_sum(sv, av, bv, seq, integ, -up, &ds, &da, &db);
                     });
}

}  // namespace

double intensity_k(double t, double t_j, std::span<const double> h_j, int k, const IntensityParams& p) {
  p.validate();
  if (t < t_j) {
    throw IntervalError("intensity: t = " + std::to_string(t) + " precedes interval start " + std::to_string(t_j));
  }
  if (k < 0 || static_cast<std::size_t>(k) >= p.alpha.size()) {
    throw DataError("intensity: type " + std::to_string(k) + " out of range");
  }
  if (h_j.size() != p.weights.cols()) {
    throw DimensionError("intensity: hidden size " + std::to_string(h_j.size()) + " vs weights " +
                         p.weights.shape_string());
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < h_j.size(); ++i) dot += p.weights.at(k, i) * h_j[i];
  return softplus(p.alpha[k] * (t - t_j) + dot + p.bias[k], p.beta[k]);
}

double total_intensity(double t, double t_j, std::span<const double> h_j, const IntensityParams& p) {
  double total = 0.0;
  for (std::size_t k = 0; k < p.alpha.size(); ++k) {
    total += intensity_k(t, t_j, h_j, static_cast<int>(k), p);
  }
  return total;
}

double integral_estimate(double lower, double upper, std::span<const double> h_j,
                         const IntensityParams& p, const IntegratorSpec& integ,
                         std::uint64_t stream, std::uint64_t interval_index) {
  p.validate();
  integ.validate();
  if (upper < lower) {
    throw IntervalError("integral bounds out of order: [" + std::to_string(lower) + ", " +
                        std::to_string(upper) + "]");
  }
  const std::size_t num_types = p.alpha.size();
  std::vector<double> score_row(num_types);
  for (std::size_t k = 0; k < num_types; ++k) {
    double dot = 0.0;
    for (std::size_t i = 0; i < h_j.size(); ++i) dot += p.weights.at(k, i) * h_j[i];
    score_row[k] = dot + p.bias[k];
  }
  return interval_integral(upper - lower, score_row, p.alpha, p.beta, integ, stream, interval_index);
}

double log_likelihood(const EventSequence& seq, const Tensor& hidden, const IntensityParams& p,
                      const IntegratorSpec& integ) {
  p.validate();
  Graph g;
  Graph::Var scores = build_scores(g, g.constant(hidden), g.constant(p.weights), g.constant(p.bias));
  return g.value(build_ll_node(g, scores, g.constant(p.alpha), g.constant(p.beta), seq, integ))[0];
}

std::pair<Tensor, double> predict_next(std::span<const double> h_j, const PredictionHeads& heads) {
  if (h_j.size() != heads.type_weight.cols() || h_j.size() != heads.time_weight.cols()) {
    throw DimensionError("predict_next: hidden size " + std::to_string(h_j.size()) +
                         " vs head widths " + heads.type_weight.shape_string());
  }
  Tensor logits({heads.type_weight.rows()});
  for (std::size_t k = 0; k < logits.size(); ++k) {
    double dot = 0.0;
    for (std::size_t i = 0; i < h_j.size(); ++i) dot += heads.type_weight.at(k, i) * h_j[i];
    logits[k] = dot;
  }
  double gap = heads.time_bias[0];
  for (std::size_t i = 0; i < h_j.size(); ++i) gap += heads.time_weight.at(0, i) * h_j[i];
  return {std::move(logits), gap};
}

namespace {

void check_supervised(const EventSequence& seq, const Tensor& hidden) {
  if (seq.size() < 2) throw DataError("loss: need at least 2 events, got " + std::to_string(seq.size()));
  if (hidden.rows() != seq.size()) {
    throw DimensionError("loss: hidden rows " + hidden.shape_string() + " vs sequence length " +
                         std::to_string(seq.size()));
  }
}

std::vector<int> next_marks(const EventSequence& seq) {
  return std::vector<int>(seq.marks.begin() + 1, seq.marks.end());
}

std::vector<double> next_gaps(const EventSequence& seq) {
  std::vector<double> gaps(seq.size() - 1);
  for (std::size_t j = 0; j + 1 < seq.size(); ++j) gaps[j] = seq.times[j + 1] - seq.times[j];
  return gaps;
}

}  // namespace

double event_loss(const EventSequence& seq, const Tensor& hidden, const PredictionHeads& heads) {
  check_supervised(seq, hidden);
  Graph g;
  Graph::Var logits =
      g.matmul_nt(g.first_rows(g.constant(hidden), seq.size() - 1), g.constant(heads.type_weight));
  return g.value(g.cross_entropy_sum(logits, next_marks(seq)))[0];
}

double time_loss(const EventSequence& seq, const Tensor& hidden, const PredictionHeads& heads) {
  check_supervised(seq, hidden);
  Graph g;
  Graph::Var pred = g.add_rowvec(
      g.matmul_nt(g.first_rows(g.constant(hidden), seq.size() - 1), g.constant(heads.time_weight)),
      g.constant(heads.time_bias));
  return g.value(g.squared_error_sum(pred, next_gaps(seq)))[0];
}

double composite_loss(const EventSequence& seq, const Tensor& hidden, const IntensityParams& p,
                      const PredictionHeads& heads, const IntegratorSpec& integ, double beta1,
                      double beta2) {
  if (beta1 < 0.0 || beta2 < 0.0) throw ParameterError("loss weights must be nonnegative");
  const double ll = log_likelihood(seq, hidden, p, integ);
  const double ev = event_loss(seq, hidden, heads);
  const double tl = time_loss(seq, hidden, heads);
  return -ll + beta1 * ev + beta2 * tl;
}

Graph::Var build_log_likelihood(Graph& g, const ModelVars& vars, Graph::Var hidden,
                                const EventSequence& seq, const IntegratorSpec& integ) {
  Graph::Var scores = build_scores(g, hidden, vars.intensity_weights, vars.intensity_bias);
  return build_ll_node(g, scores, vars.alpha, vars.beta, seq, integ);
}

Graph::Var build_event_loss(Graph& g, const ModelVars& vars, Graph::Var hidden,
                            const EventSequence& seq) {
  check_supervised(seq, g.value(hidden));
  Graph::Var logits = g.matmul_nt(g.first_rows(hidden, seq.size() - 1), vars.type_weight);
  return g.cross_entropy_sum(logits, next_marks(seq));
}

Graph::Var build_time_loss(Graph& g, const ModelVars& vars, Graph::Var hidden,
                           const EventSequence& seq) {
  check_supervised(seq, g.value(hidden));
  Graph::Var pred = g.add_rowvec(
      g.matmul_nt(g.first_rows(hidden, seq.size() - 1), vars.time_weight), vars.time_bias);
  return g.squared_error_sum(pred, next_gaps(seq));
}

}  // namespace rothp
