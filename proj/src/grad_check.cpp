#include "rothp/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "rothp/errors.hpp"
#include "rothp/rng.hpp"

namespace rothp {

namespace {

struct CoordinateIndex {
  std::vector<std::string> names;
  std::vector<std::size_t> offsets;  // cumulative start per tensor
  std::size_t total = 0;

  std::string coordinate_name(std::size_t flat_index) const {
    std::size_t t = 0;
    while (t + 1 < offsets.size() && offsets[t + 1] <= flat_index) ++t;
    return names[t] + "[" + std::to_string(flat_index - offsets[t]) + "]";
  }
};

CoordinateIndex index_parameters(const ModelParams& params) {
  CoordinateIndex idx;
  for_each_parameter(params, [&idx](const std::string& name, const Tensor& t) {
    idx.names.push_back(name);
    idx.offsets.push_back(idx.total);
    idx.total += t.size();
  });
  return idx;
}

}  // namespace

GradientReport grad_check(const LossFn& loss, const GradFn& analytic_grad, const ModelParams& params,
                          double epsilon, const GradCheckSample& sample) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
    throw ParameterError("grad_check epsilon must lie in [1e-7, 1e-3], got " + std::to_string(epsilon));
  }
  const double base = loss(params);
  if (!std::isfinite(base)) throw DivergenceError("grad_check: loss is not finite at the given parameters");

  const CoordinateIndex idx = index_parameters(params);
  const std::vector<double> flat = flatten_parameters(params);
  const std::vector<double> analytic = analytic_grad(params);
  if (analytic.size() != flat.size()) {
    throw DimensionError("grad_check: analytic gradient has " + std::to_string(analytic.size()) +
                         " entries for " + std::to_string(flat.size()) + " parameters");
  }

  std::vector<std::size_t> coords(flat.size());
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
  if (sample.max_coordinates > 0 && sample.max_coordinates < coords.size()) {
    Rng rng(sample.seed);
    rng.shuffle(coords);
    coords.resize(sample.max_coordinates);
    std::sort(coords.begin(), coords.end());
  }

  GradientReport report;
  ModelParams probe = params;
  std::vector<double> perturbed = flat;
  for (std::size_t c : coords) {
    perturbed[c] = flat[c] + epsilon;
    unflatten_parameters(probe, perturbed);
    const double plus = loss(probe);
    perturbed[c] = flat[c] - epsilon;
    unflatten_parameters(probe, perturbed);
    const double minus = loss(probe);
    perturbed[c] = flat[c];
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw DivergenceError("grad_check: non-finite loss probing coordinate " + idx.coordinate_name(c));
    }
    const double numeric = (plus - minus) / (2.0 * epsilon);
    const double a = analytic[c];
    const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
    ++report.num_checked;
    if (rel > report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst_parameter = idx.coordinate_name(c);
    }
  }
  return report;
}

double model_loss(const ModelParams& params, const EventSequence& seq, const IntegratorSpec& integ,
                  double beta1, double beta2) {
  Graph g;
  ModelVars vars = insert_parameters(g, params, false);
  return g.value(build_composite_loss(g, vars, params.config, seq, integ, beta1, beta2))[0];
}

std::vector<double> model_loss_gradient(const ModelParams& params, const EventSequence& seq,
                                        const IntegratorSpec& integ, double beta1, double beta2) {
  Graph g;
  ModelVars vars = insert_parameters(g, params, true);
  Graph::Var loss = build_composite_loss(g, vars, params.config, seq, integ, beta1, beta2);
  g.backward(loss);
  return collect_gradients(g, vars);
}

}  // namespace rothp
