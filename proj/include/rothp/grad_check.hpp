#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rothp/model.hpp"

namespace rothp {

struct GradientReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t num_checked = 0;
};

// Which coordinates to probe: all of them (max_coordinates == 0) or a
// seeded subset without replacement.
struct GradCheckSample {
  std::size_t max_coordinates = 0;
  std::uint64_t seed = 1;
};

using LossFn = std::function<double(const ModelParams&)>;
using GradFn = std::function<std::vector<double>(const ModelParams&)>;

// Compares analytic_grad against central finite differences of loss,
// coordinate by coordinate. Relative error per coordinate is
// |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
// epsilon must lie in [1e-7, 1e-3]. A non-finite loss while probing
// raises DivergenceError naming the offending coordinate.
GradientReport grad_check(const LossFn& loss, const GradFn& analytic_grad, const ModelParams& params,
                          double epsilon, const GradCheckSample& sample = {});

// Composite-loss value and flattened gradient through the tape; the pair
// fed to grad_check when verifying the full model.
double model_loss(const ModelParams& params, const EventSequence& seq, const IntegratorSpec& integ,
                  double beta1, double beta2);
std::vector<double> model_loss_gradient(const ModelParams& params, const EventSequence& seq,
                                        const IntegratorSpec& integ, double beta1, double beta2);

}  // namespace rothp
