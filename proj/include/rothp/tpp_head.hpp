#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "rothp/event_sequence.hpp"
#include "rothp/tensor.hpp"

namespace rothp {

// Per-type neural Hawkes intensity parameters:
//   lambda_k(t) = softplus(alpha_k * (t - t_j) + w_k . h(t_j) + b_k, beta_k)
// for t in [t_j, t_{j+1}).
struct IntensityParams {
  Tensor alpha;    // {K}
  Tensor weights;  // {K, M}, row k = w_k
  Tensor bias;     // {K}
  Tensor beta;     // {K}, softplus softness, all > 0

  void validate() const;
};

struct PredictionHeads {
  Tensor type_weight;  // {K, M}
  Tensor time_weight;  // {1, M}
  Tensor time_bias;    // {1}
};

enum class IntegratorMethod { kMonteCarlo, kTrapezoid };

// How the intensity integral over each inter-event interval is estimated.
// Monte Carlo draws come from a counter-based substream keyed by
// (seed, sequence key, interval index, sample index), so the draws do not
// change when timestamps are translated.
struct IntegratorSpec {
  IntegratorMethod method = IntegratorMethod::kTrapezoid;
  int samples_per_interval = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

double intensity_k(double t, double t_j, std::span<const double> h_j, int k, const IntensityParams& p);

double total_intensity(double t, double t_j, std::span<const double> h_j, const IntensityParams& p);

// Estimate of the integral of the total intensity over [lower, upper]
// conditioned on h_j (the hidden state of the event opening the interval).
double integral_estimate(double lower, double upper, std::span<const double> h_j,
                         const IntensityParams& p, const IntegratorSpec& integ,
                         std::uint64_t stream = 0, std::uint64_t interval_index = 0);

// Sequence log-likelihood over [t_1, t_n]: the i = 1 term is excluded
// (conditioning on the first event), and the intensity at event i uses
// h(t_{i-1}) with the gap t_i - t_{i-1}.
double log_likelihood(const EventSequence& seq, const Tensor& hidden, const IntensityParams& p,
                      const IntegratorSpec& integ);

// (type logits, predicted next inter-event gap) from one hidden state.
std::pair<Tensor, double> predict_next(std::span<const double> h_j, const PredictionHeads& heads);

double event_loss(const EventSequence& seq, const Tensor& hidden, const PredictionHeads& heads);

double time_loss(const EventSequence& seq, const Tensor& hidden, const PredictionHeads& heads);

// -log_likelihood + beta1 * event_loss + beta2 * time_loss.
double composite_loss(const EventSequence& seq, const Tensor& hidden, const IntensityParams& p,
                      const PredictionHeads& heads, const IntegratorSpec& integ, double beta1,
                      double beta2);

// argmax with ties broken toward the lowest index.
int argmax_lowest(std::span<const double> v);

}  // namespace rothp
