#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rothp/event_sequence.hpp"
#include "rothp/tensor.hpp"

namespace rothp {

// Ground-truth multivariate Hawkes parameters with exponential kernels
//   phi_{u,v}(t) = A[u][v] * beta * exp(-beta * t),
// shared decay beta. A type-v event adds A[u][v] * beta to the type-u
// intensity, which then decays; the kernel mass (branching weight) of the
// pair is A[u][v].
struct ExpHawkesParams {
  std::vector<double> mu;  // K nonnegative base rates
  Tensor excitation;       // K x K nonnegative jump matrix A
  double beta_decay = 1.0;

  std::size_t num_types() const { return mu.size(); }
  void validate() const;
};

// True iff the spectral radius of A / beta_decay, estimated by power
// iteration (200 iterations, tolerance 1e-10), is below 1.
bool stationarity_check(const ExpHawkesParams& p);

// Exact Hawkes trajectory by Ogata thinning over [0, horizon). The
// dominating bound is recomputed after every candidate. Stops at the
// horizon or after max_events events. Requires stationarity.
EventSequence simulate_ogata(const ExpHawkesParams& p, double horizon, std::size_t max_events,
                             std::uint64_t seed);

// Closed-form classical log-likelihood over [t_1, t_n]: the i = 1 term is
// excluded, the compensator integrates the total intensity with the exact
// kernel integral A (1 - exp(-beta x)). Consumes timestamp differences
// only, so it is invariant under translation.
double oracle_loglik(const ExpHawkesParams& p, const EventSequence& seq);

// Simulates sequences and keeps those whose length falls inside
// [length_window.first, length_window.second]. More than
// 10 * num_sequences rejections raise DataError.
Dataset make_synthetic_dataset(std::size_t num_sequences, const ExpHawkesParams& p,
                               std::pair<std::size_t, std::size_t> length_window, std::uint64_t seed,
                               double horizon = 72.0);

// K = 5, mu = 0.1 each, A uniformly 0.08, beta = 1 (branching ratio 0.4);
// with the 72 time-unit horizon the lengths land in [20, 100] with mean
// near 60.
ExpHawkesParams default_synthetic_params();

}  // namespace rothp
