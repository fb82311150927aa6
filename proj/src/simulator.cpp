#include "rothp/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "rothp/dataset_io.hpp"
#include "rothp/errors.hpp"
#include "rothp/rng.hpp"

namespace rothp {

void ExpHawkesParams::validate() const {
  const std::size_t k = mu.size();
  if (k == 0) throw ParameterError("Hawkes parameters need at least one event type");
  if (excitation.shape().size() != 2 || excitation.rows() != k || excitation.cols() != k) {
    throw DimensionError("excitation matrix must be " + std::to_string(k) + "x" + std::to_string(k) +
                         ", got " + excitation.shape_string());
  }
  for (double m : mu) {
    if (m < 0.0) throw ParameterError("base rates must be nonnegative");
  }
  for (double a : excitation.data()) {
    if (a < 0.0) throw ParameterError("excitation entries must be nonnegative");
  }
  if (!(beta_decay > 0.0)) throw ParameterError("beta_decay must be positive");
}

bool stationarity_check(const ExpHawkesParams& p) {
  p.validate();
  const std::size_t k = p.num_types();
  std::vector<double> x(k, 1.0 / std::sqrt(static_cast<double>(k)));
  std::vector<double> y(k);
  double radius = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    for (std::size_t u = 0; u < k; ++u) {
      double acc = 0.0;
      for (std::size_t v = 0; v < k; ++v) acc += p.excitation.at(u, v) / p.beta_decay * x[v];
      y[u] = acc;
    }
    double norm = 0.0;
    for (double v : y) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) return true;  // nilpotent branching, radius 0
    const double estimate = norm;  // since |x| = 1
    for (std::size_t u = 0; u < k; ++u) x[u] = y[u] / norm;
    if (std::abs(estimate - radius) < 1e-10) {
      radius = estimate;
      break;
    }
    radius = estimate;
  }
  return radius < 1.0;
}

EventSequence simulate_ogata(const ExpHawkesParams& p, double horizon, std::size_t max_events,
                             std::uint64_t seed) {
  if (!stationarity_check(p)) {
    throw StabilityError("Hawkes parameters are unstable (branching spectral radius >= 1)");
  }
  if (!(horizon > 0.0)) throw ParameterError("horizon must be positive");
  if (max_events == 0) throw ParameterError("max_events must be positive");

  const std::size_t k = p.num_types();
  Rng rng(seed);
  EventSequence seq;

  // per-type excitation component of the intensity, valid at time `now`
  std::vector<double> excite(k, 0.0);
  double now = 0.0;
  while (seq.size() < max_events) {
    double bound = 0.0;
    for (std::size_t u = 0; u < k; ++u) bound += p.mu[u] + excite[u];
    if (bound <= 0.0) break;

    const double wait = rng.next_exponential(bound);
    const double candidate = now + wait;
    if (candidate >= horizon) break;

    // kernels only decay between events, so `bound` dominates on the way
    const double decay = std::exp(-p.beta_decay * (candidate - now));
    double total = 0.0;
    for (std::size_t u = 0; u < k; ++u) {
      excite[u] *= decay;
      total += p.mu[u] + excite[u];
    }
    now = candidate;

    if (rng.next_unit() * bound <= total) {
      int type = static_cast<int>(k) - 1;
      double r = rng.next_unit() * total;
      for (std::size_t u = 0; u < k; ++u) {
        r -= p.mu[u] + excite[u];
        if (r <= 0.0) {
          type = static_cast<int>(u);
          break;
        }
      }
      seq.times.push_back(now);
      seq.marks.push_back(type);
      for (std::size_t u = 0; u < k; ++u) {
        excite[u] += p.excitation.at(u, static_cast<std::size_t>(type)) * p.beta_decay;
      }
    }
  }
  return seq;
}

double oracle_loglik(const ExpHawkesParams& p, const EventSequence& seq) {
  p.validate();
  seq.validate(static_cast<int>(p.num_types()));
  const std::size_t n = seq.size();
  if (n < 2) throw DataError("oracle_loglik: need at least 2 events, got " + std::to_string(n));

  const double beta = p.beta_decay;
  double ll = 0.0;
  // event terms, conditioning on the first event
  for (std::size_t i = 1; i < n; ++i) {
    const int u = seq.marks[i];
    double lambda = p.mu[static_cast<std::size_t>(u)];
    for (std::size_t j = 0; j < i; ++j) {
      const double dt = seq.times[i] - seq.times[j];
      lambda += p.excitation.at(static_cast<std::size_t>(u), static_cast<std::size_t>(seq.marks[j])) *
                beta * std::exp(-beta * dt);
    }
    ll += std::log(lambda);
  }

  // compensator of the total intensity over [t_1, t_n], exact kernel integral
  double mu_total = 0.0;
  for (double m : p.mu) mu_total += m;
  ll -= mu_total * (seq.times[n - 1] - seq.times[0]);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const int v = seq.marks[j];
    double jump_mass = 0.0;
    for (std::size_t u = 0; u < p.num_types(); ++u) {
      jump_mass += p.excitation.at(u, static_cast<std::size_t>(v));
    }
    const double span = seq.times[n - 1] - seq.times[j];
    ll -= jump_mass * (1.0 - std::exp(-beta * span));
  }
  return ll;
}

Dataset make_synthetic_dataset(std::size_t num_sequences, const ExpHawkesParams& p,
                               std::pair<std::size_t, std::size_t> length_window, std::uint64_t seed,
                               double horizon) {
  p.validate();
  if (length_window.first > length_window.second || length_window.first == 0) {
    throw ParameterError("length window must satisfy 1 <= min <= max");
  }
  Dataset ds;
  ds.num_types = static_cast<int>(p.num_types());
  std::size_t rejections = 0;
  std::uint64_t attempt = 0;
  while (ds.sequences.size() < num_sequences) {
    EventSequence seq = simulate_ogata(p, horizon, length_window.second + 1, mix64(seed, attempt));
    ++attempt;
    if (seq.size() < length_window.first || seq.size() > length_window.second) {
      if (++rejections > 10 * num_sequences) {
        throw DataError("synthetic recipe infeasible: " + std::to_string(rejections) +
                        " rejected draws for " + std::to_string(num_sequences) + " sequences");
      }
      continue;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "seq-%06zu", ds.sequences.size());
    seq.id = buf;
    seq.key = fnv1a64(seq.id);
    ds.sequences.push_back(std::move(seq));
  }
  return ds;
}

ExpHawkesParams default_synthetic_params() {
  ExpHawkesParams p;
  p.mu.assign(5, 0.1);
  p.excitation = Tensor({5, 5});
  for (std::size_t i = 0; i < p.excitation.size(); ++i) p.excitation[i] = 0.08;
  p.beta_decay = 1.0;
  return p;
}

}  // namespace rothp
