#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "lsh/core.hpp"

namespace lsh {

struct GenConfig {
  int n_nodes{20};
  int dim{2};
  double horizon{100.0};
  KernelSpec kernel{KernelSpec::uniform({0.1, 1.0, 10.0})};
  double theta1{1.0};
  double theta2{-3.2};
  double alpha1{0.01};
  double alpha2{0.02};
  double sigma_z{1.0};
  double sigma_delta{1.0};
  double sigma_gamma{1.0};
  std::uint64_t seed{0};
  std::size_t max_events_per_pair{10'000'000};

  /// Throws InvalidArgument on out-of-range settings.
  void validate() const;
};

/// Draws Z, delta and gamma i.i.d. normal, then moves |theta1| into the
/// positions (Z <- Z sqrt|theta1|, theta1 <- sign theta1) so the baseline
/// rates equal those of the drawn model.
ModelParams sample_params(const GenConfig &config);

/// Event times of one ordered pair (first) and its reverse (second).
using PairTimes = std::pair<std::vector<double>, std::vector<double>>;

/// Ogata thinning of the bivariate process (u->v, v->u) on (0, horizon].
/// mu_uv / mu_vu are the two baselines; alpha1 scales self excitation and
/// alpha2 the cross excitation between the directions. Throws
/// UnstableProcess once more than `max_events` events are accepted.
PairTimes simulate_pair(double mu_uv, double mu_vu, double alpha1, double alpha2,
                        const KernelSpec &kernel, double horizon, std::mt19937_64 &rng,
                        std::size_t max_events = 10'000'000);

/// All events of a network with fixed parameters, sorted by time. Unordered
/// pair {u, v} (u < v) draws from the stream mix_seed(seed, 1 + u * n + v),
/// so the output does not depend on the thread count. May be empty.
std::vector<Event> simulate_events(const ModelParams &params, const KernelSpec &kernel,
                                   double horizon, std::uint64_t seed,
                                   std::size_t max_events_per_pair = 10'000'000);

/// simulate_events on `params` (sampled from `config` when absent), validated
/// with the configured horizon. Throws EmptyInput if nothing happened.
EventSequence simulate_network(const GenConfig &config,
                               const std::optional<ModelParams> &params = std::nullopt);

}  // namespace lsh
