#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lsh/core.hpp"

namespace lsh {

struct SplitSpec {
  double train_fraction{0.7};
};

/// Training prefix (horizon = split_time) and the remaining events. The test
/// part is a plain list because it may be empty.
struct Split {
  EventSequence train;
  std::vector<Event> test;
  double split_time{0.0};
};

/// The first floor(fraction * k) events train, the rest test; split_time is
/// the last training time. Requires k >= 10 (TooFewEvents).
Split split_events(const EventSequence &events, const SplitSpec &spec = {});

/// Mean log-likelihood per test event. Intensities see the whole history
/// (training events excite the test window) and only the compensator over
/// (split_time, horizon] is subtracted. split_time is train.horizon().
double test_loglik_per_event(const ModelParams &params, const KernelSpec &kernel,
                             const EventSequence &train, std::span<const Event> test,
                             double horizon);

/// p_uv = 1 - exp(-(Lambda_uv(t0 + window) - Lambda_uv(t0))) with the history
/// frozen at t0 (events at or after t0 are ignored). The diagonal is zero.
Eigen::MatrixXd link_probability_window(const ModelParams &params, const KernelSpec &kernel,
                                        const PairHistory &history, double t0, double window);

/// Mann-Whitney AUC; ties between a positive and a negative count one half.
/// Labels are 0 or 1 and both must occur (SingleClass).
double auc(std::span<const double> scores, std::span<const int> labels);

struct PointAuc {
  double time{0.0};
  double auc{0.0};
  bool skipped{false};  // window had a single class
};

struct LinkPredictionResult {
  double mean_auc{0.0};
  double std_auc{0.0};  // population standard deviation over scored points
  std::vector<PointAuc> points;
  std::size_t skipped{0};
};

/// Samples n_points start times uniformly in (split_time, horizon - window]
/// and scores every ordered pair by link_probability_window against the label
/// "at least one u->v event in [t, t + window]".
LinkPredictionResult dynamic_link_prediction(const ModelParams &params,
                                             const KernelSpec &kernel,
                                             const EventSequence &events, double split_time,
                                             double horizon, std::size_t n_points,
                                             double window, std::uint64_t seed);

struct PpcStats {
  std::size_t event_count{0};
  double transitivity{0.0};
  double reciprocity{0.0};
  double avg_clustering{0.0};
  double mean_degree{0.0};
};

/// Static statistics of the aggregated graph: directed edge u->v iff some
/// u->v event exists, undirected edge iff either direction does. Clustering
/// and mean degree average over nodes that took part in at least one event.
PpcStats ppc_stats(std::span<const Event> events, int n_nodes);
PpcStats ppc_stats(const EventSequence &events);

struct PpcMean {
  double event_count{0.0};
  double transitivity{0.0};
  double reciprocity{0.0};
  double avg_clustering{0.0};
  double mean_degree{0.0};
};

struct PpcEnsemble {
  std::vector<PpcStats> samples;
  PpcMean mean;
};

/// Simulates n_sims networks at fixed parameters (simulation i uses seed
/// mix_seed(seed, i)) and summarizes each with ppc_stats.
PpcEnsemble ppc_ensemble(const ModelParams &params, const KernelSpec &kernel, double horizon,
                         std::size_t n_sims = 15, std::uint64_t seed = 0,
                         std::size_t max_events_per_pair = 10'000'000);

struct KsResult {
  double statistic{0.0};
  double p_value{1.0};
};

/// One-sample Kolmogorov-Smirnov test against Exp(1), asymptotic p-value
/// with the small-sample correction of Stephens.
KsResult ks_test_exp1(std::span<const double> sample);

}  // namespace lsh
