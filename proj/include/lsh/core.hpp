#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lsh/error.hpp"

namespace lsh {

using NodeId = std::int32_t;

struct Event {
  NodeId sender{0};
  NodeId receiver{0};
  double time{0.0};

  friend bool operator==(const Event &, const Event &) = default;
};

/// Time-ordered relational events over `n_nodes` dense node ids, observed on
/// the window [0, horizon]. Only constructible through validate_events, so
/// every instance satisfies the ordering, range and self-loop invariants.
class EventSequence {
 public:
  EventSequence() = default;

  std::span<const Event> events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const Event &operator[](std::size_t i) const { return events_[i]; }
  int n_nodes() const { return n_nodes_; }
  double horizon() const { return horizon_; }

  /// Messages produced while ingesting (currently: tie perturbations).
  const std::vector<std::string> &warnings() const { return warnings_; }
  std::size_t perturbed_count() const { return perturbed_; }

  EventSequence with_horizon(double horizon) const;

 private:
  friend EventSequence validate_events(std::vector<Event> raw, int n_nodes,
                                       std::optional<double> horizon);
  std::vector<Event> events_;
  int n_nodes_{0};
  double horizon_{0.0};
  std::vector<std::string> warnings_;
  std::size_t perturbed_{0};
};

/// Sorts and validates raw events. Errors carry the index into `raw`.
/// Exact duplicate timestamps inside one ordered pair are moved forward by
/// one ulp (recorded in warnings()). The horizon defaults to the last event
/// time; an explicit horizon must not precede it.
EventSequence validate_events(std::vector<Event> raw, int n_nodes,
                              std::optional<double> horizon = std::nullopt);

/// Per ordered pair (u, v) the strictly increasing list of u->v event times.
class PairHistory {
 public:
  struct Pair {
    NodeId u;
    NodeId v;
  };

  PairHistory() = default;
  explicit PairHistory(const EventSequence &events);

  int n_nodes() const { return n_nodes_; }

  /// Times of u->v events; empty for pairs that never interacted.
  std::span<const double> times(NodeId u, NodeId v) const;

  /// Ordered pairs with at least one event, in (u, v) lexicographic order.
  std::span<const Pair> pairs() const { return pairs_; }

  /// Ordered pairs (u, v) where u->v or v->u has at least one event.
  std::span<const Pair> active_pairs() const { return active_; }

  /// All events, re-sorted by (time, sender, receiver).
  std::vector<Event> flatten() const;

 private:
  std::optional<std::size_t> find(NodeId u, NodeId v) const;

  int n_nodes_{0};
  std::vector<Pair> pairs_;
  std::vector<std::size_t> offsets_;
  std::vector<double> times_;
  std::vector<Pair> active_;
};

PairHistory build_pair_histories(const EventSequence &events);

/// Sum-of-exponentials excitation kernel: sum_b C_b beta_b exp(-beta_b t).
class KernelSpec {
 public:
  KernelSpec() = default;

  /// Sorts the decays increasingly (weights follow). Decays must be positive
  /// and distinct; weights must be nonnegative with unit sum.
  static KernelSpec make(std::vector<double> betas, std::vector<double> weights);
  static KernelSpec uniform(std::vector<double> betas);

  std::size_t size() const { return betas_.size(); }
  const std::vector<double> &betas() const { return betas_; }
  const std::vector<double> &weights() const { return weights_; }
  double beta(std::size_t b) const { return betas_[b]; }
  double weight(std::size_t b) const { return weights_[b]; }

 private:
  std::vector<double> betas_;
  std::vector<double> weights_;
};

enum class SlopeConstraint { Positive, Negative, Unconstrained };

struct ModelParams {
  Eigen::MatrixXd z;  // n x d latent positions
  double theta1{1.0};
  double theta2{0.0};
  double alpha1{0.0};
  double alpha2{0.0};
  Eigen::VectorXd delta;  // sender effects
  Eigen::VectorXd gamma;  // receiver effects

  static ModelParams zeros(int n_nodes, int dim);

  int n_nodes() const { return static_cast<int>(z.rows()); }
  int dim() const { return static_cast<int>(z.cols()); }

  /// Throws ShapeMismatch / InvalidArgument when an invariant is broken.
  void validate() const;
};

/// log mu_uv = -theta1 |z_u - z_v|^2 + theta2 + delta_u + gamma_v.
double log_baseline_rate(const ModelParams &params, NodeId u, NodeId v);
double baseline_rate(const ModelParams &params, NodeId u, NodeId v);

/// n x n matrix of log mu_uv; the diagonal is zero and meaningless.
Eigen::MatrixXd log_baseline_matrix(const ModelParams &params);

bool satisfies(SlopeConstraint constraint, double theta1);

}  // namespace lsh
