#include "lsh/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace lsh {

EventSequence EventSequence::with_horizon(double horizon) const {
  std::vector<Event> copy(events_.begin(), events_.end());
  return validate_events(std::move(copy), n_nodes_, horizon);
}

EventSequence validate_events(std::vector<Event> raw, int n_nodes,
                              std::optional<double> horizon) {
  if (n_nodes <= 0)
    throw Error(ErrorKind::InvalidArgument, "n_nodes must be positive");
  if (raw.empty()) throw Error(ErrorKind::EmptyInput, "no events supplied");
  if (horizon && !(std::isfinite(*horizon) && *horizon > 0.0))
    throw Error(ErrorKind::InvalidArgument, "horizon must be positive and finite");

  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Event &e = raw[i];
    if (e.sender < 0 || e.sender >= n_nodes || e.receiver < 0 ||
        e.receiver >= n_nodes) {
      std::ostringstream msg;
      msg << "event " << i << ": node id out of range [0, " << n_nodes << ")";
      throw Error(ErrorKind::NodeOutOfRange, msg.str(), i);
    }
    if (e.sender == e.receiver)
      throw Error(ErrorKind::SelfLoop,
                  "event " + std::to_string(i) + ": sender equals receiver", i);
    if (!std::isfinite(e.time) || e.time < 0.0)
      throw Error(ErrorKind::NegativeTime,
                  "event " + std::to_string(i) + ": time must be finite and >= 0",
                  i);
  }

  auto by_time = [](const Event &a, const Event &b) { return a.time < b.time; };
  std::stable_sort(raw.begin(), raw.end(), by_time);

  const double input_max = raw.back().time;
  EventSequence out;
  // Move exact ties within an ordered pair forward by one ulp.
  std::vector<double> last(static_cast<std::size_t>(n_nodes) * n_nodes,
                           -std::numeric_limits<double>::infinity());
  for (Event &e : raw) {
    double &prev = last[static_cast<std::size_t>(e.sender) * n_nodes + e.receiver];
    if (e.time <= prev) {
      const double moved = std::nextafter(prev, std::numeric_limits<double>::infinity());
      std::ostringstream msg;
      msg.precision(17);
      msg << "duplicate timestamp " << e.time << " for pair (" << e.sender << ","
          << e.receiver << ") moved to " << moved;
      out.warnings_.push_back(msg.str());
      e.time = moved;
      ++out.perturbed_;
    }
    prev = e.time;
  }
  if (out.perturbed_ > 0) std::stable_sort(raw.begin(), raw.end(), by_time);

  const double t_max = raw.back().time;
  double h = t_max;
  if (horizon) {
    h = *horizon;
    if (h < t_max) {
      if (h < input_max)
        throw Error(ErrorKind::InvalidArgument, "horizon precedes the last event time");
      out.warnings_.push_back("horizon extended to cover a perturbed tie");
      h = t_max;
    }
  } else if (h <= 0.0) {
    // All events at time zero: keep a strictly positive window.
    h = std::numeric_limits<double>::min();
  }

  out.events_ = std::move(raw);
  out.n_nodes_ = n_nodes;
  out.horizon_ = h;
  return out;
}

PairHistory::PairHistory(const EventSequence &events) : n_nodes_(events.n_nodes()) {
  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Stable: events are already time-sorted, so each pair's times stay sorted.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Event &ea = events[a];
    const Event &eb = events[b];
    if (ea.sender != eb.sender) return ea.sender < eb.sender;
    return ea.receiver < eb.receiver;
  });

  times_.reserve(events.size());
  for (std::size_t idx : order) {
    const Event &e = events[idx];
    if (pairs_.empty() || pairs_.back().u != e.sender || pairs_.back().v != e.receiver) {
      pairs_.push_back({e.sender, e.receiver});
      offsets_.push_back(times_.size());
    }
    times_.push_back(e.time);
  }
  offsets_.push_back(times_.size());

  active_.reserve(2 * pairs_.size());
  for (const Pair &p : pairs_) {
    active_.push_back(p);
    active_.push_back({p.v, p.u});
  }
  std::sort(active_.begin(), active_.end(), [](const Pair &a, const Pair &b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  active_.erase(std::unique(active_.begin(), active_.end(),
                            [](const Pair &a, const Pair &b) {
                              return a.u == b.u && a.v == b.v;
                            }),
                active_.end());
}

std::optional<std::size_t> PairHistory::find(NodeId u, NodeId v) const {
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), Pair{u, v},
                             [](const Pair &a, const Pair &b) {
                               return a.u != b.u ? a.u < b.u : a.v < b.v;
                             });
  if (it == pairs_.end() || it->u != u || it->v != v) return std::nullopt;
  return static_cast<std::size_t>(it - pairs_.begin());
}

std::span<const double> PairHistory::times(NodeId u, NodeId v) const {
  const auto idx = find(u, v);
  if (!idx) return {};
  return std::span<const double>(times_).subspan(
      offsets_[*idx], offsets_[*idx + 1] - offsets_[*idx]);
}

std::vector<Event> PairHistory::flatten() const {
  std::vector<Event> out;
  out.reserve(times_.size());
  for (std::size_t p = 0; p < pairs_.size(); ++p)
    for (std::size_t j = offsets_[p]; j < offsets_[p + 1]; ++j)
      out.push_back({pairs_[p].u, pairs_[p].v, times_[j]});
  std::sort(out.begin(), out.end(), [](const Event &a, const Event &b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.sender != b.sender) return a.sender < b.sender;
    return a.receiver < b.receiver;
  });
  return out;
}

PairHistory build_pair_histories(const EventSequence &events) {
  return PairHistory(events);
}

KernelSpec KernelSpec::make(std::vector<double> betas, std::vector<double> weights) {
  if (betas.empty())
    throw Error(ErrorKind::InvalidArgument, "kernel needs at least one decay");
  if (betas.size() != weights.size())
    throw Error(ErrorKind::ShapeMismatch, "kernel decays and weights differ in length");

  std::vector<std::size_t> order(betas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return betas[a] < betas[b]; });

  KernelSpec k;
  double total = 0.0;
  for (std::size_t i : order) {
    if (!(std::isfinite(betas[i]) && betas[i] > 0.0))
      throw Error(ErrorKind::InvalidArgument, "kernel decays must be positive");
    if (!(std::isfinite(weights[i]) && weights[i] >= 0.0))
      throw Error(ErrorKind::InvalidArgument, "kernel weights must be nonnegative");
    if (!k.betas_.empty() && betas[i] == k.betas_.back())
      throw Error(ErrorKind::InvalidArgument, "kernel decays must be distinct");
    k.betas_.push_back(betas[i]);
    k.weights_.push_back(weights[i]);
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw Error(ErrorKind::InvalidArgument, "kernel weights must sum to 1");
  return k;
}

KernelSpec KernelSpec::uniform(std::vector<double> betas) {
  std::vector<double> w(betas.size(), betas.empty() ? 0.0 : 1.0 / betas.size());
  return make(std::move(betas), std::move(w));
}

ModelParams ModelParams::zeros(int n_nodes, int dim) {
  ModelParams p;
  p.z = Eigen::MatrixXd::Zero(n_nodes, dim);
  p.delta = Eigen::VectorXd::Zero(n_nodes);
  p.gamma = Eigen::VectorXd::Zero(n_nodes);
  return p;
}

void ModelParams::validate() const {
  if (delta.size() != z.rows() || gamma.size() != z.rows())
    throw Error(ErrorKind::ShapeMismatch,
                "latent positions, sender and receiver effects differ in node count");
  if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "jump sizes must be nonnegative");
}

double log_baseline_rate(const ModelParams &params, NodeId u, NodeId v) {
  if (u == v)
    throw Error(ErrorKind::SamePair, "baseline rate undefined for u == v");
  const double dist2 = (params.z.row(u) - params.z.row(v)).squaredNorm();
  return -params.theta1 * dist2 + params.theta2 + params.delta[u] + params.gamma[v];
}

double baseline_rate(const ModelParams &params, NodeId u, NodeId v) {
  return std::exp(log_baseline_rate(params, u, v));
}

Eigen::MatrixXd log_baseline_matrix(const ModelParams &params) {
  const int n = params.n_nodes();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v) out(u, v) = log_baseline_rate(params, u, v);
  return out;
}

bool satisfies(SlopeConstraint constraint, double theta1) {
  switch (constraint) {
    case SlopeConstraint::Positive: return theta1 > 0.0;
    case SlopeConstraint::Negative: return theta1 < 0.0;
    case SlopeConstraint::Unconstrained: return std::isfinite(theta1);
  }
  return false;
}

}  // namespace lsh
