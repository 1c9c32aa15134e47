#include "lsh/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "lsh/likelihood.hpp"
#include "lsh/parallel.hpp"
#include "lsh/simulation.hpp"

namespace lsh {
namespace {

std::span<const double> before(std::span<const double> times, double t) {
  const auto end = std::lower_bound(times.begin(), times.end(), t);
  return times.first(static_cast<std::size_t>(end - times.begin()));
}

// sum_j exp(-beta (t0 - t_j)) over a history that ends before t0.
double decayed(std::span<const double> times, double beta, double t0) {
  double s = 0.0;
  for (double tj : times) s += std::exp(-beta * (t0 - tj));
  return s;
}

Eigen::MatrixXd link_probability_serial(const ModelParams &params, const KernelSpec &kernel,
                                        const PairHistory &history, double t0, double window) {
  const int n = params.n_nodes();
  const std::size_t nb = kernel.size();
  std::vector<double> spread(nb);
  for (std::size_t b = 0; b < nb; ++b)
    spread[b] = kernel.weight(b) * -std::expm1(-kernel.beta(b) * window);

  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = 0; v < n; ++v) {
      if (u == v) continue;
      const double mu = baseline_rate(params, u, v);
      double jump = 0.0;
      const auto uv = before(history.times(u, v), t0);
      const auto vu = before(history.times(v, u), t0);
      if (!uv.empty() || !vu.empty()) {
        for (std::size_t b = 0; b < nb; ++b) {
          const double beta = kernel.beta(b);
          jump += spread[b] *
                  (params.alpha1 * decayed(uv, beta, t0) + params.alpha2 * decayed(vu, beta, t0));
        }
      }
      p(u, v) = -std::expm1(-(mu * window + jump));
    }
  }
  return p;
}

double kolmogorov_tail(double lambda) {
  if (lambda < 0.18) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

Split split_events(const EventSequence &events, const SplitSpec &spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "train fraction must lie in (0, 1]");
  const std::size_t k = events.size();
  if (k < 10) throw Error(ErrorKind::TooFewEvents, "need at least 10 events to split");
  // The small slack keeps products like 0.7 * 10 from rounding down to 6.
  auto n_train = static_cast<std::size_t>(
      std::floor(spec.train_fraction * static_cast<double>(k) * (1.0 + 1e-12)));
  n_train = std::clamp<std::size_t>(n_train, 1, k);

  const auto all = events.events();
  Split split;
  split.split_time = all[n_train - 1].time;
  split.train = validate_events(std::vector<Event>(all.begin(), all.begin() + n_train),
                                events.n_nodes(), split.split_time);
  split.test.assign(all.begin() + n_train, all.end());
  return split;
}

double test_loglik_per_event(const ModelParams &params, const KernelSpec &kernel,
                             const EventSequence &train, std::span<const Event> test,
                             double horizon) {
  if (test.empty()) throw Error(ErrorKind::EmptyTest, "the test set is empty");
  params.validate();
  const double split = train.horizon();
  const int n = train.n_nodes();
  if (params.n_nodes() != n)
    throw Error(ErrorKind::ShapeMismatch, "parameters and events disagree on n");
  for (std::size_t i = 0; i < test.size(); ++i)
    if (test[i].time < split)
      throw Error(ErrorKind::InvalidArgument, "test event precedes the split time", i);
  if (!(horizon >= split))
    throw Error(ErrorKind::InvalidArgument, "horizon precedes the split time");

  std::vector<Event> all(train.events().begin(), train.events().end());
  all.insert(all.end(), test.begin(), test.end());
  const EventSequence full = validate_events(std::move(all), n, horizon);
  const PairHistory history(full);
  const PairHistory train_history(train);

  const auto active = history.active_pairs();
  std::vector<double> terms(active.size());
  std::vector<std::size_t> counts(active.size());
  parallel_for(active.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const auto [u, v] = active[p];
      const PairRates rates = pair_rates(params, u, v);
      const auto uv = history.times(u, v);
      const auto vu = history.times(v, u);
      const std::size_t first_test = train_history.times(u, v).size();
      double ll = 0.0;
      if (uv.size() > first_test) {
        const PairRecursion rec = pair_recursion(kernel, uv, vu);
        for (std::size_t i = first_test; i < uv.size(); ++i) {
          double lambda = rates.mu;
          for (std::size_t b = 0; b < kernel.size(); ++b)
            lambda += kernel.weight(b) * kernel.beta(b) *
                      (rates.alpha1 * rec.self(b, i) + rates.alpha2 * rec.recip(b, i));
          ll += std::log(lambda);
        }
      }
      ll -= compensator(rates, kernel, uv, vu, horizon) -
            compensator_truncated(rates, kernel, uv, vu, split);
      terms[p] = ll;
      counts[p] = uv.size() - first_test;
    }
  });

  double silent = 0.0;
  std::size_t next = 0;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = 0; v < n; ++v) {
      if (u == v) continue;
      if (next < active.size() && active[next].u == u && active[next].v == v) {
        ++next;
        continue;
      }
      silent -= baseline_rate(params, u, v) * (horizon - split);
    }

  const std::size_t k_test = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (k_test == 0) throw Error(ErrorKind::EmptyTest, "no test events were scored");
  const double total = pairwise_sum(terms) + silent;
  if (!std::isfinite(total))
    throw Error(ErrorKind::NonFinite, "test log-likelihood is not finite");
  return total / static_cast<double>(k_test);
}

Eigen::MatrixXd link_probability_window(const ModelParams &params, const KernelSpec &kernel,
                                        const PairHistory &history, double t0, double window) {
  if (!(window >= 0.0)) throw Error(ErrorKind::InvalidArgument, "window must be nonnegative");
  if (params.n_nodes() != history.n_nodes())
    throw Error(ErrorKind::ShapeMismatch, "parameters and history disagree on n");
  return link_probability_serial(params, kernel, history, t0, window);
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw Error(ErrorKind::ShapeMismatch, "scores and labels differ in length");
  double n_pos = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw Error(ErrorKind::InvalidArgument, "labels must be 0 or 1", i);
    if (std::isnan(scores[i])) throw Error(ErrorKind::InvalidArgument, "score is NaN", i);
    n_pos += labels[i];
  }
  const double n_neg = static_cast<double>(labels.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0)
    throw Error(ErrorKind::SingleClass, "AUC needs both positive and negative labels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of the (mid)ranks of the positives.
  double rank_sum = 0.0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    while (end < order.size() && scores[order[end]] == scores[order[start]]) ++end;
    const double mid_rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t i = start; i < end; ++i)
      if (labels[order[i]] == 1) rank_sum += mid_rank;
    start = end;
  }
  return (rank_sum - 0.5 * n_pos * (n_pos + 1.0)) / (n_pos * n_neg);
}

LinkPredictionResult dynamic_link_prediction(const ModelParams &params,
                                             const KernelSpec &kernel,
                                             const EventSequence &events, double split_time,
                                             double horizon, std::size_t n_points,
                                             double window, std::uint64_t seed) {
  if (n_points == 0) throw Error(ErrorKind::InvalidArgument, "need at least one time point");
  if (!(window > 0.0)) throw Error(ErrorKind::InvalidArgument, "window must be positive");
  const double last_start = horizon - window;
  if (!(last_start > split_time)) {
    std::ostringstream msg;
    msg << "window " << window << " does not fit in (" << split_time << ", " << horizon << "]";
    throw Error(ErrorKind::WindowTooLarge, msg.str());
  }
  if (params.n_nodes() != events.n_nodes())
    throw Error(ErrorKind::ShapeMismatch, "parameters and events disagree on n");

  std::mt19937_64 rng(mix_seed(seed, 0));
  std::uniform_real_distribution<double> start(split_time, last_start);
  LinkPredictionResult result;
  result.points.resize(n_points);
  for (PointAuc &point : result.points) point.time = start(rng);

  const PairHistory history(events);
  const int n = events.n_nodes();
  parallel_for(n_points, [&](std::size_t begin, std::size_t end) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t i = begin; i < end; ++i) {
      PointAuc &point = result.points[i];
      const Eigen::MatrixXd prob =
          link_probability_serial(params, kernel, history, point.time, window);
      scores.clear();
      labels.clear();
      int positives = 0;
      for (NodeId u = 0; u < n; ++u)
        for (NodeId v = 0; v < n; ++v) {
          if (u == v) continue;
          const auto times = history.times(u, v);
          const auto it = std::lower_bound(times.begin(), times.end(), point.time);
          const int label = (it != times.end() && *it <= point.time + window) ? 1 : 0;
          scores.push_back(prob(u, v));
          labels.push_back(label);
          positives += label;
        }
      if (positives == 0 || positives == static_cast<int>(labels.size())) {
        point.skipped = true;
        continue;
      }
      point.auc = auc(scores, labels);
    }
  });

  std::vector<double> values;
  for (const PointAuc &point : result.points) {
    if (point.skipped)
      ++result.skipped;
    else
      values.push_back(point.auc);
  }
  if (values.empty())
    throw Error(ErrorKind::SingleClass, "no sampled window contained both classes");
  const double count = static_cast<double>(values.size());
  result.mean_auc = std::accumulate(values.begin(), values.end(), 0.0) / count;
  double ss = 0.0;
  for (double a : values) ss += (a - result.mean_auc) * (a - result.mean_auc);
  result.std_auc = std::sqrt(ss / count);
  return result;
}

PpcStats ppc_stats(std::span<const Event> events, int n_nodes) {
  PpcStats s;
  s.event_count = events.size();
  const auto n = static_cast<std::size_t>(n_nodes);

  std::vector<std::vector<NodeId>> out(n), und(n);
  for (const Event &e : events) {
    if (e.sender < 0 || e.receiver < 0 || e.sender >= n_nodes || e.receiver >= n_nodes)
      throw Error(ErrorKind::NodeOutOfRange, "event node outside [0, n)");
    out[e.sender].push_back(e.receiver);
    und[e.sender].push_back(e.receiver);
    und[e.receiver].push_back(e.sender);
  }
  auto dedupe = [](std::vector<NodeId> &row) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  };
  for (auto &row : out) dedupe(row);
  for (auto &row : und) dedupe(row);

  std::size_t directed = 0, reciprocated = 0;
  for (std::size_t u = 0; u < n; ++u)
    for (NodeId v : out[u]) {
      ++directed;
      if (std::binary_search(out[v].begin(), out[v].end(), static_cast<NodeId>(u)))
        ++reciprocated;
    }
  s.reciprocity = directed ? static_cast<double>(reciprocated) / directed : 0.0;

  // Triangles through each node, counted from its sorted neighbor list.
  std::vector<double> node_triangles(n, 0.0);
  double triples = 0.0, active = 0.0, undirected_edges = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    const auto &nu = und[u];
    const double deg = static_cast<double>(nu.size());
    if (deg > 0) active += 1.0;
    undirected_edges += deg;
    triples += deg * (deg - 1.0) / 2.0;
    for (std::size_t a = 0; a < nu.size(); ++a)
      for (std::size_t b = a + 1; b < nu.size(); ++b) {
        const auto &na = und[nu[a]];
        if (std::binary_search(na.begin(), na.end(), nu[b])) node_triangles[u] += 1.0;
      }
  }
  undirected_edges /= 2.0;
  const double closed = std::accumulate(node_triangles.begin(), node_triangles.end(), 0.0);
  // closed counts each triangle three times, once per corner.
  s.transitivity = triples > 0.0 ? closed / triples : 0.0;

  double clustering = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    const double deg = static_cast<double>(und[u].size());
    if (deg >= 2.0) clustering += node_triangles[u] / (deg * (deg - 1.0) / 2.0);
  }
  s.avg_clustering = active > 0.0 ? clustering / active : 0.0;
  s.mean_degree = active > 0.0 ? 2.0 * undirected_edges / active : 0.0;
  return s;
}

PpcStats ppc_stats(const EventSequence &events) {
  return ppc_stats(events.events(), events.n_nodes());
}

PpcEnsemble ppc_ensemble(const ModelParams &params, const KernelSpec &kernel, double horizon,
                         std::size_t n_sims, std::uint64_t seed,
                         std::size_t max_events_per_pair) {
  if (n_sims == 0) throw Error(ErrorKind::InvalidArgument, "need at least one simulation");
  PpcEnsemble ensemble;
  for (std::size_t i = 0; i < n_sims; ++i) {
    const std::vector<Event> events =
        simulate_events(params, kernel, horizon, mix_seed(seed, i), max_events_per_pair);
    ensemble.samples.push_back(ppc_stats(events, params.n_nodes()));
  }
  const double count = static_cast<double>(n_sims);
  for (const PpcStats &s : ensemble.samples) {
    ensemble.mean.event_count += static_cast<double>(s.event_count) / count;
    ensemble.mean.transitivity += s.transitivity / count;
    ensemble.mean.reciprocity += s.reciprocity / count;
    ensemble.mean.avg_clustering += s.avg_clustering / count;
    ensemble.mean.mean_degree += s.mean_degree / count;
  }
  return ensemble;
}

KsResult ks_test_exp1(std::span<const double> sample) {
  if (sample.empty()) throw Error(ErrorKind::EmptyInput, "KS test needs a sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = x[i] > 0.0 ? -std::expm1(-x[i]) : 0.0;
    d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  const double root = std::sqrt(n);
  return {d, kolmogorov_tail((root + 0.12 + 0.11 / root) * d)};
}

}  // namespace lsh
