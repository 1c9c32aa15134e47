#include "lsh/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lsh/parallel.hpp"

namespace lsh {

void GenConfig::validate() const {
  if (n_nodes < 2) throw Error(ErrorKind::InvalidArgument, "need at least two nodes");
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "latent dimension must be >= 1");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw Error(ErrorKind::InvalidArgument, "horizon must be positive and finite");
  if (!(sigma_z > 0.0) || !(sigma_delta > 0.0) || !(sigma_gamma > 0.0))
    throw Error(ErrorKind::InvalidArgument, "standard deviations must be positive");
  if (!std::isfinite(theta1) || !std::isfinite(theta2))
    throw Error(ErrorKind::InvalidArgument, "theta must be finite");
  if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0) || !std::isfinite(alpha1 + alpha2))
    throw Error(ErrorKind::InvalidArgument, "alphas must be nonnegative and finite");
  if (kernel.size() == 0) throw Error(ErrorKind::InvalidArgument, "kernel is empty");
  if (max_events_per_pair == 0)
    throw Error(ErrorKind::InvalidArgument, "event cap must be positive");
}

ModelParams sample_params(const GenConfig &config) {
  config.validate();
  std::mt19937_64 rng(mix_seed(config.seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0);

  ModelParams p = ModelParams::zeros(config.n_nodes, config.dim);
  for (int u = 0; u < config.n_nodes; ++u)
    for (int c = 0; c < config.dim; ++c) p.z(u, c) = config.sigma_z * normal(rng);
  for (int u = 0; u < config.n_nodes; ++u) p.delta[u] = config.sigma_delta * normal(rng);
  for (int u = 0; u < config.n_nodes; ++u) p.gamma[u] = config.sigma_gamma * normal(rng);
  p.theta2 = config.theta2;
  p.alpha1 = config.alpha1;
  p.alpha2 = config.alpha2;
  p.theta1 = config.theta1;
  if (config.theta1 != 0.0) {
    p.z *= std::sqrt(std::abs(config.theta1));
    p.theta1 = config.theta1 > 0.0 ? 1.0 : -1.0;
  }
  return p;
}

PairTimes simulate_pair(double mu_uv, double mu_vu, double alpha1, double alpha2,
                        const KernelSpec &kernel, double horizon, std::mt19937_64 &rng,
                        std::size_t max_events) {
  if (!(mu_uv > 0.0) || !(mu_vu > 0.0) || !std::isfinite(mu_uv) || !std::isfinite(mu_vu))
    throw Error(ErrorKind::InvalidArgument, "baseline rates must be positive and finite");
  if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "alphas must be nonnegative");

  PairTimes out;
  if (!(horizon > 0.0)) return out;

  const std::size_t nb = kernel.size();
  // Decayed kernel mass left by each direction: sum_j C_b beta_b exp(-beta_b (t - t_j)).
  std::vector<double> mass_uv(nb, 0.0), mass_vu(nb, 0.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto intensities = [&] {
    double from_uv = 0.0, from_vu = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      from_uv += mass_uv[b];
      from_vu += mass_vu[b];
    }
    return std::pair{mu_uv + alpha1 * from_uv + alpha2 * from_vu,
                     mu_vu + alpha1 * from_vu + alpha2 * from_uv};
  };

  double t = 0.0;
  auto [lam_uv, lam_vu] = intensities();
  for (;;) {
    // Intensities only decay between events, so the current total bounds
    // everything up to the next acceptance.
    const double bound = lam_uv + lam_vu;
    const double wait = -std::log1p(-unit(rng)) / bound;
    t += wait;
    if (t > horizon) break;
    for (std::size_t b = 0; b < nb; ++b) {
      const double decay = std::exp(-kernel.beta(b) * wait);
      mass_uv[b] *= decay;
      mass_vu[b] *= decay;
    }
    std::tie(lam_uv, lam_vu) = intensities();
    const double draw = unit(rng) * bound;
    if (draw >= lam_uv + lam_vu) continue;

    const bool forward = draw < lam_uv;
    (forward ? out.first : out.second).push_back(t);
    std::vector<double> &mass = forward ? mass_uv : mass_vu;
    for (std::size_t b = 0; b < nb; ++b) mass[b] += kernel.weight(b) * kernel.beta(b);
    std::tie(lam_uv, lam_vu) = intensities();

    if (out.first.size() + out.second.size() > max_events) {
      std::ostringstream msg;
      msg << "more than " << max_events << " events by t = " << t
          << "; alpha1 + alpha2 = " << alpha1 + alpha2;
      throw Error(ErrorKind::UnstableProcess, msg.str());
    }
  }
  return out;
}

std::vector<Event> simulate_events(const ModelParams &params, const KernelSpec &kernel,
                                   double horizon, std::uint64_t seed,
                                   std::size_t max_events_per_pair) {
  params.validate();
  const int n = params.n_nodes();
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) pairs.emplace_back(u, v);

  std::vector<PairTimes> results(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto [u, v] = pairs[i];
      std::mt19937_64 rng(
          mix_seed(seed, 1 + static_cast<std::uint64_t>(u) * n + static_cast<std::uint64_t>(v)));
      try {
        results[i] = simulate_pair(baseline_rate(params, u, v), baseline_rate(params, v, u),
                                   params.alpha1, params.alpha2, kernel, horizon, rng,
                                   max_events_per_pair);
      } catch (const Error &e) {
        std::ostringstream msg;
        msg << "pair (" << u << ", " << v << "): " << e.what();
        throw Error(e.kind(), msg.str(), e.index());
      }
    }
  });

  std::vector<Event> events;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [u, v] = pairs[i];
    for (double t : results[i].first) events.push_back({u, v, t});
    for (double t : results[i].second) events.push_back({v, u, t});
  }
  std::sort(events.begin(), events.end(), [](const Event &a, const Event &b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.sender != b.sender) return a.sender < b.sender;
    return a.receiver < b.receiver;
  });
  return events;
}

EventSequence simulate_network(const GenConfig &config, const std::optional<ModelParams> &params) {
  config.validate();
  const ModelParams p = params ? *params : sample_params(config);
  std::vector<Event> events =
      simulate_events(p, config.kernel, config.horizon, config.seed, config.max_events_per_pair);
  if (events.empty())
    throw Error(ErrorKind::EmptyInput, "the simulated network has no events");
  return validate_events(std::move(events), p.n_nodes(), config.horizon);
}

}  // namespace lsh
