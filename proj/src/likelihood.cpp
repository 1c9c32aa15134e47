#include "lsh/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lsh/parallel.hpp"

namespace lsh {
namespace {

// Per ordered pair: log-likelihood contribution and its partial derivatives
// with respect to log mu, alpha1 and alpha2.
struct PairTerms {
  double ll{0.0};
  double d_eta{0.0};
  double d_alpha1{0.0};
  double d_alpha2{0.0};
  std::ptrdiff_t bad_event{-1};
};

// sum_b C_b sum_{t_j < t_end} (1 - exp(-beta_b (t_end - t_j)))
double integrated_kernel_mass(const KernelSpec &kernel, std::span<const double> hist,
                              double t_end) {
  double total = 0.0;
  for (std::size_t b = 0; b < kernel.size(); ++b) {
    const double beta = kernel.beta(b);
    double s = 0.0;
    for (double tj : hist) {
      if (tj >= t_end) break;
      s += -std::expm1(-beta * (t_end - tj));
    }
    total += kernel.weight(b) * s;
  }
  return total;
}

PairTerms evaluate_pair(double eta, double alpha1, double alpha2,
                        const KernelSpec &kernel, std::span<const double> uv,
                        std::span<const double> vu, double t_stop) {
  PairTerms out;
  if (t_stop <= 0.0 && uv.empty()) return out;

  const std::size_t nb = kernel.size();
  const double mu = std::exp(eta);
  const bool mu_is_normal = mu > 1e-280;

  std::vector<double> self(nb, 0.0), recip(nb, 0.0);
  std::size_t p = 0;
  double t_prev = 0.0;
  double sum_log = 0.0, sum_mu_ratio = 0.0, sum_s_ratio = 0.0, sum_r_ratio = 0.0;

  for (std::size_t i = 0; i < uv.size(); ++i) {
    const double t = uv[i];
    for (std::size_t b = 0; b < nb; ++b) {
      const double decay = std::exp(-kernel.beta(b) * (t - t_prev));
      self[b] = i == 0 ? 0.0 : (self[b] + 1.0) * decay;
      recip[b] *= decay;
    }
    for (; p < vu.size() && vu[p] < t; ++p)
      for (std::size_t b = 0; b < nb; ++b)
        recip[b] += std::exp(-kernel.beta(b) * (t - vu[p]));
    t_prev = t;

    double s = 0.0, r = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      const double cb = kernel.weight(b) * kernel.beta(b);
      s += cb * self[b];
      r += cb * recip[b];
    }
    const double excitation = alpha1 * s + alpha2 * r;

    double log_lambda;
    if (mu_is_normal) {
      log_lambda = std::log(mu + excitation);
    } else if (excitation > 0.0) {
      // log(exp(eta) + excitation) without forming the underflowing mu.
      const double le = std::log(excitation);
      const double hi = std::max(eta, le);
      log_lambda = hi + std::log1p(std::exp(std::min(eta, le) - hi));
    } else {
      log_lambda = eta;
    }
    if (!std::isfinite(log_lambda)) {
      out.bad_event = static_cast<std::ptrdiff_t>(i);
      return out;
    }
    sum_log += log_lambda;
    if (mu_is_normal) {
      const double inv = 1.0 / (mu + excitation);
      sum_mu_ratio += mu * inv;
      sum_s_ratio += s * inv;
      sum_r_ratio += r * inv;
    } else {
      sum_mu_ratio += std::exp(eta - log_lambda);
      if (s > 0.0) sum_s_ratio += std::exp(std::log(s) - log_lambda);
      if (r > 0.0) sum_r_ratio += std::exp(std::log(r) - log_lambda);
    }
  }

  const double mass_self = integrated_kernel_mass(kernel, uv, t_stop);
  const double mass_recip = integrated_kernel_mass(kernel, vu, t_stop);
  const double base = mu * t_stop;

  out.ll = sum_log - base - alpha1 * mass_self - alpha2 * mass_recip;
  out.d_eta = sum_mu_ratio - base;
  out.d_alpha1 = sum_s_ratio - mass_self;
  out.d_alpha2 = sum_r_ratio - mass_recip;
  if (!std::isfinite(out.ll)) out.bad_event = static_cast<std::ptrdiff_t>(uv.size());
  return out;
}

struct Evaluation {
  double ll{0.0};
  NllGradient grad;
};

[[noreturn]] void throw_non_finite(NodeId u, NodeId v, std::ptrdiff_t event) {
  std::ostringstream msg;
  msg << "non-finite log-likelihood for pair (" << u << "," << v << ")";
  if (event >= 0) msg << " at pair event index " << event;
  throw Error(ErrorKind::NonFinite, msg.str(), static_cast<std::size_t>(event));
}

Evaluation evaluate(const ModelParams &params, const KernelSpec &kernel,
                    const PairHistory &history, double horizon, IntegrationMode mode,
                    bool want_gradient) {
  params.validate();
  const int n = params.n_nodes();
  if (history.n_nodes() != n)
    throw Error(ErrorKind::ShapeMismatch, "parameters and events differ in node count");
  if (!std::isfinite(params.theta1) || !std::isfinite(params.theta2) ||
      !std::isfinite(params.alpha1) || !std::isfinite(params.alpha2) ||
      !params.z.allFinite() || !params.delta.allFinite() || !params.gamma.allFinite())
    throw Error(ErrorKind::NonFinite, "parameters contain non-finite values");

  const auto active = history.active_pairs();
  std::vector<PairTerms> terms(active.size());
  parallel_for(active.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t a = begin; a < end; ++a) {
      const auto [u, v] = active[a];
      const auto uv = history.times(u, v);
      const auto vu = history.times(v, u);
      double t_stop = horizon;
      if (mode == IntegrationMode::PaperPerPair) t_stop = uv.empty() ? 0.0 : uv.back();
      terms[a] = evaluate_pair(log_baseline_rate(params, u, v), params.alpha1,
                               params.alpha2, kernel, uv, vu, t_stop);
    }
  });

  Evaluation out;
  NllGradient &g = out.grad;
  if (want_gradient) {
    g.z = Eigen::MatrixXd::Zero(n, params.dim());
    g.delta = Eigen::VectorXd::Zero(n);
    g.gamma = Eigen::VectorXd::Zero(n);
  }

  std::vector<double> ll(static_cast<std::size_t>(n) * std::max(n - 1, 0), 0.0);
  std::size_t next_active = 0, slot = 0;
  double d_alpha1 = 0.0, d_alpha2 = 0.0;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = 0; v < n; ++v) {
      if (u == v) continue;
      PairTerms t;
      if (next_active < active.size() && active[next_active].u == u &&
          active[next_active].v == v) {
        t = terms[next_active++];
        if (t.bad_event >= 0) throw_non_finite(u, v, t.bad_event);
      } else if (mode == IntegrationMode::Horizon) {
        const double base = baseline_rate(params, u, v) * horizon;
        t.ll = -base;
        t.d_eta = -base;
      }
      ll[slot++] = t.ll;
      if (!want_gradient) continue;

      const int d = params.dim();
      double dist2 = 0.0;
      for (int c = 0; c < d; ++c) {
        const double diff = params.z(u, c) - params.z(v, c);
        dist2 += diff * diff;
      }
      g.theta1 += -dist2 * t.d_eta;
      g.theta2 += t.d_eta;
      g.delta[u] += t.d_eta;
      g.gamma[v] += t.d_eta;
      const double scale = -2.0 * params.theta1 * t.d_eta;
      for (int c = 0; c < d; ++c) {
        const double dz = scale * (params.z(u, c) - params.z(v, c));
        g.z(u, c) += dz;
        g.z(v, c) -= dz;
      }
      d_alpha1 += t.d_alpha1;
      d_alpha2 += t.d_alpha2;
    }
  }

  out.ll = pairwise_sum(ll);
  if (!std::isfinite(out.ll))
    throw Error(ErrorKind::NonFinite, "log-likelihood is not finite");
  g.nll = -out.ll;
  if (want_gradient) {
    g.alpha1 = -d_alpha1;
    g.alpha2 = -d_alpha2;
    g.theta1 = -g.theta1;
    g.theta2 = -g.theta2;
    g.z = -g.z;
    g.delta = -g.delta;
    g.gamma = -g.gamma;
  }
  return out;
}

void check_history_end(std::span<const double> hist, double t_end) {
  if (!hist.empty() && hist.back() > t_end)
    throw Error(ErrorKind::EndBeforeHistory,
                "compensator end time precedes the last history event");
}

}  // namespace

PairRates pair_rates(const ModelParams &params, NodeId u, NodeId v) {
  return {baseline_rate(params, u, v), params.alpha1, params.alpha2};
}

PairRecursion pair_recursion(const KernelSpec &kernel, std::span<const double> hist_uv,
                             std::span<const double> hist_vu) {
  const std::size_t k = hist_uv.size();
  const std::size_t nb = kernel.size();
  PairRecursion rec;
  rec.n_events = k;
  rec.self_sum.assign(nb * k, 0.0);
  rec.recip_sum.assign(nb * k, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    const double beta = kernel.beta(b);
    double self = 0.0, recip = 0.0, t_prev = 0.0;
    std::size_t p = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const double t = hist_uv[i];
      const double decay = std::exp(-beta * (t - t_prev));
      self = i == 0 ? 0.0 : (self + 1.0) * decay;
      recip *= decay;
      for (; p < hist_vu.size() && hist_vu[p] < t; ++p)
        recip += std::exp(-beta * (t - hist_vu[p]));
      rec.self_sum[b * k + i] = self;
      rec.recip_sum[b * k + i] = recip;
      t_prev = t;
    }
  }
  return rec;
}

double conditional_intensity(const PairRates &rates, const KernelSpec &kernel,
                             std::span<const double> hist_uv,
                             std::span<const double> hist_vu, double t) {
  double lambda = rates.mu;
  for (std::size_t b = 0; b < kernel.size(); ++b) {
    const double beta = kernel.beta(b);
    const double cb = kernel.weight(b) * beta;
    double s = 0.0, r = 0.0;
    for (double tj : hist_uv) {
      if (tj >= t) break;
      s += std::exp(-beta * (t - tj));
    }
    for (double tj : hist_vu) {
      if (tj >= t) break;
      r += std::exp(-beta * (t - tj));
    }
    lambda += cb * (rates.alpha1 * s + rates.alpha2 * r);
  }
  return lambda;
}

double conditional_intensity(const ModelParams &params, const KernelSpec &kernel,
                             NodeId u, NodeId v, std::span<const double> hist_uv,
                             std::span<const double> hist_vu, double t) {
  return conditional_intensity(pair_rates(params, u, v), kernel, hist_uv, hist_vu, t);
}

double compensator_truncated(const PairRates &rates, const KernelSpec &kernel,
                             std::span<const double> hist_uv,
                             std::span<const double> hist_vu, double t_end) {
  if (t_end <= 0.0) return 0.0;
  return rates.mu * t_end + rates.alpha1 * integrated_kernel_mass(kernel, hist_uv, t_end) +
         rates.alpha2 * integrated_kernel_mass(kernel, hist_vu, t_end);
}

double compensator(const PairRates &rates, const KernelSpec &kernel,
                   std::span<const double> hist_uv, std::span<const double> hist_vu,
                   double t_end) {
  check_history_end(hist_uv, t_end);
  check_history_end(hist_vu, t_end);
  return compensator_truncated(rates, kernel, hist_uv, hist_vu, t_end);
}

double compensator(const ModelParams &params, const KernelSpec &kernel, NodeId u,
                   NodeId v, std::span<const double> hist_uv,
                   std::span<const double> hist_vu, double t_end) {
  return compensator(pair_rates(params, u, v), kernel, hist_uv, hist_vu, t_end);
}

std::vector<double> rescaled_increments(const PairRates &rates, const KernelSpec &kernel,
                                        std::span<const double> hist_uv,
                                        std::span<const double> hist_vu) {
  const PairRecursion rec = pair_recursion(kernel, hist_uv, hist_vu);
  std::vector<double> out;
  out.reserve(hist_uv.size());
  double previous = 0.0;
  std::size_t n_recip = 0;
  for (std::size_t i = 0; i < hist_uv.size(); ++i) {
    const double t = hist_uv[i];
    while (n_recip < hist_vu.size() && hist_vu[n_recip] < t) ++n_recip;
    // sum_{t_j < t} (1 - e^{-beta (t - t_j)}) = count - decayed sum
    double lambda_int = rates.mu * t;
    for (std::size_t b = 0; b < kernel.size(); ++b) {
      lambda_int += kernel.weight(b) *
                    (rates.alpha1 * (static_cast<double>(i) - rec.self(b, i)) +
                     rates.alpha2 * (static_cast<double>(n_recip) - rec.recip(b, i)));
    }
    out.push_back(lambda_int - previous);
    previous = lambda_int;
  }
  return out;
}

double log_likelihood(const ModelParams &params, const KernelSpec &kernel,
                      const PairHistory &history, double horizon, IntegrationMode mode) {
  return evaluate(params, kernel, history, horizon, mode, false).ll;
}

double log_likelihood(const ModelParams &params, const KernelSpec &kernel,
                      const EventSequence &events, IntegrationMode mode) {
  return log_likelihood(params, kernel, PairHistory(events), events.horizon(), mode);
}

NllGradient nll_and_gradient(const ModelParams &params, const KernelSpec &kernel,
                             const PairHistory &history, double horizon,
                             IntegrationMode mode, SlopeConstraint constraint) {
  if (!satisfies(constraint, params.theta1))
    throw Error(ErrorKind::InvalidArgument, "theta1 violates the slope constraint");
  return evaluate(params, kernel, history, horizon, mode, true).grad;
}

NllGradient nll_and_gradient(const ModelParams &params, const KernelSpec &kernel,
                             const EventSequence &events, IntegrationMode mode,
                             SlopeConstraint constraint) {
  return nll_and_gradient(params, kernel, PairHistory(events), events.horizon(), mode,
                          constraint);
}

}  // namespace lsh
