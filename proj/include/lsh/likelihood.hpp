#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lsh/core.hpp"

namespace lsh {

/// Upper limit of the compensator integral for each ordered pair.
enum class IntegrationMode {
  PaperPerPair,  // up to the pair's own last u->v event; silent pairs add nothing
  Horizon,       // every ordered pair, silent ones included, up to the horizon T
};

/// Baseline and jump sizes of one ordered pair (u, v).
struct PairRates {
  double mu{0.0};
  double alpha1{0.0};  // excitation from earlier u->v events
  double alpha2{0.0};  // excitation from earlier v->u events
};

PairRates pair_rates(const ModelParams &params, NodeId u, NodeId v);

/// Ozaki-style decayed sums for every event i of pair (u, v), stored kernel
/// major: self_sum[b * k + i] = sum_{t_j^{uv} < t_i} exp(-beta_b (t_i - t_j^{uv}))
/// and likewise recip_sum over the v->u history.
struct PairRecursion {
  std::size_t n_events{0};
  std::vector<double> self_sum;
  std::vector<double> recip_sum;

  double self(std::size_t b, std::size_t i) const { return self_sum[b * n_events + i]; }
  double recip(std::size_t b, std::size_t i) const { return recip_sum[b * n_events + i]; }
};

PairRecursion pair_recursion(const KernelSpec &kernel, std::span<const double> hist_uv,
                             std::span<const double> hist_vu);

/// lambda*_uv(t) with the left-limit convention: only events strictly before
/// t excite.
double conditional_intensity(const PairRates &rates, const KernelSpec &kernel,
                             std::span<const double> hist_uv,
                             std::span<const double> hist_vu, double t);
double conditional_intensity(const ModelParams &params, const KernelSpec &kernel,
                             NodeId u, NodeId v, std::span<const double> hist_uv,
                             std::span<const double> hist_vu, double t);

/// Closed-form integral of lambda*_uv over [0, t_end]. Throws EndBeforeHistory
/// if either history extends past t_end.
double compensator(const PairRates &rates, const KernelSpec &kernel,
                   std::span<const double> hist_uv, std::span<const double> hist_vu,
                   double t_end);
double compensator(const ModelParams &params, const KernelSpec &kernel, NodeId u,
                   NodeId v, std::span<const double> hist_uv,
                   std::span<const double> hist_vu, double t_end);

/// Compensator restricted to histories: events at or after t_end are ignored
/// instead of rejected.
double compensator_truncated(const PairRates &rates, const KernelSpec &kernel,
                             std::span<const double> hist_uv,
                             std::span<const double> hist_vu, double t_end);

/// Time-rescaled increments Lambda(t_i) - Lambda(t_{i-1}) (with t_0 = 0) at
/// every u->v event. Under the true model these are i.i.d. Exp(1).
std::vector<double> rescaled_increments(const PairRates &rates, const KernelSpec &kernel,
                                        std::span<const double> hist_uv,
                                        std::span<const double> hist_vu);

double log_likelihood(const ModelParams &params, const KernelSpec &kernel,
                      const EventSequence &events,
                      IntegrationMode mode = IntegrationMode::Horizon);
double log_likelihood(const ModelParams &params, const KernelSpec &kernel,
                      const PairHistory &history, double horizon, IntegrationMode mode);

/// Gradient of the negative log-likelihood, laid out like ModelParams.
struct NllGradient {
  double nll{0.0};
  Eigen::MatrixXd z;
  double theta1{0.0};
  double theta2{0.0};
  double alpha1{0.0};
  double alpha2{0.0};
  Eigen::VectorXd delta;
  Eigen::VectorXd gamma;
};

/// Negative log-likelihood and its analytic gradient. The parameters must
/// satisfy `constraint` (InvalidArgument otherwise).
NllGradient nll_and_gradient(const ModelParams &params, const KernelSpec &kernel,
                             const EventSequence &events, IntegrationMode mode,
                             SlopeConstraint constraint = SlopeConstraint::Unconstrained);
NllGradient nll_and_gradient(const ModelParams &params, const KernelSpec &kernel,
                             const PairHistory &history, double horizon,
                             IntegrationMode mode,
                             SlopeConstraint constraint = SlopeConstraint::Unconstrained);

}  // namespace lsh
