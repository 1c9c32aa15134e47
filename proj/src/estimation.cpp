#include "lsh/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <sstream>

#include "lsh/optimize.hpp"
#include "lsh/parallel.hpp"

namespace lsh {
namespace {

constexpr double kSlopeGap = 1e-8;

Eigen::MatrixXd center_columns(const Eigen::MatrixXd &z) {
  return z.rowwise() - z.colwise().mean();
}

// Theta layout: [alpha1, alpha2, theta1, theta2, delta(n), gamma(n)].
Eigen::VectorXd pack_theta(const ModelParams &p) {
  const Eigen::Index n = p.n_nodes();
  Eigen::VectorXd x(4 + 2 * n);
  x << p.alpha1, p.alpha2, p.theta1, p.theta2, p.delta, p.gamma;
  return x;
}

void unpack_theta(const Eigen::VectorXd &x, ModelParams &p) {
  const Eigen::Index n = p.n_nodes();
  p.alpha1 = x[0];
  p.alpha2 = x[1];
  p.theta1 = x[2];
  p.theta2 = x[3];
  p.delta = x.segment(4, n);
  p.gamma = x.segment(4 + n, n);
}

Eigen::VectorXd pack_theta_gradient(const NllGradient &g) {
  const Eigen::Index n = g.delta.size();
  Eigen::VectorXd x(4 + 2 * n);
  x << g.alpha1, g.alpha2, g.theta1, g.theta2, g.delta, g.gamma;
  return x;
}

Bounds theta_bounds(const ModelParams &p, const FitConfig &config) {
  const Eigen::Index n = p.n_nodes();
  Bounds b = Bounds::unbounded(4 + 2 * n);
  b.lower[0] = 0.0;
  b.lower[1] = 0.0;
  if (config.constraint == SlopeConstraint::Positive) b.lower[2] = kSlopeGap;
  if (config.constraint == SlopeConstraint::Negative) b.upper[2] = -kSlopeGap;

  const Eigen::VectorXd x = pack_theta(p);
  auto fix = [&](Eigen::Index i, Eigen::Index len) {
    for (Eigen::Index k = i; k < i + len; ++k) b.lower[k] = b.upper[k] = x[k];
  };
  if (config.fixed.alpha) fix(0, 2);
  if (config.fixed.theta1) fix(2, 1);
  if (config.fixed.theta2) fix(3, 1);
  if (config.fixed.effects) fix(4, 2 * n);
  return b;
}

Eigen::VectorXd flatten(const Eigen::MatrixXd &z) {
  return Eigen::Map<const Eigen::VectorXd>(z.data(), z.size());
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd &x, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Eigen::MatrixXd>(x.data(), rows, cols);
}

}  // namespace

void FitConfig::validate() const {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "latent dimension must be >= 1");
  if (s_theta < 1 || s_z < 1)
    throw Error(ErrorKind::InvalidArgument, "step sizes must be >= 1");
  if (max_outer < 0)
    throw Error(ErrorKind::InvalidArgument, "max_outer must be nonnegative");
  if (!(rel_tol > 0.0))
    throw Error(ErrorKind::InvalidArgument, "rel_tol must be positive");
}

Eigen::MatrixXd mds_init(const EventSequence &events, int dim) {
  const int n = events.n_nodes();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "MDS needs at least two nodes");
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "latent dimension must be >= 1");
  if (dim >= n)
    throw Error(ErrorKind::DimensionTooLarge, "latent dimension must be below the node count");

  std::vector<std::vector<int>> adj(n);
  for (const Event &e : events.events()) {
    adj[e.sender].push_back(e.receiver);
    adj[e.receiver].push_back(e.sender);
  }
  for (auto &row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }

  Eigen::MatrixXd dist = Eigen::MatrixXd::Constant(n, n, -1.0);
  double max_finite = 0.0;
  for (int s = 0; s < n; ++s) {
    std::queue<int> frontier;
    dist(s, s) = 0.0;
    frontier.push(s);
    while (!frontier.empty()) {
      const int a = frontier.front();
      frontier.pop();
      for (int b : adj[a]) {
        if (dist(s, b) >= 0.0) continue;
        dist(s, b) = dist(s, a) + 1.0;
        max_finite = std::max(max_finite, dist(s, b));
        frontier.push(b);
      }
    }
  }
  dist = (dist.array() < 0.0).select(max_finite + 1.0, dist);

  // B = -1/2 J D^2 J
  const Eigen::MatrixXd sq = dist.array().square().matrix();
  const Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd gram = -0.5 * centering * sq * centering;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);

  Eigen::MatrixXd z(n, dim);
  for (int c = 0; c < dim; ++c) {
    const int idx = n - 1 - c;  // eigenvalues come in ascending order
    Eigen::VectorXd vec = eig.eigenvectors().col(idx);
    Eigen::Index arg;
    vec.cwiseAbs().maxCoeff(&arg);
    if (vec[arg] < 0.0) vec = -vec;
    z.col(c) = vec * std::sqrt(std::max(eig.eigenvalues()[idx], 0.0));
  }
  return center_columns(z);
}

ModelParams initialize(const EventSequence &events, const KernelSpec &kernel,
                       const FitConfig &config) {
  (void)kernel;
  config.validate();
  const int n = events.n_nodes();
  ModelParams p = ModelParams::zeros(n, config.dim);
  p.z = mds_init(events, config.dim);

  std::mt19937_64 rng(mix_seed(config.seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> jump(0.0, 0.2);

  double slope = std::max(std::abs(normal(rng)), 1e-3);
  if (config.constraint == SlopeConstraint::Negative) slope = -slope;
  p.theta1 = slope;
  p.alpha1 = jump(rng);
  p.alpha2 = jump(rng);
  for (int u = 0; u < n; ++u) p.delta[u] = 0.1 * normal(rng);
  for (int u = 0; u < n; ++u) p.gamma[u] = 0.1 * normal(rng);

  // Anchor theta2 so the initial baselines reproduce the observed event count.
  double mass = 0.0;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v) {
        p.theta2 = 0.0;
        mass += baseline_rate(p, u, v);
      }
  const double count = static_cast<double>(events.size());
  p.theta2 = std::log(count / (mass * events.horizon())) + 0.1 * normal(rng);
  return p;
}

ModelParams normalize_identifiability(const ModelParams &params) {
  if (params.theta1 == 0.0)
    throw Error(ErrorKind::ZeroSlope, "cannot normalize a zero slope");
  ModelParams out = params;
  out.z = center_columns(params.z * std::sqrt(std::abs(params.theta1)));
  out.theta1 = params.theta1 > 0.0 ? 1.0 : -1.0;
  const double mean_delta = params.delta.mean();
  const double mean_gamma = params.gamma.mean();
  out.delta.array() -= mean_delta;
  out.gamma.array() -= mean_gamma;
  out.theta2 = params.theta2 + mean_delta + mean_gamma;
  return out;
}

FitResult fit(const EventSequence &events, const KernelSpec &kernel,
              const FitConfig &config) {
  config.validate();
  const int n = events.n_nodes();
  const PairHistory history(events);
  const double horizon = events.horizon();

  ModelParams current = config.initial ? *config.initial : initialize(events, kernel, config);
  if (current.n_nodes() != n || current.dim() != config.dim)
    throw Error(ErrorKind::ShapeMismatch, "initial parameters do not match n or d");
  current.validate();
  if (!satisfies(config.constraint, current.theta1))
    throw Error(ErrorKind::InvalidArgument, "initial theta1 violates the slope constraint");

  FitResult result;
  double nll;
  try {
    nll = -log_likelihood(current, kernel, history, horizon, config.mode);
  } catch (const Error &e) {
    throw Error(e.kind(), std::string("fit initialization: ") + e.what(), e.index());
  }
  result.trace.push_back({0, nll});

  if (config.max_outer == 0) {
    result.params = current;
    return result;
  }

  const Bounds bounds_theta = theta_bounds(current, config);
  Bounds bounds_z = Bounds::unbounded(static_cast<Eigen::Index>(n) * config.dim);
  const bool theta_free = !(config.fixed.alpha && config.fixed.theta1 &&
                            config.fixed.theta2 && config.fixed.effects);

  auto theta_objective = [&](const Eigen::VectorXd &x, Eigen::VectorXd &grad) {
    ModelParams p = current;
    unpack_theta(x, p);
    const NllGradient g = nll_and_gradient(p, kernel, history, horizon, config.mode);
    grad = pack_theta_gradient(g);
    return g.nll;
  };
  auto z_objective = [&](const Eigen::VectorXd &x, Eigen::VectorXd &grad) {
    ModelParams p = current;
    p.z = unflatten(x, n, config.dim);
    const NllGradient g = nll_and_gradient(p, kernel, history, horizon, config.mode);
    grad = flatten(g.z);
    return g.nll;
  };

  QuasiNewtonOptions theta_opts;
  theta_opts.max_iters = config.s_theta;
  QuasiNewtonOptions z_opts;
  z_opts.max_iters = config.s_z;
  QuasiNewtonMemory theta_memory, z_memory;
  bool warned_unstable = false;

  auto check_stability = [&](int outer) {
    if (warned_unstable || current.alpha1 + current.alpha2 < 1.0) return;
    std::ostringstream msg;
    msg << "outer iteration " << outer << ": alpha1 + alpha2 = "
        << current.alpha1 + current.alpha2 << " >= 1, the fitted process is unstable";
    result.warnings.push_back(msg.str());
    warned_unstable = true;
  };

  for (int outer = 1; outer <= config.max_outer; ++outer) {
    const double previous = nll;
    try {
      if (theta_free) {
        const QuasiNewtonResult r = bounded_quasi_newton(
            theta_objective, pack_theta(current), bounds_theta, theta_opts, &theta_memory);
        unpack_theta(r.x, current);
        nll = r.f;
        check_stability(outer);
      }
      if (!config.fixed.z) {
        const QuasiNewtonResult r = bounded_quasi_newton(
            z_objective, flatten(current.z), bounds_z, z_opts, &z_memory);
        current.z = unflatten(r.x, n, config.dim);
        nll = r.f;
      }
    } catch (const Error &e) {
      std::ostringstream msg;
      msg << "fit outer iteration " << outer << ": " << e.what();
      throw Error(e.kind(), msg.str(), e.index());
    }
    result.trace.push_back({outer, nll});
    result.outer_iters = outer;
    if ((previous - nll) < config.rel_tol * std::max(std::abs(previous), 1e-300)) {
      result.converged = true;
      break;
    }
  }

  if (current.theta1 == 0.0) {
    result.warnings.push_back("theta1 is exactly zero; positions left unscaled");
    current.z = center_columns(current.z);
    result.params = current;
  } else {
    result.params = normalize_identifiability(current);
  }
  return result;
}

ProcrustesResult procrustes_align(const Eigen::MatrixXd &z_est, const Eigen::MatrixXd &z_ref) {
  if (z_est.rows() != z_ref.rows() || z_est.cols() != z_ref.cols())
    throw Error(ErrorKind::ShapeMismatch, "Procrustes inputs differ in shape");
  const Eigen::MatrixXd est = center_columns(z_est);
  const Eigen::MatrixXd ref = center_columns(z_ref);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(est.transpose() * ref,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  ProcrustesResult out;
  out.rotation = svd.matrixU() * svd.matrixV().transpose();
  out.aligned = est * out.rotation;
  out.rmse = (out.aligned - ref).norm() / std::sqrt(static_cast<double>(z_est.rows()));
  return out;
}

}  // namespace lsh
