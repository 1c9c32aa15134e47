#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lsh/core.hpp"
#include "lsh/likelihood.hpp"

namespace lsh {

/// Parameter blocks that the alternating fit holds at their initial values.
struct FixedBlocks {
  bool z{false};
  bool theta1{false};
  bool theta2{false};
  bool alpha{false};
  bool effects{false};
};

struct FitConfig {
  int dim{2};
  SlopeConstraint constraint{SlopeConstraint::Unconstrained};
  int s_theta{2};       // quasi-Newton iterations per Theta block
  int s_z{2};           // quasi-Newton iterations per Z block
  int max_outer{500};
  double rel_tol{1e-6};
  std::uint64_t seed{0};
  IntegrationMode mode{IntegrationMode::Horizon};
  /// Starting point; replaces the MDS + random initialization when set.
  std::optional<ModelParams> initial;
  FixedBlocks fixed;

  /// Throws InvalidArgument on out-of-range settings.
  void validate() const;
};

struct TracePoint {
  int outer_iter{0};
  double nll{0.0};
};

struct FitResult {
  ModelParams params;
  std::vector<TracePoint> trace;  // entry 0 is the initialization
  bool converged{false};
  int outer_iters{0};
  std::vector<std::string> warnings;
};

/// Classical MDS of the shortest-path distances on the undirected graph with
/// an edge wherever any event occurred; unreachable pairs sit at
/// (largest finite distance + 1). Returns an n x d column-centered matrix.
Eigen::MatrixXd mds_init(const EventSequence &events, int dim);

/// MDS positions plus the randomized Theta start used by fit().
ModelParams initialize(const EventSequence &events, const KernelSpec &kernel,
                       const FitConfig &config);

/// Alternating minimization: s_theta iterations over
/// (alpha1, alpha2, theta1, theta2, delta, gamma) with Z fixed, then s_z
/// iterations over Z with the rest fixed, until the relative NLL improvement
/// of a full cycle falls below rel_tol. The returned parameters are
/// normalized (see normalize_identifiability).
FitResult fit(const EventSequence &events, const KernelSpec &kernel,
              const FitConfig &config);

/// Moves the slope magnitude into centered latent positions (|theta1| = 1)
/// and shifts the mean sender/receiver effects into theta2. Every baseline
/// rate is preserved.
ModelParams normalize_identifiability(const ModelParams &params);

struct ProcrustesResult {
  Eigen::MatrixXd rotation;  // d x d orthogonal
  Eigen::MatrixXd aligned;   // centered estimate times rotation
  double rmse{0.0};
};

/// Orthogonal Procrustes: the rotation/reflection O minimizing
/// |Z_est O - Z_ref|_F after centering both. rmse = |Z_est O - Z_ref|_F / sqrt(n).
ProcrustesResult procrustes_align(const Eigen::MatrixXd &z_est, const Eigen::MatrixXd &z_ref);

}  // namespace lsh
