#pragma once

#include <deque>
#include <functional>

#include <Eigen/Dense>

namespace lsh {

/// Box constraints; use +-infinity for open sides. lower == upper pins a
/// coordinate.
struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static Bounds unbounded(Eigen::Index n);
  Eigen::VectorXd project(const Eigen::VectorXd &x) const;
  bool contains(const Eigen::VectorXd &x) const;
};

/// Returns f(x) and writes the gradient. May return +inf (or throw) for
/// points outside the domain; the line search backs off from those.
using Objective = std::function<double(const Eigen::VectorXd &x, Eigen::VectorXd &grad)>;

struct QuasiNewtonOptions {
  int max_iters{100};
  int memory{10};
  double pg_tol{1e-10};   // stop when the projected gradient's max-norm drops below
  double f_rel_tol{1e-15};
  int max_line_search{40};
  double armijo_c1{1e-4};
};

/// Curvature pairs; pass the same object to consecutive calls to continue
/// from the previous quasi-Newton model instead of a steepest-descent start.
struct QuasiNewtonMemory {
  std::deque<Eigen::VectorXd> s;
  std::deque<Eigen::VectorXd> y;
  void clear() {
    s.clear();
    y.clear();
  }
};

struct QuasiNewtonResult {
  Eigen::VectorXd x;
  double f{0.0};
  int iterations{0};
  int evaluations{0};
  bool converged{false};
  bool line_search_failure{false};
};

/// Projected limited-memory BFGS for box constraints. Variables held at a
/// bound by the gradient are frozen for the step; the search direction comes
/// from the two-loop recursion on the free subspace and the step is taken
/// along the projected path with Armijo backtracking. The returned iterate is
/// feasible and never worse than x0.
QuasiNewtonResult bounded_quasi_newton(const Objective &objective, Eigen::VectorXd x0,
                                       const Bounds &bounds,
                                       const QuasiNewtonOptions &options = {},
                                       QuasiNewtonMemory *memory = nullptr);

}  // namespace lsh
