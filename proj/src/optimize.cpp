#include "lsh/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lsh/error.hpp"

namespace lsh {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective &objective, const Eigen::VectorXd &x,
                 Eigen::VectorXd &grad) {
  double f;
  try {
    f = objective(x, grad);
  } catch (const Error &e) {
    if (e.kind() != ErrorKind::NonFinite) throw;
    return kInf;
  }
  if (!std::isfinite(f) || !grad.allFinite()) return kInf;
  return f;
}

Eigen::VectorXd two_loop(const QuasiNewtonMemory &mem, Eigen::VectorXd q) {
  const std::size_t k = mem.s.size();
  std::vector<double> alpha(k), rho(k);
  for (std::size_t j = k; j-- > 0;) {
    rho[j] = 1.0 / mem.y[j].dot(mem.s[j]);
    alpha[j] = rho[j] * mem.s[j].dot(q);
    q -= alpha[j] * mem.y[j];
  }
  const double scale = mem.s.back().dot(mem.y.back()) / mem.y.back().squaredNorm();
  Eigen::VectorXd r = scale * q;
  for (std::size_t j = 0; j < k; ++j) {
    const double beta = rho[j] * mem.y[j].dot(r);
    r += (alpha[j] - beta) * mem.s[j];
  }
  return r;
}

}  // namespace

Bounds Bounds::unbounded(Eigen::Index n) {
  return {Eigen::VectorXd::Constant(n, -kInf), Eigen::VectorXd::Constant(n, kInf)};
}

Eigen::VectorXd Bounds::project(const Eigen::VectorXd &x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

bool Bounds::contains(const Eigen::VectorXd &x) const {
  return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

QuasiNewtonResult bounded_quasi_newton(const Objective &objective, Eigen::VectorXd x0,
                                       const Bounds &bounds,
                                       const QuasiNewtonOptions &options,
                                       QuasiNewtonMemory *memory) {
  const Eigen::Index n = x0.size();
  if (bounds.lower.size() != n || bounds.upper.size() != n)
    throw Error(ErrorKind::ShapeMismatch, "bounds do not match the parameter vector");
  if ((bounds.lower.array() > bounds.upper.array()).any())
    throw Error(ErrorKind::InvalidArgument, "lower bound exceeds upper bound");

  QuasiNewtonMemory local;
  QuasiNewtonMemory &mem = memory ? *memory : local;

  QuasiNewtonResult result;
  Eigen::VectorXd x = bounds.project(x0);
  Eigen::VectorXd g(n);
  double f = safe_eval(objective, x, g);
  result.evaluations = 1;
  if (!std::isfinite(f))
    throw Error(ErrorKind::NonFinite, "objective is not finite at the starting point");

  Eigen::VectorXd xt(n), gt(n);
  for (int iter = 0; iter < options.max_iters; ++iter) {
    const Eigen::VectorXd pg = bounds.project(x - g) - x;
    if (pg.lpNorm<Eigen::Infinity>() <= options.pg_tol) {
      result.converged = true;
      break;
    }

    // Coordinates pinned by their bound (or by lower == upper) stay put.
    Eigen::VectorXd free_mask(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool pinned = bounds.lower[i] == bounds.upper[i] ||
                          (x[i] <= bounds.lower[i] && g[i] > 0.0) ||
                          (x[i] >= bounds.upper[i] && g[i] < 0.0);
      free_mask[i] = pinned ? 0.0 : 1.0;
    }
    const Eigen::VectorXd g_free = g.cwiseProduct(free_mask);

    bool accepted = false;
    double ft = kInf;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Eigen::VectorXd d;
      double step = 1.0;
      if (!mem.s.empty()) {
        d = -two_loop(mem, g_free).cwiseProduct(free_mask);
        if (!(g.dot(d) < 0.0)) {
          mem.clear();
          d.resize(0);
        }
      }
      if (d.size() == 0) {
        d = -g_free;
        step = std::min(1.0, 1.0 / g_free.norm());
      }
      const double slope = g.dot(d);

      for (int ls = 0; ls < options.max_line_search; ++ls) {
        xt = bounds.project(x + step * d);
        if (xt == x) break;
        ft = safe_eval(objective, xt, gt);
        ++result.evaluations;
        if (ft <= f + options.armijo_c1 * g.dot(xt - x)) {
          accepted = true;
          break;
        }
        if (std::isfinite(ft)) {
          // Minimizer of the quadratic through f, slope and ft, safeguarded.
          const double denom = 2.0 * (ft - f - slope * step);
          double next = denom > 0.0 ? -slope * step * step / denom : 0.5 * step;
          step = std::clamp(next, 0.1 * step, 0.5 * step);
        } else {
          step *= 0.1;
        }
      }
      // A failed quasi-Newton step is retried once from steepest descent.
      if (!accepted) {
        if (mem.s.empty()) break;
        mem.clear();
      }
    }

    if (!accepted) {
      result.line_search_failure = true;
      break;
    }

    const Eigen::VectorXd s = xt - x;
    const Eigen::VectorXd y = gt - g;
    const double sy = s.dot(y);
    if (sy > 1e-10 * y.squaredNorm() && sy > 0.0) {
      mem.s.push_back(s);
      mem.y.push_back(y);
      while (static_cast<int>(mem.s.size()) > std::max(1, options.memory)) {
        mem.s.pop_front();
        mem.y.pop_front();
      }
    }

    const double f_old = f;
    x = xt;
    f = ft;
    g = gt;
    ++result.iterations;
    if (f_old - f <= options.f_rel_tol * std::max({std::abs(f_old), std::abs(f), 1.0})) {
      result.converged = true;
      break;
    }
  }

  result.x = std::move(x);
  result.f = f;
  return result;
}

}  // namespace lsh
