// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
// gating criterion fails. AC9 is informational only.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "lsh/estimation.hpp"
#include "lsh/evaluation.hpp"
#include "lsh/io.hpp"
#include "lsh/likelihood.hpp"
#include "lsh/parallel.hpp"
#include "lsh/simulation.hpp"
#include "support/oracles.hpp"

using namespace lsh;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char *f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Compensator closed form against adaptive quadrature.
Verdict ac1() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<std::size_t> count(0, 10);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const KernelSpec k = oracle::random_kernel(rng, 3);
    const PairRates r = oracle::random_rates(rng);
    const double horizon = 10.0;
    const auto uv = oracle::random_times(rng, count(rng), horizon);
    const auto vu = oracle::random_times(rng, count(rng), horizon);
    const double closed = compensator(r, k, uv, vu, horizon);
    worst = std::max(worst, rel_err(closed, oracle::quadrature_compensator(r, k, uv, vu, horizon)));
  }
  return {worst < 1e-8, fmt("200 instances, max rel err %.2e (< 1e-8)", worst)};
}

// Recursive log-likelihood against the naive double sum.
Verdict ac2() {
  std::mt19937_64 rng(1002);
  std::uniform_int_distribution<std::size_t> count(1, 200);
  std::uniform_int_distribution<int> nodes(2, 6);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int n = nodes(rng);
    const KernelSpec k = oracle::random_kernel(rng, 3);
    const ModelParams p = oracle::random_params(rng, n, 2, i % 2 ? -1.0 : 1.0);
    const EventSequence s = oracle::random_events(rng, n, count(rng), 50.0);
    const auto mode = i % 3 == 0 ? IntegrationMode::PaperPerPair : IntegrationMode::Horizon;
    worst = std::max(worst, rel_err(log_likelihood(p, k, s, mode), oracle::naive_loglik(p, k, s, mode)));
  }
  return {worst < 1e-10, fmt("100 instances, max rel err %.2e (< 1e-10)", worst)};
}

// Analytic gradient against a five-point central difference.
Verdict ac3() {
  std::mt19937_64 rng(1003);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int i = 0; i < 50; ++i) {
    const int n = 4;
    const KernelSpec k = oracle::random_kernel(rng, 3);
    const ModelParams p = oracle::random_params(rng, n, 2, i % 2 ? -1.0 : 1.0);
    const EventSequence s = oracle::random_events(rng, n, 80, 20.0);
    const auto mode = i % 4 == 3 ? IntegrationMode::PaperPerPair : IntegrationMode::Horizon;
    const NllGradient g = nll_and_gradient(p, k, s, mode);
    auto nll = [&](const ModelParams &q) { return -log_likelihood(q, k, s, mode); };
    auto check = [&](double analytic, const std::function<void(ModelParams &, double)> &shift) {
      auto at = [&](double h) {
        ModelParams q = p;
        shift(q, h);
        return nll(q);
      };
      const double h = 1e-3;
      const double fd = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
      worst = std::max(worst, std::abs(analytic - fd) / std::max(std::abs(fd), 1e-3));
      ++checked;
    };
    check(g.theta1, [](ModelParams &q, double h) { q.theta1 += h; });
    check(g.theta2, [](ModelParams &q, double h) { q.theta2 += h; });
    check(g.alpha1, [](ModelParams &q, double h) { q.alpha1 += h; });
    check(g.alpha2, [](ModelParams &q, double h) { q.alpha2 += h; });
    for (int u = 0; u < n; ++u) {
      check(g.delta[u], [u](ModelParams &q, double h) { q.delta[u] += h; });
      check(g.gamma[u], [u](ModelParams &q, double h) { q.gamma[u] += h; });
      for (int c = 0; c < 2; ++c)
        check(g.z(u, c), [u, c](ModelParams &q, double h) { q.z(u, c) += h; });
    }
  }
  return {worst < 1e-5, fmt("50 instances, %.0f components, max rel err %.2e (< 1e-5)",
                            static_cast<double>(checked), worst)};
}

// Time-rescaled increments of simulated pairs against Exp(1).
Verdict ac4() {
  const KernelSpec k = KernelSpec::uniform({0.1, 1.0, 10.0});
  const PairRates uv_rates{0.5, 0.3, 0.2}, vu_rates{0.5, 0.3, 0.2};
  int passed = 0;
  std::size_t min_events = static_cast<std::size_t>(-1);
  for (std::uint64_t run = 0; run < 20; ++run) {
    std::mt19937_64 rng(mix_seed(1004, run));
    const auto [uv, vu] = simulate_pair(0.5, 0.5, 0.3, 0.2, k, 300.0, rng);
    min_events = std::min(min_events, uv.size() + vu.size());
    std::vector<double> inc = rescaled_increments(uv_rates, k, uv, vu);
    const std::vector<double> other = rescaled_increments(vu_rates, k, vu, uv);
    inc.insert(inc.end(), other.begin(), other.end());
    if (ks_test_exp1(inc).p_value > 0.01) ++passed;
  }
  return {passed >= 18 && min_events >= 500,
          fmt("%.0f/20 runs with p > 0.01 (need 18), fewest events per run %.0f (need 500)",
              passed, static_cast<double>(min_events))};
}

// Fit simulations of the 20-node reference configuration against their truth.
Verdict ac5() {
  std::vector<double> rmse100, rmse3000;
  int accurate = 0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (double horizon : {100.0, 3000.0}) {
      GenConfig g;
      g.horizon = horizon;
      g.seed = seed;
      const ModelParams truth = sample_params(g);
      const EventSequence s = simulate_network(g, truth);
      FitConfig c;
      c.seed = seed;
      const FitResult f = fit(s, g.kernel, c);
      const ModelParams ref = normalize_identifiability(truth);
      const double rmse = procrustes_align(f.params.z, ref.z).rmse;
      if (horizon == 100.0) {
        rmse100.push_back(rmse);
        continue;
      }
      rmse3000.push_back(rmse);
      const double e2 = rel_err(f.params.theta2, ref.theta2);
      const double e_a1 = rel_err(f.params.alpha1, ref.alpha1);
      const double e_a2 = rel_err(f.params.alpha2, ref.alpha2);
      if (e2 <= 0.25 && e_a1 <= 0.25 && e_a2 <= 0.25) ++accurate;
      per_seed << fmt(" [%.2f %.2f %.2f]", e2, e_a1, e_a2);
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  };
  const double m100 = median(rmse100), m3000 = median(rmse3000);
  return {m3000 < m100 && accurate >= 7,
          fmt("median RMSE T=100 %.3f, T=3000 %.3f; ", m100, m3000) +
              fmt("%.0f/10 seeds within 25%% on (theta2, alpha1, alpha2) (need 7); rel errs",
                  accurate) +
              per_seed.str()};
}

Eigen::MatrixXd random_orthogonal(std::mt19937_64 &rng, int d) {
  std::normal_distribution<double> N;
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = N(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
}

// Rotations leave the baselines alone; normalization keeps the likelihood.
Verdict ac6() {
  std::mt19937_64 rng(1006);
  double rot_worst = 0.0, ll_worst = 0.0, shape_worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const int n = 8, d = 1 + i % 3;
    ModelParams p = oracle::random_params(rng, n, d, i % 2 ? -1.0 : 1.0);
    // A slope far from 1, with Z shrunk so the baselines stay in a realistic range.
    const double scale = 1.0 + 3.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    p.theta1 *= scale;
    p.z /= std::sqrt(scale);
    p.z.rowwise() -= p.z.colwise().mean();
    p.delta.array() -= p.delta.mean();
    p.gamma.array() -= p.gamma.mean();
    const Eigen::MatrixXd base = log_baseline_matrix(p);
    for (int r = 0; r < 20; ++r) {
      ModelParams q = p;
      q.z = p.z * random_orthogonal(rng, d);
      rot_worst = std::max(rot_worst, (log_baseline_matrix(q) - base).cwiseAbs().maxCoeff());
    }
    // Normalization from an uncentered, unscaled start.
    ModelParams raw = p;
    raw.z.rowwise() += Eigen::RowVectorXd::Constant(d, 0.8);
    raw.delta.array() += 0.3;
    raw.gamma.array() -= 0.2;
    const KernelSpec k = oracle::random_kernel(rng, 3);
    const EventSequence s = oracle::random_events(rng, n, 150, 30.0);
    const ModelParams m = normalize_identifiability(raw);
    ll_worst = std::max(ll_worst, std::abs(log_likelihood(m, k, s) - log_likelihood(raw, k, s)));
    shape_worst = std::max({shape_worst, std::abs(std::abs(m.theta1) - 1.0),
                            m.z.colwise().mean().cwiseAbs().maxCoeff(), std::abs(m.delta.sum()),
                            std::abs(m.gamma.sum())});
  }
  return {rot_worst < 1e-12 && ll_worst < 1e-10 && shape_worst < 1e-12,
          fmt("rotation max |d log mu| %.1e, normalized |d loglik| %.1e, max centering/scale "
              "residual %.1e",
              rot_worst, ll_worst, shape_worst)};
}

// Rank-based AUC against enumeration; chance level on null data.
Verdict ac7() {
  std::mt19937_64 rng(1007);
  std::uniform_int_distribution<int> level(0, 9), bit(0, 1), size(2, 60);
  int exact = 0;
  for (int i = 0; i < 100; ++i) {
    const int m = size(rng);
    std::vector<double> s(static_cast<std::size_t>(m));
    std::vector<int> l(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
      s[j] = level(rng) / 10.0;
      l[j] = bit(rng);
    }
    l[0] = 1;
    l[1] = 0;
    double wins = 0.0, pairs = 0.0;
    for (std::size_t a = 0; a < s.size(); ++a)
      for (std::size_t b = 0; b < s.size(); ++b)
        if (l[a] == 1 && l[b] == 0) {
          pairs += 1.0;
          wins += s[a] > s[b] ? 1.0 : (s[a] == s[b] ? 0.5 : 0.0);
        }
    if (auc(s, l) == wins / pairs) ++exact;
  }
  ModelParams homogeneous = ModelParams::zeros(20, 2);
  homogeneous.theta2 = std::log(0.02);
  const KernelSpec k = KernelSpec::uniform({1.0});
  const EventSequence s = validate_events(simulate_events(homogeneous, k, 1000.0, 17), 20, 1000.0);
  const ModelParams scorer = oracle::random_params(rng, 20, 2);
  const LinkPredictionResult r = dynamic_link_prediction(scorer, k, s, 500.0, 1000.0, 100, 20.0, 3);
  return {exact == 100 && std::abs(r.mean_auc - 0.5) <= 0.05,
          fmt("%.0f/100 exact, null mean AUC %.4f over %.0f windows", exact, r.mean_auc,
              static_cast<double>(r.points.size() - r.skipped))};
}

// PPC statistic fixtures and the Poisson event count.
Verdict ac8() {
  const PpcStats tri = ppc_stats(std::vector<Event>{{0, 1, 1.0}, {1, 0, 2.0}, {1, 2, 3.0},
                                                    {2, 1, 4.0}, {0, 2, 5.0}, {2, 0, 6.0}},
                                 3);
  const PpcStats path = ppc_stats(std::vector<Event>{{0, 1, 1.0}, {1, 2, 2.0}}, 3);
  const bool fixtures = tri.reciprocity == 1.0 && tri.transitivity == 1.0 &&
                        tri.avg_clustering == 1.0 && tri.mean_degree == 2.0 &&
                        path.reciprocity == 0.0 && path.transitivity == 0.0 &&
                        path.avg_clustering == 0.0 && path.mean_degree == 4.0 / 3.0;
  std::mt19937_64 rng(1008);
  ModelParams p = oracle::random_params(rng, 10, 2);
  p.alpha1 = p.alpha2 = 0.0;
  p.theta2 -= 2.0;
  const double horizon = 50.0;
  double expected = 0.0;
  for (int u = 0; u < 10; ++u)
    for (int v = 0; v < 10; ++v)
      if (u != v) expected += baseline_rate(p, u, v) * horizon;
  const PpcEnsemble e = ppc_ensemble(p, KernelSpec::uniform({1.0}), horizon, 50, 8);
  const double se = std::sqrt(expected / 50.0);
  const double z = (e.mean.event_count - expected) / se;
  return {fixtures && std::abs(z) <= 3.0,
          std::string(fixtures ? "fixtures exact" : "fixtures WRONG") +
              fmt(", mean count %.2f vs %.2f (%.2f standard errors)", e.mean.event_count, expected, z)};
}

// Optional real-data smoke run; never gates.
Verdict ac9(bool &ran) {
  const char *path = std::getenv("LSH_REALITY_EVENTS");
  if (!path || !*path) {
    ran = false;
    return {true, "skipped (set LSH_REALITY_EVENTS to an events CSV to run)"};
  }
  ran = true;
  const char *dur = std::getenv("LSH_REALITY_DURATION");
  const std::string duration = dur && *dur ? dur : "243d";
  const auto dir = std::filesystem::temp_directory_path() / "lsh_acceptance_reality";
  std::filesystem::create_directories(dir);
  const std::string fit = (dir / "fit.json").string(), out = (dir / "results.json").string();
  if (cli::run({"fit", "--events", path, "--dim", "5", "--duration", duration,
                "--train-fraction", "0.7", "--out", fit}) != 0 ||
      cli::run({"eval", "--fit", fit, "--out", out}) != 0)
    return {false, "fit or eval failed on the supplied file"};
  const double ll = read_json(out).at("test_loglik_per_event").get<double>();
  return {std::abs(ll + 3.67) <= 0.75, fmt("test LL per event %.3f (reference -3.67 +- 0.75)", ll)};
}

}  // namespace

int main() {
  struct Criterion {
    const char *name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> gating{
      {"AC1 compensator oracle", ac1},   {"AC2 likelihood recursion", ac2},
      {"AC3 gradient check", ac3},       {"AC4 time-rescaling KS", ac4},
      {"AC5 simulation recovery", ac5},  {"AC6 identifiability", ac6},
      {"AC7 AUC oracle", ac7},           {"AC8 PPC definitions", ac8},
  };
  int failures = 0;
  for (const auto &c : gating) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v{false, ""};
    try {
      v = c.run();
    } catch (const std::exception &e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  bool ran = false;
  Verdict real{false, ""};
  try {
    real = ac9(ran);
  } catch (const std::exception &e) {
    real = {false, std::string("threw: ") + e.what()};
    ran = true;
  }
  std::printf("%s AC9 real-data smoke (informational): %s\n",
              !ran ? "INFO" : (real.pass ? "PASS" : "FAIL"), real.detail.c_str());
  return failures == 0 ? 0 : 1;
}
