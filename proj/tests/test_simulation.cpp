#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "lsh/likelihood.hpp"
#include "lsh/parallel.hpp"
#include "lsh/simulation.hpp"
#include "support/errors.hpp"

using namespace lsh;
using lsh::testing::error_kind;

namespace {

struct Moments {
  double mean;
  double var;
};

Moments moments(const std::vector<double> &x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, ss / (n - 1.0)};
}

}  // namespace

TEST(SampleParams, DeterministicWithExpectedMoments) {
  GenConfig g;
  g.seed = 12;
  const ModelParams a = sample_params(g);
  const ModelParams b = sample_params(g);
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(a.delta, b.delta);
  std::vector<double> z(a.z.data(), a.z.data() + a.z.size());
  const Moments m = moments(z);
  const double tol = 4.0 / std::sqrt(40.0);
  EXPECT_LT(std::abs(m.mean), tol);
  EXPECT_LT(std::abs(m.var - 1.0), tol);
  EXPECT_EQ(a.theta1, 1.0);
  EXPECT_EQ(a.theta2, -3.2);
}

TEST(SampleParams, SlopeAbsorptionKeepsBaselines) {
  GenConfig g;
  g.seed = 5;
  const ModelParams raw = sample_params(g);  // theta1 = 1: nothing absorbed
  g.theta1 = 4.0;
  const ModelParams absorbed = sample_params(g);
  EXPECT_EQ(absorbed.theta1, 1.0);
  EXPECT_TRUE(absorbed.z.isApprox(2.0 * raw.z, 1e-15));
  ModelParams unabsorbed = raw;
  unabsorbed.theta1 = 4.0;
  const Eigen::MatrixXd a = log_baseline_matrix(unabsorbed), b = log_baseline_matrix(absorbed);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);

  g.theta1 = -9.0;
  const ModelParams neg = sample_params(g);
  EXPECT_EQ(neg.theta1, -1.0);
  EXPECT_TRUE(neg.z.isApprox(3.0 * raw.z, 1e-15));
}

TEST(SimulatePair, EmptyOnZeroHorizon) {
  std::mt19937_64 rng(1);
  const auto [uv, vu] = simulate_pair(0.5, 0.5, 0.3, 0.2, KernelSpec::uniform({1.0}), 0.0, rng);
  EXPECT_TRUE(uv.empty());
  EXPECT_TRUE(vu.empty());
}

TEST(SimulatePair, PoissonCountsHaveMeanAndVarianceMuT) {
  const KernelSpec k = KernelSpec::uniform({1.0});
  std::vector<double> counts;
  for (std::uint64_t run = 0; run < 200; ++run) {
    std::mt19937_64 rng(mix_seed(101, run));
    const auto [uv, vu] = simulate_pair(0.5, 0.5, 0.0, 0.0, k, 100.0, rng);
    counts.push_back(static_cast<double>(uv.size()));
    counts.push_back(static_cast<double>(vu.size()));
    for (double t : uv) {
      EXPECT_GT(t, 0.0);
      EXPECT_LE(t, 100.0);
    }
  }
  const Moments m = moments(counts);
  EXPECT_LT(std::abs(m.mean - 50.0), 3.0 * std::sqrt(50.0 / 400.0));
  // Dispersion index of a Poisson sample: var/mean ~ 1 with sd sqrt(2/(N-1)).
  EXPECT_LT(std::abs(m.var / m.mean - 1.0), 4.0 * std::sqrt(2.0 / 399.0));
}

TEST(SimulatePair, SelfExcitingMeanCount) {
  // E N(T) = mu T / (1 - a) - mu a (1 - exp(-beta (1 - a) T)) / (beta (1 - a)^2).
  const double mu = 0.5, a = 0.5, beta = 1.0, T = 100.0;
  const double expected =
      mu * T / (1.0 - a) - mu * a * (1.0 - std::exp(-beta * (1.0 - a) * T)) / (beta * (1.0 - a) * (1.0 - a));
  const double variance = mu * T / std::pow(1.0 - a, 3);  // asymptotic count variance
  const KernelSpec k = KernelSpec::uniform({beta});
  std::vector<double> counts;
  for (std::uint64_t run = 0; run < 200; ++run) {
    std::mt19937_64 rng(mix_seed(202, run));
    const auto [uv, vu] = simulate_pair(mu, mu, a, 0.0, k, T, rng);
    counts.push_back(static_cast<double>(uv.size()));
    counts.push_back(static_cast<double>(vu.size()));
  }
  EXPECT_LT(std::abs(moments(counts).mean - expected), 3.0 * std::sqrt(variance / 400.0));
}

TEST(SimulatePair, CrossExcitationRaisesBothDirections) {
  // Symmetric pair: each direction has mean mu T / (1 - a1 - a2) in the long run.
  const KernelSpec k = KernelSpec::uniform({2.0});
  double total = 0.0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    std::mt19937_64 rng(mix_seed(303, run));
    const auto [uv, vu] = simulate_pair(0.2, 0.2, 0.1, 0.4, k, 500.0, rng);
    total += static_cast<double>(uv.size() + vu.size());
  }
  const double mean_per_direction = total / 200.0;
  EXPECT_NEAR(mean_per_direction, 0.2 * 500.0 / 0.5, 0.2 * 500.0 / 0.5 * 0.05);
}

TEST(SimulatePair, UnstableProcessIsCapped) {
  std::mt19937_64 rng(4);
  EXPECT_EQ(error_kind([&] {
              simulate_pair(1.0, 1.0, 1.2, 0.3, KernelSpec::uniform({1.0}), 1e6, rng, 5000);
            }),
            ErrorKind::UnstableProcess);
}

TEST(SimulateNetwork, TwoNodesMatchOnePairCall) {
  GenConfig g;
  g.n_nodes = 2;
  g.horizon = 200.0;
  g.theta2 = -1.0;
  g.alpha1 = 0.3;
  g.alpha2 = 0.2;
  g.seed = 77;
  ModelParams p = ModelParams::zeros(2, 2);
  p.z(1, 0) = 0.5;
  p.theta2 = -1.0;
  p.delta << 0.2, -0.1;
  p.alpha1 = 0.3;
  p.alpha2 = 0.2;
  const EventSequence s = simulate_network(g, p);
  std::mt19937_64 rng(mix_seed(77, 1 + 0 * 2 + 1));
  const auto [uv, vu] = simulate_pair(baseline_rate(p, 0, 1), baseline_rate(p, 1, 0), 0.3, 0.2,
                                      g.kernel, 200.0, rng);
  const PairHistory h(s);
  EXPECT_EQ(std::vector<double>(h.times(0, 1).begin(), h.times(0, 1).end()), uv);
  EXPECT_EQ(std::vector<double>(h.times(1, 0).begin(), h.times(1, 0).end()), vu);
  EXPECT_EQ(s.horizon(), 200.0);
}

TEST(SimulateNetwork, DefaultSettingIsDeterministicAndThreadIndependent) {
  GenConfig g;
  g.seed = 3;
  set_thread_count(1);
  const EventSequence a = simulate_network(g);
  set_thread_count(3);
  const EventSequence b = simulate_network(g);
  set_thread_count(0);
  ASSERT_GT(a.size(), 0u);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  for (const Event &e : a.events()) EXPECT_LE(e.time, 100.0);
}

TEST(SimulateNetwork, CountsTrackTheCompensator) {
  GenConfig g;
  g.n_nodes = 6;
  g.horizon = 400.0;
  g.theta2 = -1.5;
  g.alpha1 = 0.3;
  g.alpha2 = 0.3;
  g.seed = 8;
  const ModelParams p = sample_params(g);
  const EventSequence s = simulate_network(g, p);
  const PairHistory h(s);
  double count = 0.0, expected = 0.0;
  for (int u = 0; u < 6; ++u)
    for (int v = 0; v < 6; ++v) {
      if (u == v) continue;
      const PairRates r = pair_rates(p, u, v);
      count += static_cast<double>(h.times(u, v).size());
      expected += compensator(r, g.kernel, h.times(u, v), h.times(v, u), 400.0);
    }
  // Total count minus total compensator is a martingale with variance ~ count.
  EXPECT_LT(std::abs(count - expected), 4.0 * std::sqrt(expected));
}

TEST(GenConfig, Validation) {
  GenConfig g;
  g.sigma_z = 0.0;
  EXPECT_EQ(error_kind([&] { g.validate(); }), ErrorKind::InvalidArgument);
  g = GenConfig{};
  g.horizon = -1.0;
  EXPECT_EQ(error_kind([&] { g.validate(); }), ErrorKind::InvalidArgument);
}
