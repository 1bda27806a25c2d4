#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "caislab/quantile.hpp"

using namespace caislab;

TEST_CASE("quantile levels are the fixed symmetric grid") {
  const auto& taus = quantile_levels();
  REQUIRE(taus.size() == 49);
  CHECK(taus.front() == Catch::Approx(0.02).epsilon(1e-14));
  CHECK(taus.back() == Catch::Approx(0.98).epsilon(1e-14));
  CHECK(taus[24] == Catch::Approx(0.5).epsilon(1e-14));
  for (int i = 1; i < kNumQuantiles; ++i) {
    CHECK(taus[i] > taus[i - 1]);
    CHECK(taus[i] - taus[i - 1] == Catch::Approx(0.02).epsilon(1e-12));
  }
  // Symmetry about 0.5 makes the grid mean exactly 0.5.
  double mean = 0.0;
  for (double t : taus) mean += t;
  CHECK(mean / kNumQuantiles == Catch::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("quantile huber loss hand values") {
  // Quadratic branch: |0.5 - 0| weight... tau = 0.5, u = +0.5 inside kappa:
  // 0.5 * 0.5 * 0.25 = 0.0625.
  CHECK(quantile_huber_loss(0.5, 0.5, 1.0) == Catch::Approx(0.0625).margin(1e-15));
  // Linear branch: u = -2 (below), weight |0.25 - 1| = 0.75, huber = 1.5.
  CHECK(quantile_huber_loss(-2.0, 0.25, 1.0) == Catch::Approx(1.125).margin(1e-15));
  // Zero residual, zero loss.
  CHECK(quantile_huber_loss(0.0, 0.3, 1.0) == 0.0);
}

TEST_CASE("quantile huber loss is continuous at the kappa boundary") {
  for (double tau : {0.1, 0.5, 0.9}) {
    double below = quantile_huber_loss(0.999999, tau, 1.0);
    double above = quantile_huber_loss(1.000001, tau, 1.0);
    CHECK(std::abs(below - above) < 1e-5);
  }
}

TEST_CASE("quantile huber gradient matches finite differences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uu(-3.0, 3.0);
  std::uniform_real_distribution<double> ut(0.02, 0.98);
  const double h = 1e-7;
  int checked = 0;
  for (int k = 0; k < 500; ++k) {
    double y = uu(rng), q = uu(rng), tau = ut(rng), kappa = 1.0;
    double u = y - q;
    // Skip the two kinks where the derivative is undefined.
    if (std::abs(u) < 1e-4 || std::abs(std::abs(u) - kappa) < 1e-4) continue;
    double fd = (quantile_huber_loss(y - (q + h), tau, kappa) -
                 quantile_huber_loss(y - (q - h), tau, kappa)) /
                (2.0 * h);
    double an = quantile_huber_grad(u, tau, kappa);
    CHECK(fd == Catch::Approx(an).margin(1e-5));
    ++checked;
  }
  REQUIRE(checked > 400);
}

TEST_CASE("gradient sign drives the pinball asymmetry") {
  // Prediction below target: gradient must push q up (negative d/dq).
  CHECK(quantile_huber_grad(0.5, 0.9, 1.0) < 0.0);
  // Prediction above target: push q down.
  CHECK(quantile_huber_grad(-0.5, 0.9, 1.0) > 0.0);
  // High tau weights under-prediction more than over-prediction.
  CHECK(std::abs(quantile_huber_grad(0.5, 0.9, 1.0)) >
        std::abs(quantile_huber_grad(-0.5, 0.9, 1.0)));
}

TEST_CASE("wasserstein1 analytic cases") {
  const auto& taus = quantile_levels();
  QuantileTable a, shifted, u1, u2;
  for (int i = 0; i < kNumQuantiles; ++i) {
    a.values[i] = taus[i];
    shifted.values[i] = taus[i] + 0.7;
    u1.values[i] = taus[i];        // exact quantiles of U[0,1]
    u2.values[i] = 2.0 * taus[i];  // exact quantiles of U[0,2]
  }
  CHECK(wasserstein1(a, a) == 0.0);
  CHECK(wasserstein1(a, shifted) == Catch::Approx(0.7).margin(1e-12));
  CHECK(wasserstein1(u1, u2) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("wasserstein1 is a metric on tables") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  auto random_table = [&] {
    QuantileTable t;
    for (double& v : t.values) v = u(rng);
    t.project_monotone();
    return t;
  };
  for (int k = 0; k < 50; ++k) {
    QuantileTable x = random_table(), y = random_table(), z = random_table();
    double xy = wasserstein1(x, y), yx = wasserstein1(y, x);
    CHECK(xy == Catch::Approx(yx).margin(1e-14));        // symmetry
    CHECK(xy >= 0.0);                                    // non-negativity
    CHECK(wasserstein1(x, x) == 0.0);                    // identity
    CHECK(wasserstein1(x, z) <= xy + wasserstein1(y, z) + 1e-12);  // triangle
  }
}

TEST_CASE("monotone projection sorts and preserves multiset") {
  QuantileTable t;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (double& v : t.values) v = u(rng);
  QuantileTable before = t;
  t.project_monotone();
  CHECK(t.is_monotone());
  std::sort(before.values.begin(), before.values.end());
  for (int i = 0; i < kNumQuantiles; ++i) CHECK(t.values[i] == before.values[i]);
}

TEST_CASE("table mean is the average of values") {
  QuantileTable t;
  for (int i = 0; i < kNumQuantiles; ++i) t.values[i] = i;
  CHECK(t.mean() == Catch::Approx(24.0).epsilon(1e-14));
}
