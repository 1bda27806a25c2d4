#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "caislab/outcome_model.hpp"

using namespace caislab;

namespace {

ActionVector rest() {
  ActionVector a;
  a.fill(ActionValue::kNoTorque);
  return a;
}

}  // namespace

TEST_CASE("fresh bank has zero influence everywhere") {
  OutcomeModelBank bank(8, AdamWConfig{}, 1.0);
  for (int j = 0; j < kNumJoints; ++j) {
    CHECK(bank.cais(j, ActionValue::kNoTorque) == 0.0);
    CHECK(bank.cais(j, ActionValue::kMove) == 0.0);
  }
  CHECK(bank.update_count() == 0);
}

TEST_CASE("baseline quantiles converge to U(0,1) levels in the pinball regime") {
  // kappa well below the data scale keeps the loss in its linear (pinball)
  // regime, where minimizers are true quantiles.
  OutcomeModelBank bank(1, AdamWConfig{}, 0.01);
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ActionVector a = rest();
  std::vector<double> y(1);
  for (int k = 0; k < 50000; ++k) {
    y[0] = u(rng);
    bank.update(a, y);
  }
  QuantileTable t = bank.baseline(0);
  const auto& taus = quantile_levels();
  double max_err = 0.0;
  for (int i = 0; i < kNumQuantiles; ++i)
    max_err = std::max(max_err, std::abs(t.values[i] - taus[i]));
  CHECK(max_err < 0.05);
  CHECK(t.is_monotone());
}

TEST_CASE("baseline at default kappa lands on the analytic expectile curve") {
  // kappa=1 over unit-scale data puts the loss in its quadratic regime, whose
  // minimizers are expectiles: for U(0,1), sqrt(t)/(sqrt(t)+sqrt(1-t)).
  OutcomeModelBank bank(1, AdamWConfig{}, 1.0);
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ActionVector a = rest();
  std::vector<double> y(1);
  for (int k = 0; k < 50000; ++k) {
    y[0] = u(rng);
    bank.update(a, y);
  }
  QuantileTable t = bank.baseline(0);
  const auto& taus = quantile_levels();
  double max_err = 0.0;
  for (int i = 0; i < kNumQuantiles; ++i) {
    double st = std::sqrt(taus[i]);
    double s1 = std::sqrt(1.0 - taus[i]);
    max_err = std::max(max_err, std::abs(t.values[i] - st / (st + s1)));
  }
  CHECK(max_err < 0.05);
}

TEST_CASE("gaussian median lands near the mean") {
  OutcomeModelBank bank(1, AdamWConfig{}, 0.01);
  std::mt19937_64 rng(103);
  std::normal_distribution<double> g(1.0, 0.5);
  ActionVector a = rest();
  std::vector<double> y(1);
  for (int k = 0; k < 50000; ++k) {
    y[0] = g(rng);
    bank.update(a, y);
  }
  CHECK(std::abs(bank.baseline(0).values[kNumQuantiles / 2] - 1.0) < 0.05);
}

TEST_CASE("constant stream pins every quantile to the constant") {
  OutcomeModelBank bank(2, AdamWConfig{}, 1.0);
  ActionVector a = rest();
  std::vector<double> y{3.25, -0.5};
  for (int k = 0; k < 20000; ++k) bank.update(a, y);
  for (int d = 0; d < 2; ++d) {
    double c = y[d];
    QuantileTable base = bank.baseline(d);
    QuantileTable cond = bank.conditional(0, ActionValue::kNoTorque, d);
    for (int i = 0; i < kNumQuantiles; ++i) {
      CHECK(std::abs(base.values[i] - c) < 0.01);
      CHECK(std::abs(cond.values[i] - c) < 0.01);
    }
  }
}

TEST_CASE("cais separates a joint that shifts the outcome") {
  // Joint 2 MOVE shifts the outcome mean by 1; everything else is noise.
  OutcomeModelBank bank(4, AdamWConfig{}, 1.0);
  std::mt19937_64 rng(107);
  std::normal_distribution<double> g(0.0, 0.3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> y(4);
  for (int k = 0; k < 30000; ++k) {
    ActionVector a;
    for (int j = 0; j < kNumJoints; ++j)
      a[j] = u(rng) < 0.5 ? ActionValue::kMove : ActionValue::kNoTorque;
    double shift = a[2] == ActionValue::kMove ? 1.0 : 0.0;
    for (int d = 0; d < 4; ++d) y[d] = shift + g(rng);
    bank.update(a, y);
  }
  double influential = bank.cais(2, ActionValue::kMove);
  // W1(p(y|move), p(y)) = (1 - 0.5) * 1 for a half-half mixture of
  // translated distributions.
  CHECK(influential == Catch::Approx(0.5).margin(0.1));
  double max_other = 0.0;
  for (int j = 0; j < kNumJoints; ++j) {
    if (j == 2) continue;
    max_other = std::max(max_other, bank.cais(j, ActionValue::kMove));
    max_other = std::max(max_other, bank.cais(j, ActionValue::kNoTorque));
  }
  CHECK(influential > 5.0 * max_other);
}

TEST_CASE("conditional tables train only when their value is taken") {
  OutcomeModelBank bank(1, AdamWConfig{}, 1.0);
  ActionVector a = rest();
  a[0] = ActionValue::kMove;
  std::vector<double> y{2.0};
  for (int k = 0; k < 100; ++k) bank.update(a, y);
  // Joint 0 never rested, so its NO_TORQUE table is untouched.
  QuantileTable never = bank.conditional(0, ActionValue::kNoTorque, 0);
  for (double v : never.values) CHECK(v == 0.0);
  QuantileTable moved = bank.conditional(0, ActionValue::kMove, 0);
  CHECK(moved.values[kNumQuantiles / 2] > 0.05);
  CHECK(bank.update_count() == 100);
}

TEST_CASE("expected outcome composes baseline and conditional shifts") {
  OutcomeModelBank bank(2, AdamWConfig{.lr = 0.01}, 1.0);
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> y(2);
  // Outcome is 1.0 when joint 5 moves, else 0.0, on both dims.
  for (int k = 0; k < 20000; ++k) {
    ActionVector a;
    for (int j = 0; j < kNumJoints; ++j)
      a[j] = u(rng) < 0.5 ? ActionValue::kMove : ActionValue::kNoTorque;
    double v = a[5] == ActionValue::kMove ? 1.0 : 0.0;
    y[0] = v;
    y[1] = v;
    bank.update(a, y);
  }
  ActionVector probe = rest();
  probe[5] = ActionValue::kMove;
  std::vector<double> when_moving = bank.expected_outcome(probe);
  std::vector<double> when_resting = bank.expected_outcome(rest());
  // Moving joint 5 must predict roughly the +1 shift relative to resting it.
  CHECK(when_moving[0] - when_resting[0] == Catch::Approx(1.0).margin(0.2));
}

TEST_CASE("surprise hand value and contract") {
  std::vector<double> e(64, 0.0), a(64, 0.0);
  a[0] = 1.0;
  CHECK(surprise(e, a) == Catch::Approx(0.125).margin(1e-15));
  std::vector<double> wrong(3, 0.0);
  CHECK_THROWS_AS(surprise(e, wrong), ContractViolation);
}

TEST_CASE("update rejects mismatched outcome size") {
  OutcomeModelBank bank(8, AdamWConfig{}, 1.0);
  std::vector<double> y(3, 0.0);
  CHECK_THROWS_AS(bank.update(rest(), y), ContractViolation);
}

TEST_CASE("dump emits one row per table entry") {
  OutcomeModelBank bank(2, AdamWConfig{}, 1.0);
  std::ostringstream os;
  bank.dump(os);
  int lines = 0;
  std::string line;
  std::istringstream is(os.str());
  while (std::getline(is, line)) ++lines;
  CHECK(lines == 1 + (1 + 24) * 2 * kNumQuantiles);
}
