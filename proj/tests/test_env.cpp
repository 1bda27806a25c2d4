#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "caislab/env.hpp"

using namespace caislab;

namespace {

ActionVector all(ActionValue v) {
  ActionVector a;
  a.fill(v);
  return a;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

double mechanical_energy(const Environment& env) {
  const EnvConfig& c = env.config();
  double e = 0.0;
  for (const JointState& j : env.joints())
    e += 0.5 * c.joint_inertia * j.angular_velocity * j.angular_velocity +
         0.5 * c.joint_stiffness * j.angle * j.angle;
  const MobileState& m = env.mobile();
  for (int k = 0; k < 3; ++k)
    e += 0.5 * c.mobile_mass * m.velocity[k] * m.velocity[k] +
         0.5 * c.anchor_stiffness * m.position[k] * m.position[k];
  return e;
}

}  // namespace

TEST_CASE("reset gives zero state and zero proprio") {
  Environment env(EnvConfig{}, 42);
  for (const JointState& j : env.joints()) {
    CHECK(j.angle == 0.0);
    CHECK(j.angular_velocity == 0.0);
  }
  for (double p : env.initial_observation().proprio) CHECK(p == 0.0);
  REQUIRE(env.initial_observation().latent.size() == 64);
}

TEST_CASE("same seed, same trajectory, bit for bit") {
  EnvConfig cfg;
  cfg.condition = Condition::kNoisyMobile;
  Environment a(cfg, 7), b(cfg, 7);
  ActionVector act = all(ActionValue::kNoTorque);
  act[3] = ActionValue::kMove;
  for (int s = 0; s < 20; ++s) {
    StepOutcome oa = a.step(act, s > 5);
    StepOutcome ob = b.step(act, s > 5);
    CHECK(oa.mobile_path_length == ob.mobile_path_length);
    for (int j = 0; j < kNumJoints; ++j) {
      CHECK(oa.observation.proprio[j] == ob.observation.proprio[j]);
      CHECK(oa.torque_signs[j] == ob.torque_signs[j]);
    }
    for (int d = 0; d < cfg.latent_dim; ++d)
      CHECK(oa.observation.latent[d] == ob.observation.latent[d]);
  }
}

TEST_CASE("different seeds decorrelate the trajectory") {
  Environment a(EnvConfig{}, 1), b(EnvConfig{}, 2);
  ActionVector act = all(ActionValue::kMove);
  StepOutcome oa = a.step(act, false);
  StepOutcome ob = b.step(act, false);
  int same = 0;
  for (int j = 0; j < kNumJoints; ++j)
    if (oa.observation.proprio[j] == ob.observation.proprio[j]) ++same;
  CHECK(same < kNumJoints);
}

TEST_CASE("joint angles respect the clamp") {
  EnvConfig cfg;
  cfg.max_torque = 50.0;  // force saturation
  Environment env(cfg, 3);
  ActionVector act = all(ActionValue::kMove);
  for (int s = 0; s < 30; ++s) {
    env.step(act, false);
    for (const JointState& j : env.joints()) {
      CHECK(j.angle <= cfg.angle_limit + 1e-12);
      CHECK(j.angle >= -cfg.angle_limit - 1e-12);
    }
  }
}

TEST_CASE("idle free system dissipates mechanical energy") {
  EnvConfig cfg;
  Environment env(cfg, 9);
  // Excite everything first.
  ActionVector move = all(ActionValue::kMove);
  for (int s = 0; s < 5; ++s) env.step(move, true);
  // Then let it ring down with no torque, no tether, no noise.
  ActionVector rest = all(ActionValue::kNoTorque);
  double prev = mechanical_energy(env);
  for (int s = 0; s < 40; ++s) {
    env.step(rest, false);
    double e = mechanical_energy(env);
    CHECK(e <= prev + 1e-12);
    prev = e;
  }
  CHECK(prev < 1e-3);  // nearly settled
}

TEST_CASE("tether moves the mobile only when attached and the limb moves") {
  EnvConfig cfg;
  Environment env(cfg, 5);

  // Unattached: moving the limb does nothing to the mobile.
  ActionVector act = all(ActionValue::kNoTorque);
  for (int j : limb_joints(cfg.attached_limb)) act[j] = ActionValue::kMove;
  StepOutcome out = env.step(act, false);
  CHECK(out.mobile_path_length == 0.0);

  // Attached: the same action yanks it.
  StepOutcome out2 = env.step(act, true);
  CHECK(out2.mobile_path_length > 0.01);

  // Attached but moving only non-limb joints: still nothing.
  Environment env2(cfg, 5);
  ActionVector other = all(ActionValue::kMove);
  for (int j : limb_joints(cfg.attached_limb)) other[j] = ActionValue::kNoTorque;
  StepOutcome out3 = env2.step(other, true);
  CHECK(out3.mobile_path_length == 0.0);
}

TEST_CASE("tether force points along the limb direction") {
  EnvConfig cfg;
  cfg.observation_noise_std = 0.0;
  Environment env(cfg, 21);
  auto dir = env.tether_direction();
  ActionVector act = all(ActionValue::kNoTorque);
  for (int j : limb_joints(cfg.attached_limb)) act[j] = ActionValue::kMove;
  env.step(act, true);
  const MobileState& m = env.mobile();
  double norm = std::sqrt(m.position[0] * m.position[0] +
                          m.position[1] * m.position[1] +
                          m.position[2] * m.position[2]);
  REQUIRE(norm > 0.0);
  double cosine = (m.position[0] * dir[0] + m.position[1] * dir[1] +
                   m.position[2] * dir[2]) /
                  norm;
  // The yank is rectified, so displacement lines up with the tether direction.
  CHECK(cosine > 0.99);
}

TEST_CASE("noise keeps the mobile moving with an idle body") {
  EnvConfig cfg;
  cfg.condition = Condition::kNoisyMobile;
  Environment env(cfg, 13);
  ActionVector rest = all(ActionValue::kNoTorque);
  double total = 0.0;
  for (int s = 0; s < 10; ++s) total += env.step(rest, false).mobile_path_length;
  CHECK(total > 0.1);
}

TEST_CASE("limb moves out-pull non-limb moves by the calibration factor") {
  // Calibration property for the default constants: the contingency has to be
  // at least this lopsided or the learning claims downstream lose meaning.
  constexpr double kFactor = 5.0;
  EnvConfig cfg;
  Environment limb_env(cfg, 31), other_env(cfg, 31);
  ActionVector limb_act = all(ActionValue::kNoTorque);
  for (int j : limb_joints(cfg.attached_limb)) limb_act[j] = ActionValue::kMove;
  ActionVector other_act = all(ActionValue::kMove);
  for (int j : limb_joints(cfg.attached_limb)) other_act[j] = ActionValue::kNoTorque;
  double limb_path = 0.0, other_path = 0.0;
  for (int s = 0; s < 200; ++s) {
    limb_path += limb_env.step(limb_act, true).mobile_path_length;
    other_path += other_env.step(other_act, true).mobile_path_length;
  }
  CHECK(limb_path > 0.0);
  CHECK(limb_path >= kFactor * other_path);
}

TEST_CASE("noisy drift swamps the tether under default constants") {
  // What makes the confound a confound: an idle body in the noisy condition
  // out-moves the mobile of a free-condition agent pulling the tether.
  EnvConfig free_cfg;
  EnvConfig noisy_cfg;
  noisy_cfg.condition = Condition::kNoisyMobile;
  Environment tether_env(free_cfg, 23), noisy_env(noisy_cfg, 23);
  ActionVector pull = all(ActionValue::kNoTorque);
  for (int j : limb_joints(free_cfg.attached_limb)) pull[j] = ActionValue::kMove;
  ActionVector rest = all(ActionValue::kNoTorque);
  std::vector<double> tether_path, noisy_path;
  for (int s = 0; s < 200; ++s) {
    tether_path.push_back(tether_env.step(pull, true).mobile_path_length);
    noisy_path.push_back(noisy_env.step(rest, false).mobile_path_length);
  }
  CHECK(median(noisy_path) > median(tether_path));
}

TEST_CASE("latent observer is linear when read noise is off") {
  EnvConfig cfg;
  cfg.observation_noise_std = 0.0;
  Environment env(cfg, 17);
  MobileState a, b;
  a.position = {0.3, -0.2, 0.5};
  a.velocity = {1.0, 0.0, -0.5};
  b.position = {-0.1, 0.4, 0.2};
  b.velocity = {0.0, 2.0, 0.3};
  auto za = env.latent_observe(a);
  auto zb = env.latent_observe(b);
  MobileState sum;
  for (int k = 0; k < 3; ++k) {
    sum.position[k] = a.position[k] + b.position[k];
    sum.velocity[k] = a.velocity[k] + b.velocity[k];
  }
  auto zsum = env.latent_observe(sum);
  for (int d = 0; d < cfg.latent_dim; ++d)
    CHECK(zsum[d] == Catch::Approx(za[d] + zb[d]).margin(1e-12));
}

TEST_CASE("latent read noise has the configured scale") {
  EnvConfig cfg;
  Environment env(cfg, 19);
  MobileState zero;
  double ss = 0.0;
  int n = 0;
  for (int k = 0; k < 200; ++k) {
    auto z = env.latent_observe(zero);
    for (double v : z) {
      ss += v * v;
      ++n;
    }
  }
  double std_est = std::sqrt(ss / n);
  CHECK(std_est == Catch::Approx(cfg.observation_noise_std).epsilon(0.05));
}

TEST_CASE("torque signs are drawn for all joints every step") {
  Environment env(EnvConfig{}, 23);
  ActionVector rest = all(ActionValue::kNoTorque);
  int plus = 0, minus = 0;
  for (int s = 0; s < 200; ++s) {
    StepOutcome out = env.step(rest, false);
    for (int sign : out.torque_signs) {
      REQUIRE((sign == 1 || sign == -1));
      (sign == 1 ? plus : minus) += 1;
    }
  }
  // Roughly balanced coin flips.
  CHECK(plus > 1000);
  CHECK(minus > 1000);
}

TEST_CASE("config validation names the offending field") {
  EnvConfig cfg;
  cfg.mobile_mass = 0.0;
  try {
    Environment env(cfg, 0);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("mobile_mass") != std::string::npos);
  }
  EnvConfig cfg2;
  cfg2.action_substeps = 500;  // above substeps_per_step
  CHECK_THROWS_AS(Environment(cfg2, 0), ConfigError);
}

TEST_CASE("latent checkpoints accumulate an intra-step path") {
  EnvConfig cfg;
  cfg.latent_checkpoint_substeps = 10;
  cfg.observation_noise_std = 0.0;
  Environment env(cfg, 29);
  ActionVector act = all(ActionValue::kNoTorque);
  for (int j : limb_joints(cfg.attached_limb)) act[j] = ActionValue::kMove;
  StepOutcome out = env.step(act, true);
  // Path over checkpoints is at least the end-to-end displacement.
  double d2 = 0.0;
  for (int d = 0; d < cfg.latent_dim; ++d) {
    double diff = out.observation.latent[d] - env.initial_observation().latent[d];
    d2 += diff * diff;
  }
  CHECK(out.latent_path_length >= std::sqrt(d2) - 1e-9);
  CHECK(out.latent_path_length > 0.0);
}
