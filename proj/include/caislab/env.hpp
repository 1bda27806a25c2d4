#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "caislab/errors.hpp"
#include "caislab/rng.hpp"

namespace caislab {

inline constexpr int kNumJoints = 12;

enum class ActionValue { kNoTorque = 0, kMove = 1 };
using ActionVector = std::array<ActionValue, kNumJoints>;

// Actuated joints, one hinge each. Indices are fixed and are the public
// identity of a joint everywhere (CSV columns, CAIS scores, Q-value slots).
enum class Joint : int {
  kRightShoulder1 = 0,
  kRightShoulder2 = 1,
  kLeftShoulder1 = 2,
  kLeftShoulder2 = 3,
  kRightElbow = 4,
  kLeftElbow = 5,
  kRightHip1 = 6,
  kRightHip2 = 7,
  kLeftHip1 = 8,
  kLeftHip2 = 9,
  kRightKnee = 10,
  kLeftKnee = 11,
};

inline const char* joint_name(int j) {
  static const char* names[kNumJoints] = {
      "right_shoulder1", "right_shoulder2", "left_shoulder1", "left_shoulder2",
      "right_elbow",     "left_elbow",      "right_hip1",     "right_hip2",
      "left_hip1",       "left_hip2",       "right_knee",     "left_knee"};
  if (j < 0 || j >= kNumJoints) throw ContractViolation("joint index out of range");
  return names[j];
}

enum class Limb { kRightArm = 0, kLeftArm = 1, kRightLeg = 2, kLeftLeg = 3 };

inline std::array<int, 3> limb_joints(Limb limb) {
  switch (limb) {
    case Limb::kRightArm: return {0, 1, 4};
    case Limb::kLeftArm: return {2, 3, 5};
    case Limb::kRightLeg: return {6, 7, 10};
    case Limb::kLeftLeg: return {8, 9, 11};
  }
  throw ContractViolation("invalid limb");
}

inline const char* limb_name(Limb limb) {
  switch (limb) {
    case Limb::kRightArm: return "right_arm";
    case Limb::kLeftArm: return "left_arm";
    case Limb::kRightLeg: return "right_leg";
    case Limb::kLeftLeg: return "left_leg";
  }
  throw ContractViolation("invalid limb");
}

enum class Condition { kFreeMobile = 0, kNoisyMobile = 1 };

struct EnvConfig {
  Condition condition = Condition::kFreeMobile;

  // Joint dynamics: damped torsional springs, semi-implicit Euler. The
  // damping is high enough that a one-step torque pulse mostly settles
  // within the step that applied it, so consecutive steps stay close to
  // independent trials of the action.
  double joint_inertia = 1.0;
  double joint_damping = 4.0;
  double joint_stiffness = 1.0;
  double max_torque = 1.5;
  double angle_limit = 1.5;

  // Mobile: anchored point mass in 3D. tether_gain and noise_force_magnitude
  // between them fix the signal-to-confound ratio of the whole lab: the
  // tether must dominate in the free condition and drown in the noisy one.
  double mobile_mass = 0.5;
  double mobile_damping = 3.0;
  double anchor_stiffness = 5.0;
  double tether_gain = 22.0;
  double noise_force_magnitude = 44.0;  // noisy condition only

  Limb attached_limb = Limb::kLeftLeg;

  // Integration: each agent step is substeps_per_step substeps of substep_dt
  // seconds; action torque is applied for the first action_substeps of them.
  double substep_dt = 0.005;
  int substeps_per_step = 120;
  int action_substeps = 40;

  // Latent observation of the mobile. The sensor noise is kept well below
  // the smallest motion signal of interest; it accumulates across latent
  // dimensions and, for path-style readings, across checkpoints, so even a
  // modest per-feature level can bury a real displacement.
  int latent_dim = 64;
  double observation_noise_std = 0.002;

  // When positive, the mobile's latent is also sampled every this many
  // substeps and the summed segment length is reported per step.
  int latent_checkpoint_substeps = 0;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0)) throw ConfigError(std::string("env.") + name + " must be positive");
    };
    positive(joint_inertia, "joint_inertia");
    positive(joint_damping, "joint_damping");
    positive(joint_stiffness, "joint_stiffness");
    positive(max_torque, "max_torque");
    positive(angle_limit, "angle_limit");
    positive(mobile_mass, "mobile_mass");
    positive(mobile_damping, "mobile_damping");
    positive(anchor_stiffness, "anchor_stiffness");
    positive(tether_gain, "tether_gain");
    if (noise_force_magnitude < 0.0)
      throw ConfigError("env.noise_force_magnitude must be non-negative");
    positive(substep_dt, "substep_dt");
    if (substeps_per_step <= 0)
      throw ConfigError("env.substeps_per_step must be positive");
    if (action_substeps <= 0 || action_substeps > substeps_per_step)
      throw ConfigError("env.action_substeps must be in [1, substeps_per_step]");
    if (latent_dim <= 0) throw ConfigError("env.latent_dim must be positive");
    if (observation_noise_std < 0.0)
      throw ConfigError("env.observation_noise_std must be non-negative");
    if (latent_checkpoint_substeps < 0)
      throw ConfigError("env.latent_checkpoint_substeps must be non-negative");
  }
};

struct JointState {
  double angle = 0.0;
  double angular_velocity = 0.0;
};

struct MobileState {
  std::array<double, 3> position{};
  std::array<double, 3> velocity{};
};

struct Observation {
  std::array<double, kNumJoints> proprio{};  // joint angles
  std::vector<double> latent;                // observer projection of the mobile
};

struct StepOutcome {
  Observation observation;
  double mobile_path_length = 0.0;
  double latent_path_length = 0.0;  // only when latent checkpoints are enabled
  std::array<int, kNumJoints> torque_signs{};
  bool attached = false;
};

// The body-and-mobile simulator. Constructing one performs the reset: fixed
// geometry (observer matrix, candidate tether directions) is drawn from the
// seed, state is zeroed, and the initial observation is taken.
class Environment {
 public:
  Environment(const EnvConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    torque_rng_ = make_stream(seed, Stream::kTorqueSign);
    noise_rng_ = make_stream(seed, Stream::kNoiseForce);
    obs_rng_ = make_stream(seed, Stream::kObservationNoise);

    // Observer rows: unit-norm Gaussian directions over the mobile position.
    // The stand-in for a frame encoder reads where the mobile is, not how
    // fast it moves; velocity reaches the latent only through consecutive
    // frames, exactly as it would through pixels.
    auto mat_rng = make_stream(seed, Stream::kObserverMatrix);
    std::normal_distribution<double> gauss(0.0, 1.0);
    observer_.assign(static_cast<std::size_t>(cfg_.latent_dim) * 3, 0.0);
    for (int r = 0; r < cfg_.latent_dim; ++r) {
      double norm2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        double v = gauss(mat_rng);
        observer_[r * 3 + c] = v;
        norm2 += v * v;
      }
      double inv = 1.0 / std::sqrt(norm2);
      for (int c = 0; c < 3; ++c) observer_[r * 3 + c] *= inv;
    }

    // One candidate tether direction per limb, drawn in limb index order so
    // the geometry does not depend on which limb the config picks.
    auto limb_rng = make_stream(seed, Stream::kLimbGeometry);
    for (int l = 0; l < 4; ++l) limb_dirs_[l] = random_unit3(limb_rng);

    initial_observation_ = make_observation();
    last_latent_ = initial_observation_.latent;
  }

  const EnvConfig& config() const { return cfg_; }
  const Observation& initial_observation() const { return initial_observation_; }
  const std::array<JointState, kNumJoints>& joints() const { return joints_; }
  const MobileState& mobile() const { return mobile_; }

  std::array<double, 3> tether_direction() const {
    return limb_dirs_[static_cast<int>(cfg_.attached_limb)];
  }

  // Advance one agent step. Torque signs are drawn for every joint every
  // step, chosen action or not, so the random stream advances identically
  // regardless of the policy.
  StepOutcome step(const ActionVector& actions, bool attached) {
    ++step_index_;
    StepOutcome out;
    out.attached = attached;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int j = 0; j < kNumJoints; ++j)
      out.torque_signs[j] = uni(torque_rng_) < 0.5 ? -1 : 1;

    const auto limb = limb_joints(cfg_.attached_limb);
    const auto& dir = limb_dirs_[static_cast<int>(cfg_.attached_limb)];
    double dt = cfg_.substep_dt;
    double path = 0.0;
    bool checkpoints = cfg_.latent_checkpoint_substeps > 0;

    for (int k = 0; k < cfg_.substeps_per_step; ++k) {
      bool torque_on = k < cfg_.action_substeps;
      for (int j = 0; j < kNumJoints; ++j) {
        double torque = 0.0;
        if (torque_on && actions[j] == ActionValue::kMove)
          torque = out.torque_signs[j] * cfg_.max_torque;
        JointState& s = joints_[j];
        double accel = (torque - cfg_.joint_damping * s.angular_velocity -
                        cfg_.joint_stiffness * s.angle) /
                       cfg_.joint_inertia;
        s.angular_velocity += dt * accel;
        s.angle += dt * s.angular_velocity;
        if (s.angle > cfg_.angle_limit) s.angle = cfg_.angle_limit;
        if (s.angle < -cfg_.angle_limit) s.angle = -cfg_.angle_limit;
      }

      std::array<double, 3> force{};
      if (attached) {
        // The tether only pulls: limb speed translates into a yank along the
        // string direction regardless of swing sign.
        double yank = 0.0;
        for (int j : limb) yank += std::abs(joints_[j].angular_velocity);
        double f = cfg_.tether_gain * yank;
        force[0] += f * dir[0];
        force[1] += f * dir[1];
        force[2] += f * dir[2];
      }
      if (cfg_.condition == Condition::kNoisyMobile) {
        auto u = random_unit3(noise_rng_);
        force[0] += cfg_.noise_force_magnitude * u[0];
        force[1] += cfg_.noise_force_magnitude * u[1];
        force[2] += cfg_.noise_force_magnitude * u[2];
      }

      std::array<double, 3> prev = mobile_.position;
      for (int c = 0; c < 3; ++c) {
        double accel = (force[c] - cfg_.mobile_damping * mobile_.velocity[c] -
                        cfg_.anchor_stiffness * mobile_.position[c]) /
                       cfg_.mobile_mass;
        mobile_.velocity[c] += dt * accel;
        mobile_.position[c] += dt * mobile_.velocity[c];
      }
      double seg = 0.0;
      for (int c = 0; c < 3; ++c) {
        double d = mobile_.position[c] - prev[c];
        seg += d * d;
      }
      path += std::sqrt(seg);

      if (checkpoints && (k + 1) % cfg_.latent_checkpoint_substeps == 0) {
        std::vector<double> z = latent_observe(mobile_);
        double d2 = 0.0;
        for (int i = 0; i < cfg_.latent_dim; ++i) {
          double d = z[i] - last_latent_[i];
          d2 += d * d;
        }
        out.latent_path_length += std::sqrt(d2);
        last_latent_ = std::move(z);
      }
    }

    for (int j = 0; j < kNumJoints; ++j) {
      if (!std::isfinite(joints_[j].angle) || !std::isfinite(joints_[j].angular_velocity))
        throw NumericalInstability("joint state diverged", step_index_);
    }
    for (int c = 0; c < 3; ++c) {
      if (!std::isfinite(mobile_.position[c]) || !std::isfinite(mobile_.velocity[c]))
        throw NumericalInstability("mobile state diverged", step_index_);
    }

    out.mobile_path_length = path;
    if (checkpoints && cfg_.substeps_per_step % cfg_.latent_checkpoint_substeps == 0) {
      // Final checkpoint coincides with the step boundary; reuse it as the
      // step observation instead of drawing fresh noise.
      out.observation.latent = last_latent_;
      for (int j = 0; j < kNumJoints; ++j)
        out.observation.proprio[j] = joints_[j].angle;
    } else {
      out.observation = make_observation();
      last_latent_ = out.observation.latent;
    }
    return out;
  }

  // Observer projection plus isotropic Gaussian read noise. Public so the
  // observation model can be probed directly.
  std::vector<double> latent_observe(const MobileState& m) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::array<double, 3>& in = m.position;
    std::vector<double> z(cfg_.latent_dim);
    for (int r = 0; r < cfg_.latent_dim; ++r) {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) s += observer_[r * 3 + c] * in[c];
      if (cfg_.observation_noise_std > 0.0)
        s += cfg_.observation_noise_std * gauss(obs_rng_);
      z[r] = s;
    }
    return z;
  }

 private:
  Observation make_observation() {
    Observation obs;
    for (int j = 0; j < kNumJoints; ++j) obs.proprio[j] = joints_[j].angle;
    obs.latent = latent_observe(mobile_);
    return obs;
  }

  EnvConfig cfg_;
  std::array<JointState, kNumJoints> joints_{};
  MobileState mobile_{};
  std::vector<double> observer_;
  std::array<std::array<double, 3>, 4> limb_dirs_{};
  Observation initial_observation_;
  std::vector<double> last_latent_;
  long step_index_ = 0;
  std::mt19937_64 torque_rng_, noise_rng_, obs_rng_;
};

}  // namespace caislab
