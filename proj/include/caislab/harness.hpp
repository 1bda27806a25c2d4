#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "caislab/agent.hpp"
#include "caislab/env.hpp"
#include "caislab/errors.hpp"
#include "caislab/network.hpp"
#include "caislab/outcome_model.hpp"
#include "caislab/rng.hpp"

namespace caislab {

enum class Phase { kBaseline = 0, kAttached = 1, kExtinction = 2 };

inline const char* phase_name(Phase p) {
  switch (p) {
    case Phase::kBaseline: return "baseline";
    case Phase::kAttached: return "attached";
    case Phase::kExtinction: return "extinction";
  }
  throw ContractViolation("invalid phase");
}

struct ProtocolConfig {
  int baseline_steps = 500;
  int attached_steps = 1500;
  int extinction_steps = 500;
  int burst_window = 100;

  int total_steps() const { return baseline_steps + attached_steps + extinction_steps; }
  int attached_begin() const { return baseline_steps + 1; }          // 1-based inclusive
  int attached_end() const { return baseline_steps + attached_steps; }

  Phase phase_of(int step) const {
    if (step <= baseline_steps) return Phase::kBaseline;
    if (step <= attached_end()) return Phase::kAttached;
    return Phase::kExtinction;
  }

  void validate() const {
    if (baseline_steps <= 0) throw ConfigError("protocol.baseline_steps must be positive");
    if (attached_steps <= 0) throw ConfigError("protocol.attached_steps must be positive");
    if (extinction_steps <= 0)
      throw ConfigError("protocol.extinction_steps must be positive");
    if (burst_window <= 0) throw ConfigError("protocol.burst_window must be positive");
    if (burst_window > attached_steps || burst_window > extinction_steps)
      throw ConfigError("protocol.burst_window must fit inside the adjacent phases");
  }
};

enum class OutcomeMode { kDelta = 0, kAbsolute = 1 };
enum class RtlMode { kDelta = 0, kPath = 1 };

struct ModelConfig {
  double kappa = 1.0;
  // Table learning rate. Deliberately hotter than the value net: the score
  // compares a conditional table against the baseline table, and any
  // convergence lag between the two reads as spurious influence. Fast tables
  // keep that lag small relative to the true effect.
  double lr = 0.003;
  // Conditional tables train only on steps where their action value was the
  // taken one, roughly half as often as the baseline. This multiplier on
  // their learning rate closes part of that update-frequency gap, so a
  // distribution drift does not open a spurious conditional-vs-baseline gap
  // while the slower family catches up. Deliberately less than the full
  // frequency ratio: overshooting makes the conditionals adapt faster than
  // the baseline after a change, which flips the sign of the transient.
  double cond_lr_mult = 1.5;
  // Polyak coefficient for the averaged tables that score reads use; 1.0
  // reads the raw iterates. Small beta trades a little onset lag for a much
  // lower sampling-noise floor on the scores of uninfluenced joints.
  double avg_beta = 0.003;
  OutcomeMode outcome = OutcomeMode::kAbsolute;
  RtlMode rtl = RtlMode::kPath;
  int rtl_checkpoint_substeps = 10;

  void validate() const {
    if (!(kappa > 0.0)) throw ConfigError("model.kappa must be positive");
    if (!(lr > 0.0)) throw ConfigError("model.lr must be positive");
    if (!(cond_lr_mult > 0.0))
      throw ConfigError("model.cond_lr_mult must be positive");
    if (!(avg_beta > 0.0 && avg_beta <= 1.0))
      throw ConfigError("model.avg_beta must lie in (0, 1]");
    if (rtl_checkpoint_substeps <= 0)
      throw ConfigError("model.rtl_checkpoint_substeps must be positive");
  }
};

struct RunConfig {
  EnvConfig env;
  AgentConfig agent;
  ModelConfig model;
  ProtocolConfig protocol;
  std::vector<std::uint64_t> seeds{0};
  std::string out_dir = "runs";

  void validate() const {
    env.validate();
    agent.validate();
    model.validate();
    protocol.validate();
    if (seeds.empty()) throw ConfigError("seeds must not be empty");
  }
};

struct RunRecord {
  int step = 0;
  Phase phase = Phase::kBaseline;
  std::array<int, kNumJoints> action{};
  std::array<double, kNumJoints> p_move{};
  std::array<double, kNumJoints> q_no{};
  std::array<double, kNumJoints> q_move{};
  double mtl = 0.0;
  double rtl = 0.0;
  double surprise = 0.0;
  std::array<double, kNumJoints> cais_move{};
  std::array<double, kNumJoints> reward{};
  double mobile_speed = 0.0;
};

struct RunSeries {
  Condition condition = Condition::kFreeMobile;
  std::string reward_name;
  std::uint64_t seed = 0;
  Limb attached_limb = Limb::kLeftLeg;
  ProtocolConfig protocol;
  std::vector<RunRecord> records;

  std::array<bool, kNumJoints> attached_mask() const {
    std::array<bool, kNumJoints> m{};
    for (int j : limb_joints(attached_limb)) m[j] = true;
    return m;
  }
};

// One full experiment for one seed: baseline, attached, extinction. The
// per-step order is fixed: observe, act, step the world, train the outcome
// bank, score, reward, TD update, log.
inline RunSeries run_experiment(const RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  EnvConfig env_cfg = cfg.env;
  if (cfg.model.rtl == RtlMode::kPath)
    env_cfg.latent_checkpoint_substeps = cfg.model.rtl_checkpoint_substeps;
  Environment env(env_cfg, seed);

  OutcomeModelBank bank(env_cfg.latent_dim,
                        AdamWConfig{.lr = cfg.model.lr, .weight_decay = 0.0},
                        cfg.model.kappa, cfg.model.cond_lr_mult,
                        cfg.model.avg_beta);

  NetworkSpec net_spec;
  net_spec.input_dim = kNumJoints + env_cfg.latent_dim;
  auto init_rng = make_stream(seed, Stream::kNetworkInit);
  QNetwork net = QNetwork::initialize(net_spec, init_rng);
  AdamW net_opt(net.param_count(),
                AdamWConfig{.lr = cfg.agent.lr, .weight_decay = cfg.agent.weight_decay});
  auto policy_rng = make_stream(seed, Stream::kPolicy);

  RunSeries series;
  series.condition = env_cfg.condition;
  series.reward_name = cfg.agent.reward.name();
  series.seed = seed;
  series.attached_limb = env_cfg.attached_limb;
  series.protocol = cfg.protocol;
  series.records.reserve(cfg.protocol.total_steps());

  Observation obs = env.initial_observation();
  std::vector<double> input(net_spec.input_dim);
  ForwardTrace trace;
  const double step_seconds = env_cfg.substep_dt * env_cfg.substeps_per_step;

  for (int step = 1; step <= cfg.protocol.total_steps(); ++step) {
    bool attached = cfg.protocol.phase_of(step) == Phase::kAttached;

    for (int j = 0; j < kNumJoints; ++j) input[j] = obs.proprio[j];
    for (int d = 0; d < env_cfg.latent_dim; ++d)
      input[kNumJoints + d] = obs.latent[d];
    std::vector<double> q = net.forward(input, &trace);
    PolicyProbs probs = policy_probs(q, cfg.agent);
    ActionVector actions = select_actions(probs, policy_rng);

    StepOutcome world = env.step(actions, attached);

    double mtl = world.mobile_path_length;
    double rtl = cfg.model.rtl == RtlMode::kPath
                     ? world.latent_path_length
                     : rtl_delta(obs.latent, world.observation.latent);

    std::vector<double> outcome(env_cfg.latent_dim);
    for (int d = 0; d < env_cfg.latent_dim; ++d)
      outcome[d] = cfg.model.outcome == OutcomeMode::kDelta
                       ? world.observation.latent[d] - obs.latent[d]
                       : world.observation.latent[d];

    bank.update(actions, outcome);
    std::vector<double> expected = bank.expected_outcome(actions);
    double surp = surprise(expected, outcome);
    CaisVector cais = bank.cais_all();

    RewardVector reward =
        assemble_reward(cfg.agent.reward, cais, actions, surp, mtl, rtl);

    for (int j = 0; j < kNumJoints; ++j)
      if (!std::isfinite(reward.values[j]))
        throw NumericalInstability("non-finite reward", step);
    if (!std::isfinite(surp) || !std::isfinite(mtl) || !std::isfinite(rtl))
      throw NumericalInstability("non-finite signal", step);

    for (int j = 0; j < kNumJoints; ++j) input[j] = world.observation.proprio[j];
    for (int d = 0; d < env_cfg.latent_dim; ++d)
      input[kNumJoints + d] = world.observation.latent[d];
    std::vector<double> q_next = net.forward(input);
    td_update(net, net_opt, trace, q, actions, reward, q_next, cfg.agent);

    RunRecord rec;
    rec.step = step;
    rec.phase = cfg.protocol.phase_of(step);
    for (int j = 0; j < kNumJoints; ++j) {
      rec.action[j] = actions[j] == ActionValue::kMove ? 1 : 0;
      rec.p_move[j] = probs.p_move[j];
      rec.q_no[j] = q[2 * j];
      rec.q_move[j] = q[2 * j + 1];
      rec.cais_move[j] = cais.scores[j][1];
      rec.reward[j] = reward.values[j];
    }
    rec.mtl = mtl;
    rec.rtl = rtl;
    rec.surprise = surp;
    rec.mobile_speed = mtl / step_seconds;
    series.records.push_back(rec);

    obs = std::move(world.observation);
  }
  return series;
}

// ---- Metrics -------------------------------------------------------------

// Mean p_move over a [first, last] step window (1-based, inclusive),
// averaged over the masked joints.
inline double mean_p_move(const RunSeries& s, int first, int last,
                          const std::array<bool, kNumJoints>& mask) {
  if (first < 1 || last > static_cast<int>(s.records.size()) || first > last)
    throw ContractViolation("mean_p_move: window out of range");
  int joints = 0;
  for (bool b : mask) joints += b ? 1 : 0;
  if (joints == 0) throw ContractViolation("mean_p_move: empty joint mask");
  double sum = 0.0;
  for (int step = first; step <= last; ++step) {
    const RunRecord& r = s.records[step - 1];
    for (int j = 0; j < kNumJoints; ++j)
      if (mask[j]) sum += r.p_move[j];
  }
  return sum / (static_cast<double>(joints) * (last - first + 1));
}

// Attached minus unattached mean p_move over the window.
inline double contingency_separation(const RunSeries& s, int first, int last) {
  auto att = s.attached_mask();
  std::array<bool, kNumJoints> unatt{};
  for (int j = 0; j < kNumJoints; ++j) unatt[j] = !att[j];
  return mean_p_move(s, first, last, att) - mean_p_move(s, first, last, unatt);
}

// Default evaluation window: the final 300 steps of the attached phase
// (fewer when the phase is shorter).
inline std::pair<int, int> evaluation_window(const ProtocolConfig& p) {
  int last = p.attached_end();
  int first = last - std::min(300, p.attached_steps) + 1;
  return {first, last};
}

// Mean attached-joint p_move in the first burst_window extinction steps
// minus the last burst_window attached steps. Positive means the removal of
// the contingency transiently intensified responding.
inline double extinction_burst_index(const RunSeries& s) {
  const ProtocolConfig& p = s.protocol;
  auto att = s.attached_mask();
  int e = p.attached_end();
  double after = mean_p_move(s, e + 1, e + p.burst_window, att);
  double before = mean_p_move(s, e - p.burst_window + 1, e, att);
  return after - before;
}

// Mean of an arbitrary per-record scalar over a step window.
template <typename F>
double window_mean(const RunSeries& s, int first, int last, F&& field) {
  if (first < 1 || last > static_cast<int>(s.records.size()) || first > last)
    throw ContractViolation("window_mean: window out of range");
  double sum = 0.0;
  for (int step = first; step <= last; ++step) sum += field(s.records[step - 1]);
  return sum / (last - first + 1);
}

// Mean CAIS(MOVE) over a window, averaged over masked joints.
inline double mean_cais_move(const RunSeries& s, int first, int last,
                             const std::array<bool, kNumJoints>& mask) {
  int joints = 0;
  for (bool b : mask) joints += b ? 1 : 0;
  if (joints == 0) throw ContractViolation("mean_cais_move: empty joint mask");
  return window_mean(s, first, last, [&](const RunRecord& r) {
    double v = 0.0;
    for (int j = 0; j < kNumJoints; ++j)
      if (mask[j]) v += r.cais_move[j];
    return v / joints;
  });
}

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, n - 1
  int n = 0;
};

inline Aggregate aggregate(const std::vector<double>& xs) {
  Aggregate a;
  a.n = static_cast<int>(xs.size());
  if (a.n == 0) return a;
  double s = 0.0;
  for (double x : xs) s += x;
  a.mean = s / a.n;
  if (a.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - a.mean) * (x - a.mean);
    a.stddev = std::sqrt(ss / (a.n - 1));
  }
  return a;
}

}  // namespace caislab
