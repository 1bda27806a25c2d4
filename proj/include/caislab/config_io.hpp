#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

#include "caislab/csv.hpp"
#include "caislab/errors.hpp"
#include "caislab/harness.hpp"

namespace caislab {

inline RewardBase parse_reward_base(const std::string& s) {
  if (s == "mtl") return RewardBase::kMtl;
  if (s == "rtl") return RewardBase::kRtl;
  if (s == "cais") return RewardBase::kCais;
  if (s == "surprise") return RewardBase::kSurprise;
  throw ConfigError("unknown reward base '" + s + "' (expected mtl|rtl|cais|surprise)");
}

// "cais", "mtl+surprise", ... as used by the sweep grid and output paths.
inline RewardSpec parse_reward_name(const std::string& s) {
  RewardSpec spec;
  auto plus = s.find('+');
  if (plus == std::string::npos) {
    spec.base = parse_reward_base(s);
  } else {
    if (s.substr(plus + 1) != "surprise")
      throw ConfigError("unknown reward name '" + s + "'");
    spec.base = parse_reward_base(s.substr(0, plus));
    spec.add_surprise = true;
  }
  return spec;
}

namespace detail {

// Strict object reader: every recognized key is consumed, anything left over
// is reported by its full path.
class Section {
 public:
  Section(const nlohmann::json& j, std::string path)
      : obj_(j), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + " must be an object");
  }

  bool has(const char* key) const { return obj_.contains(key); }

  nlohmann::json take(const char* key) {
    nlohmann::json v = obj_.at(key);
    obj_.erase(key);
    return v;
  }

  double number(const char* key, double def) {
    if (!obj_.contains(key)) return def;
    nlohmann::json v = take(key);
    if (!v.is_number()) throw ConfigError(path_ + "." + key + " must be a number");
    return v.get<double>();
  }

  int integer(const char* key, int def) {
    if (!obj_.contains(key)) return def;
    nlohmann::json v = take(key);
    if (!v.is_number_integer())
      throw ConfigError(path_ + "." + key + " must be an integer");
    return v.get<int>();
  }

  bool boolean(const char* key, bool def) {
    if (!obj_.contains(key)) return def;
    nlohmann::json v = take(key);
    if (!v.is_boolean()) throw ConfigError(path_ + "." + key + " must be a boolean");
    return v.get<bool>();
  }

  std::string string(const char* key, const std::string& def) {
    if (!obj_.contains(key)) return def;
    nlohmann::json v = take(key);
    if (!v.is_string()) throw ConfigError(path_ + "." + key + " must be a string");
    return v.get<std::string>();
  }

  void finish() const {
    if (!obj_.empty())
      throw ConfigError("unknown key '" + path_ + "." + obj_.begin().key() + "'");
  }

  const std::string& path() const { return path_; }

 private:
  nlohmann::json obj_;
  std::string path_;
};

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& root) {
  RunConfig cfg;
  detail::Section top(root, "config");
  if (top.has("version")) top.take("version");

  if (top.has("env")) {
    detail::Section env(top.take("env"), "env");
    if (env.has("condition")) cfg.env.condition = parse_condition(env.string("condition", "free"));
    cfg.env.joint_inertia = env.number("joint_inertia", cfg.env.joint_inertia);
    cfg.env.joint_damping = env.number("joint_damping", cfg.env.joint_damping);
    cfg.env.joint_stiffness = env.number("joint_stiffness", cfg.env.joint_stiffness);
    cfg.env.max_torque = env.number("max_torque", cfg.env.max_torque);
    cfg.env.angle_limit = env.number("angle_limit", cfg.env.angle_limit);
    cfg.env.mobile_mass = env.number("mobile_mass", cfg.env.mobile_mass);
    cfg.env.mobile_damping = env.number("mobile_damping", cfg.env.mobile_damping);
    cfg.env.anchor_stiffness = env.number("anchor_stiffness", cfg.env.anchor_stiffness);
    cfg.env.tether_gain = env.number("tether_gain", cfg.env.tether_gain);
    cfg.env.noise_force_magnitude =
        env.number("noise_force_magnitude", cfg.env.noise_force_magnitude);
    if (env.has("attached_limb"))
      cfg.env.attached_limb = parse_limb(env.string("attached_limb", ""));
    cfg.env.substep_dt = env.number("substep_dt", cfg.env.substep_dt);
    cfg.env.substeps_per_step = env.integer("substeps_per_step", cfg.env.substeps_per_step);
    cfg.env.action_substeps = env.integer("action_substeps", cfg.env.action_substeps);
    cfg.env.latent_dim = env.integer("latent_dim", cfg.env.latent_dim);
    cfg.env.observation_noise_std =
        env.number("observation_noise_std", cfg.env.observation_noise_std);
    env.finish();
  }

  if (top.has("agent")) {
    detail::Section agent(top.take("agent"), "agent");
    cfg.agent.gamma = agent.number("gamma", cfg.agent.gamma);
    cfg.agent.temperature = agent.number("temperature", cfg.agent.temperature);
    cfg.agent.move_bias = agent.number("move_bias", cfg.agent.move_bias);
    cfg.agent.lr = agent.number("lr", cfg.agent.lr);
    cfg.agent.weight_decay = agent.number("weight_decay", cfg.agent.weight_decay);
    if (agent.has("reward")) {
      detail::Section reward(agent.take("reward"), "agent.reward");
      if (reward.has("base"))
        cfg.agent.reward.base = parse_reward_base(reward.string("base", "cais"));
      cfg.agent.reward.add_surprise =
          reward.boolean("add_surprise", cfg.agent.reward.add_surprise);
      cfg.agent.reward.surprise_weight =
          reward.number("surprise_weight", cfg.agent.reward.surprise_weight);
      if (reward.has("base_scale"))
        cfg.agent.reward.base_scale = reward.number("base_scale", 0.0);
      reward.finish();
    }
    agent.finish();
  }

  if (top.has("model")) {
    detail::Section model(top.take("model"), "model");
    cfg.model.kappa = model.number("kappa", cfg.model.kappa);
    cfg.model.lr = model.number("lr", cfg.model.lr);
    cfg.model.cond_lr_mult = model.number("cond_lr_mult", cfg.model.cond_lr_mult);
    cfg.model.avg_beta = model.number("avg_beta", cfg.model.avg_beta);
    if (model.has("outcome")) {
      std::string s = model.string("outcome", "delta");
      if (s == "delta") cfg.model.outcome = OutcomeMode::kDelta;
      else if (s == "absolute") cfg.model.outcome = OutcomeMode::kAbsolute;
      else throw ConfigError("model.outcome must be delta|absolute");
    }
    if (model.has("rtl")) {
      std::string s = model.string("rtl", "delta");
      if (s == "delta") cfg.model.rtl = RtlMode::kDelta;
      else if (s == "path") cfg.model.rtl = RtlMode::kPath;
      else throw ConfigError("model.rtl must be delta|path");
    }
    cfg.model.rtl_checkpoint_substeps =
        model.integer("rtl_checkpoint_substeps", cfg.model.rtl_checkpoint_substeps);
    model.finish();
  }

  if (top.has("protocol")) {
    detail::Section proto(top.take("protocol"), "protocol");
    cfg.protocol.baseline_steps = proto.integer("baseline_steps", cfg.protocol.baseline_steps);
    cfg.protocol.attached_steps = proto.integer("attached_steps", cfg.protocol.attached_steps);
    cfg.protocol.extinction_steps =
        proto.integer("extinction_steps", cfg.protocol.extinction_steps);
    cfg.protocol.burst_window = proto.integer("burst_window", cfg.protocol.burst_window);
    proto.finish();
  }

  if (top.has("seeds")) {
    nlohmann::json v = top.take("seeds");
    cfg.seeds.clear();
    if (v.is_number_integer()) {
      cfg.seeds.push_back(v.get<std::uint64_t>());
    } else if (v.is_array()) {
      for (const auto& e : v) {
        if (!e.is_number_integer()) throw ConfigError("seeds entries must be integers");
        cfg.seeds.push_back(e.get<std::uint64_t>());
      }
    } else {
      throw ConfigError("seeds must be an integer or array of integers");
    }
  }

  if (top.has("out")) {
    nlohmann::json v = top.take("out");
    if (!v.is_string()) throw ConfigError("out must be a string");
    cfg.out_dir = v.get<std::string>();
  }

  top.finish();
  cfg.validate();
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

// Fully resolved config as JSON. Defaults are materialized (including the
// reward family's base_scale) so a manifest re-runs identically even if the
// built-in defaults later change.
inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["version"] = "1";
  j["env"] = {
      {"condition", condition_name(cfg.env.condition)},
      {"joint_inertia", cfg.env.joint_inertia},
      {"joint_damping", cfg.env.joint_damping},
      {"joint_stiffness", cfg.env.joint_stiffness},
      {"max_torque", cfg.env.max_torque},
      {"angle_limit", cfg.env.angle_limit},
      {"mobile_mass", cfg.env.mobile_mass},
      {"mobile_damping", cfg.env.mobile_damping},
      {"anchor_stiffness", cfg.env.anchor_stiffness},
      {"tether_gain", cfg.env.tether_gain},
      {"noise_force_magnitude", cfg.env.noise_force_magnitude},
      {"attached_limb", limb_name(cfg.env.attached_limb)},
      {"substep_dt", cfg.env.substep_dt},
      {"substeps_per_step", cfg.env.substeps_per_step},
      {"action_substeps", cfg.env.action_substeps},
      {"latent_dim", cfg.env.latent_dim},
      {"observation_noise_std", cfg.env.observation_noise_std},
  };
  j["agent"] = {
      {"gamma", cfg.agent.gamma},
      {"temperature", cfg.agent.temperature},
      {"move_bias", cfg.agent.move_bias},
      {"lr", cfg.agent.lr},
      {"weight_decay", cfg.agent.weight_decay},
      {"reward",
       {{"base", reward_base_name(cfg.agent.reward.base)},
        {"add_surprise", cfg.agent.reward.add_surprise},
        {"surprise_weight", cfg.agent.reward.surprise_weight},
        {"base_scale", cfg.agent.reward.resolved_scale()}}},
  };
  j["model"] = {
      {"kappa", cfg.model.kappa},
      {"lr", cfg.model.lr},
      {"cond_lr_mult", cfg.model.cond_lr_mult},
      {"avg_beta", cfg.model.avg_beta},
      {"outcome", cfg.model.outcome == OutcomeMode::kDelta ? "delta" : "absolute"},
      {"rtl", cfg.model.rtl == RtlMode::kDelta ? "delta" : "path"},
      {"rtl_checkpoint_substeps", cfg.model.rtl_checkpoint_substeps},
  };
  j["protocol"] = {
      {"baseline_steps", cfg.protocol.baseline_steps},
      {"attached_steps", cfg.protocol.attached_steps},
      {"extinction_steps", cfg.protocol.extinction_steps},
      {"burst_window", cfg.protocol.burst_window},
  };
  j["seeds"] = cfg.seeds;
  j["out"] = cfg.out_dir;
  return j;
}

inline void write_manifest(const std::filesystem::path& path, const RunConfig& cfg) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path.string());
  f << run_config_to_json(cfg).dump(2) << '\n';
}

}  // namespace caislab
