#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "caislab/errors.hpp"
#include "caislab/harness.hpp"

namespace caislab {

// Shortest-ish fixed formatting; nine significant digits is enough to make
// repeated runs byte-comparable without bloating files.
inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline const char* condition_name(Condition c) {
  return c == Condition::kFreeMobile ? "free" : "noisy";
}

inline Condition parse_condition(const std::string& s) {
  if (s == "free") return Condition::kFreeMobile;
  if (s == "noisy") return Condition::kNoisyMobile;
  throw ConfigError("unknown condition '" + s + "' (expected free|noisy)");
}

inline Limb parse_limb(const std::string& s) {
  for (int l = 0; l < 4; ++l)
    if (s == limb_name(static_cast<Limb>(l))) return static_cast<Limb>(l);
  throw ConfigError("unknown limb '" + s + "'");
}

inline void write_run_csv(std::ostream& os, const RunSeries& s) {
  os << "# caislab run\n";
  os << "# condition=" << condition_name(s.condition) << " reward=" << s.reward_name
     << " seed=" << s.seed << " attached_limb=" << limb_name(s.attached_limb) << "\n";
  os << "# baseline_steps=" << s.protocol.baseline_steps
     << " attached_steps=" << s.protocol.attached_steps
     << " extinction_steps=" << s.protocol.extinction_steps
     << " burst_window=" << s.protocol.burst_window << "\n";

  os << "step,phase";
  auto cols = [&os](const char* prefix) {
    for (int j = 0; j < kNumJoints; ++j) os << ',' << prefix << '_' << joint_name(j);
  };
  cols("action");
  cols("p_move");
  cols("q_no");
  cols("q_move");
  os << ",mtl,rtl,surprise";
  cols("cais_move");
  cols("reward");
  os << ",mobile_speed\n";

  for (const RunRecord& r : s.records) {
    os << r.step << ',' << phase_name(r.phase);
    for (int j = 0; j < kNumJoints; ++j) os << ',' << r.action[j];
    for (int j = 0; j < kNumJoints; ++j) os << ',' << fmt_g(r.p_move[j]);
    for (int j = 0; j < kNumJoints; ++j) os << ',' << fmt_g(r.q_no[j]);
    for (int j = 0; j < kNumJoints; ++j) os << ',' << fmt_g(r.q_move[j]);
    os << ',' << fmt_g(r.mtl) << ',' << fmt_g(r.rtl) << ',' << fmt_g(r.surprise);
    for (int j = 0; j < kNumJoints; ++j) os << ',' << fmt_g(r.cais_move[j]);
    for (int j = 0; j < kNumJoints; ++j) os << ',' << fmt_g(r.reward[j]);
    os << ',' << fmt_g(r.mobile_speed) << '\n';
  }
}

inline void write_run_csv(const std::filesystem::path& path, const RunSeries& s) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path.string());
  write_run_csv(f, s);
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::map<std::string, std::string> parse_comment_fields(const std::string& line) {
  std::map<std::string, std::string> out;
  std::istringstream ss(line.substr(1));  // past '#'
  std::string tok;
  while (ss >> tok) {
    auto eq = tok.find('=');
    if (eq != std::string::npos) out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

}  // namespace detail

// Inverse of write_run_csv; tolerant of nothing. Any malformed row throws
// with the line number.
inline RunSeries read_run_csv(std::istream& is, const std::string& origin = "csv") {
  RunSeries s;
  std::string line;
  int lineno = 0;
  std::map<std::string, std::string> meta;
  bool saw_header = false;
  auto fail = [&](const std::string& msg) -> void {
    throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg);
  };

  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto kv = detail::parse_comment_fields(line);
      meta.insert(kv.begin(), kv.end());
      continue;
    }
    if (!saw_header) {
      saw_header = true;  // column names are fixed; trust but skip
      continue;
    }
    auto f = detail::split_csv(line);
    const std::size_t expected = 2 + 4 * kNumJoints + 3 + 2 * kNumJoints + 1;
    if (f.size() != expected) fail("expected " + std::to_string(expected) + " fields");
    RunRecord r;
    std::size_t i = 0;
    r.step = std::atoi(f[i++].c_str());
    const std::string& ph = f[i++];
    if (ph == "baseline") r.phase = Phase::kBaseline;
    else if (ph == "attached") r.phase = Phase::kAttached;
    else if (ph == "extinction") r.phase = Phase::kExtinction;
    else fail("unknown phase '" + ph + "'");
    auto num = [&](std::size_t k) { return std::strtod(f[k].c_str(), nullptr); };
    for (int j = 0; j < kNumJoints; ++j) r.action[j] = std::atoi(f[i++].c_str());
    for (int j = 0; j < kNumJoints; ++j) r.p_move[j] = num(i++);
    for (int j = 0; j < kNumJoints; ++j) r.q_no[j] = num(i++);
    for (int j = 0; j < kNumJoints; ++j) r.q_move[j] = num(i++);
    r.mtl = num(i++);
    r.rtl = num(i++);
    r.surprise = num(i++);
    for (int j = 0; j < kNumJoints; ++j) r.cais_move[j] = num(i++);
    for (int j = 0; j < kNumJoints; ++j) r.reward[j] = num(i++);
    r.mobile_speed = num(i++);
    s.records.push_back(r);
  }

  auto need = [&](const char* key) -> std::string {
    auto it = meta.find(key);
    if (it == meta.end())
      throw ConfigError(origin + ": missing '" + key + "' header comment");
    return it->second;
  };
  s.condition = parse_condition(need("condition"));
  s.reward_name = need("reward");
  s.seed = std::strtoull(need("seed").c_str(), nullptr, 10);
  s.attached_limb = parse_limb(need("attached_limb"));
  s.protocol.baseline_steps = std::atoi(need("baseline_steps").c_str());
  s.protocol.attached_steps = std::atoi(need("attached_steps").c_str());
  s.protocol.extinction_steps = std::atoi(need("extinction_steps").c_str());
  s.protocol.burst_window = std::atoi(need("burst_window").c_str());
  return s;
}

inline RunSeries read_run_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open: " + path.string());
  return read_run_csv(f, path.string());
}

}  // namespace caislab
