#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "caislab/config_io.hpp"
#include "caislab/csv.hpp"
#include "caislab/harness.hpp"

namespace caislab {

struct SweepCell {
  Condition condition = Condition::kFreeMobile;
  RewardSpec reward;
  std::uint64_t seed = 0;

  std::string label() const {
    return std::string(condition_name(condition)) + "/" + reward.name() + "/" +
           std::to_string(seed);
  }
};

struct SweepResult {
  int completed = 0;
  std::vector<std::string> failures;  // "cell: what"
  double wall_seconds = 0.0;
};

inline std::filesystem::path run_csv_path(const std::filesystem::path& out,
                                          const SweepCell& cell) {
  return out / condition_name(cell.condition) / cell.reward.name() /
         (std::to_string(cell.seed) + ".csv");
}

// Run every (condition, reward, seed) cell, each writing <out>/<condition>/
// <reward>/<seed>.csv plus a manifest with the fully resolved config. Cells
// are independent, so failures are collected per cell rather than aborting
// the grid.
inline SweepResult run_sweep(const RunConfig& base,
                             const std::vector<SweepCell>& cells, int jobs) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs <= 0) jobs = 1;
  if (jobs > static_cast<int>(cells.size())) jobs = static_cast<int>(cells.size());

  auto t0 = std::chrono::steady_clock::now();
  SweepResult result;
  std::atomic<std::size_t> next{0};
  std::mutex mu;

  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const SweepCell& cell = cells[i];
      try {
        RunConfig cfg = base;
        cfg.env.condition = cell.condition;
        cfg.agent.reward = cell.reward;
        cfg.seeds = {cell.seed};

        std::filesystem::path csv = run_csv_path(base.out_dir, cell);
        std::filesystem::create_directories(csv.parent_path());
        RunSeries series = run_experiment(cfg, cell.seed);
        write_run_csv(csv, series);
        std::filesystem::path manifest = csv;
        manifest.replace_extension(".manifest.json");
        write_manifest(manifest, cfg);

        std::lock_guard<std::mutex> lk(mu);
        ++result.completed;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(mu);
        result.failures.push_back(cell.label() + ": " + e.what());
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

inline std::vector<SweepCell> make_grid(const std::vector<Condition>& conditions,
                                        const std::vector<RewardSpec>& rewards,
                                        int num_seeds) {
  if (num_seeds <= 0) throw ConfigError("sweep needs at least one seed");
  std::vector<SweepCell> cells;
  cells.reserve(conditions.size() * rewards.size() * num_seeds);
  for (Condition c : conditions)
    for (const RewardSpec& r : rewards)
      for (int s = 0; s < num_seeds; ++s)
        cells.push_back(SweepCell{c, r, static_cast<std::uint64_t>(s)});
  return cells;
}

}  // namespace caislab
