#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "caislab/config_io.hpp"
#include "caislab/csv.hpp"
#include "caislab/harness.hpp"
#include "caislab/report.hpp"
#include "caislab/selftest.hpp"
#include "caislab/sweep.hpp"

namespace {

using namespace caislab;

std::string resolve_out(const std::string& flag_out, const std::string& config_out) {
  if (!flag_out.empty()) return flag_out;
  if (const char* env = std::getenv("CAIS_LAB_OUT"); env && *env) return env;
  return config_out;
}

int cmd_run(const std::string& config_path, long seed_flag, const std::string& out_flag) {
  RunConfig cfg = load_run_config(config_path);
  cfg.out_dir = resolve_out(out_flag, cfg.out_dir);
  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (seed_flag >= 0) seeds = {static_cast<std::uint64_t>(seed_flag)};

  for (std::uint64_t seed : seeds) {
    SweepCell cell{cfg.env.condition, cfg.agent.reward, seed};
    std::filesystem::path csv = run_csv_path(cfg.out_dir, cell);
    std::filesystem::create_directories(csv.parent_path());

    RunConfig resolved = cfg;
    resolved.seeds = {seed};
    RunSeries series = run_experiment(resolved, seed);
    write_run_csv(csv, series);
    std::filesystem::path manifest = csv;
    manifest.replace_extension(".manifest.json");
    write_manifest(manifest, resolved);

    auto [first, last] = evaluation_window(cfg.protocol);
    std::cout << cell.label() << ": separation="
              << fmt_g(contingency_separation(series, first, last))
              << " burst=" << fmt_g(extinction_burst_index(series)) << " -> "
              << csv.string() << "\n";
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& conditions,
              const std::vector<std::string>& rewards, int seeds, int jobs,
              const std::string& out_flag) {
  RunConfig cfg = load_run_config(config_path);
  cfg.out_dir = resolve_out(out_flag, cfg.out_dir);

  std::vector<Condition> conds;
  for (const auto& c : conditions) conds.push_back(parse_condition(c));
  std::vector<RewardSpec> specs;
  for (const auto& r : rewards) specs.push_back(parse_reward_name(r));

  std::vector<SweepCell> cells = make_grid(conds, specs, seeds);
  std::cout << "sweep: " << cells.size() << " runs -> " << cfg.out_dir
            << " (jobs=" << (jobs <= 0 ? "auto" : std::to_string(jobs)) << ")\n";
  SweepResult res = run_sweep(cfg, cells, jobs);
  std::cout << "completed " << res.completed << "/" << cells.size() << " in "
            << fmt_g(res.wall_seconds) << "s\n";
  for (const std::string& f : res.failures) std::cerr << "FAILED " << f << "\n";
  return res.failures.empty() ? 0 : 1;
}

int cmd_report(const std::string& in_dir) {
  ReportResult res = write_report(in_dir);
  std::cout << "report: " << res.cells.size() << " cells, " << res.plots_written
            << " plots -> " << in_dir << "/summary.csv\n";
  for (const CellReport& c : res.cells)
    std::cout << "  " << condition_name(c.condition) << "/" << c.reward
              << ": separation=" << fmt_g(c.separation.mean) << "±"
              << fmt_g(c.separation.stddev) << " burst=" << fmt_g(c.burst.mean)
              << "±" << fmt_g(c.burst.stddev) << "\n";
  return 0;
}

int cmd_selftest() {
  bool all = true;
  for (const SelfTestResult& r : run_selftests()) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  (" << r.detail
              << ")\n";
    all = all && r.pass;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contingency learning laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_flag, in_dir;
  long seed_flag = -1;
  std::vector<std::string> conditions{"free", "noisy"};
  std::vector<std::string> rewards{"mtl",          "rtl",          "cais",
                                   "surprise",     "mtl+surprise", "rtl+surprise",
                                   "cais+surprise"};
  int seeds = 10, jobs = 0;

  CLI::App* run = app.add_subcommand("run", "run one condition for the configured seeds");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--seed", seed_flag, "override: run only this seed");
  run->add_option("--out", out_flag, "output directory root");

  CLI::App* sweep = app.add_subcommand("sweep", "run a condition x reward x seed grid");
  sweep->add_option("--config", config_path, "JSON config file")->required();
  sweep->add_option("--conditions", conditions, "comma list: free,noisy")->delimiter(',');
  sweep->add_option("--rewards", rewards, "comma list of reward names")->delimiter(',');
  sweep->add_option("--seeds", seeds, "number of seeds (0..n-1)");
  sweep->add_option("--jobs", jobs, "parallel workers (0 = hardware)");
  sweep->add_option("--out", out_flag, "output directory root");

  CLI::App* report = app.add_subcommand("report", "summarize a sweep directory");
  report->add_option("--in", in_dir, "sweep output directory")->required();

  app.add_subcommand("selftest", "run built-in numeric checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("run")) return cmd_run(config_path, seed_flag, out_flag);
    if (app.got_subcommand("sweep"))
      return cmd_sweep(config_path, conditions, rewards, seeds, jobs, out_flag);
    if (app.got_subcommand("report")) return cmd_report(in_dir);
    if (app.got_subcommand("selftest")) return cmd_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
