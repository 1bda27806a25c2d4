#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "caislab/csv.hpp"
#include "caislab/harness.hpp"
#include "caislab/svg.hpp"

namespace caislab {

struct CellReport {
  Condition condition = Condition::kFreeMobile;
  std::string reward;
  std::vector<std::uint64_t> seeds;
  std::vector<double> separations;   // per seed, evaluation window
  std::vector<double> bursts;        // per seed
  Aggregate separation, burst;
  double baseline_reward = 0.0;      // phase means of the joint-mean reward
  double attached_reward = 0.0;
  double extinction_reward = 0.0;
  double attached_p_move = 0.0;      // evaluation window means
  double unattached_p_move = 0.0;
  double attached_cais = 0.0;        // mean cais(move) over the window
  double unattached_cais = 0.0;
};

struct ReportResult {
  std::vector<CellReport> cells;
  int plots_written = 0;
};

namespace report_detail {

inline double joint_mean_reward(const RunRecord& r) {
  double s = 0.0;
  for (int j = 0; j < kNumJoints; ++j) s += r.reward[j];
  return s / kNumJoints;
}

inline double phase_reward_mean(const RunSeries& s, Phase phase) {
  double sum = 0.0;
  int n = 0;
  for (const RunRecord& r : s.records)
    if (r.phase == phase) {
      sum += joint_mean_reward(r);
      ++n;
    }
  return n ? sum / n : 0.0;
}

// Cross-seed per-step mean and sample std of a per-series scalar.
template <typename F>
void step_stats(const std::vector<RunSeries>& runs, F&& field,
                std::vector<double>& mean, std::vector<double>& lo,
                std::vector<double>& hi) {
  std::size_t steps = runs.front().records.size();
  mean.assign(steps, 0.0);
  lo.assign(steps, 0.0);
  hi.assign(steps, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<double> vals;
    vals.reserve(runs.size());
    for (const RunSeries& s : runs) vals.push_back(field(s.records[t]));
    Aggregate a = aggregate(vals);
    mean[t] = a.mean;
    lo[t] = a.mean - a.stddev;
    hi[t] = a.mean + a.stddev;
  }
}

inline SvgSeries masked_series(const std::vector<RunSeries>& runs,
                               const std::array<bool, kNumJoints>& mask,
                               bool use_cais, const std::string& name,
                               const std::string& color, int smooth_w) {
  int joints = 0;
  for (bool b : mask) joints += b ? 1 : 0;
  SvgSeries out;
  out.name = name;
  out.color = color;
  auto field = [&](const RunRecord& r) {
    double v = 0.0;
    for (int j = 0; j < kNumJoints; ++j)
      if (mask[j]) v += use_cais ? r.cais_move[j] : r.p_move[j];
    return v / joints;
  };
  std::vector<double> mean, lo, hi;
  step_stats(runs, field, mean, lo, hi);
  out.y = smooth(mean, smooth_w);
  out.lo = smooth(lo, smooth_w);
  out.hi = smooth(hi, smooth_w);
  return out;
}

}  // namespace report_detail

// Aggregate one (condition, reward) cell from its per-seed series.
inline CellReport summarize_cell(const std::vector<RunSeries>& runs) {
  if (runs.empty()) throw ContractViolation("summarize_cell: no runs");
  CellReport cell;
  cell.condition = runs.front().condition;
  cell.reward = runs.front().reward_name;
  auto [first, last] = evaluation_window(runs.front().protocol);
  auto att = runs.front().attached_mask();
  std::array<bool, kNumJoints> unatt{};
  for (int j = 0; j < kNumJoints; ++j) unatt[j] = !att[j];

  double att_p = 0.0, unatt_p = 0.0, base_r = 0.0, att_r = 0.0, ext_r = 0.0;
  double att_c = 0.0, unatt_c = 0.0;
  for (const RunSeries& s : runs) {
    cell.seeds.push_back(s.seed);
    cell.separations.push_back(contingency_separation(s, first, last));
    cell.bursts.push_back(extinction_burst_index(s));
    att_p += mean_p_move(s, first, last, att);
    unatt_p += mean_p_move(s, first, last, unatt);
    att_c += mean_cais_move(s, first, last, att);
    unatt_c += mean_cais_move(s, first, last, unatt);
    base_r += report_detail::phase_reward_mean(s, Phase::kBaseline);
    att_r += report_detail::phase_reward_mean(s, Phase::kAttached);
    ext_r += report_detail::phase_reward_mean(s, Phase::kExtinction);
  }
  double n = static_cast<double>(runs.size());
  cell.separation = aggregate(cell.separations);
  cell.burst = aggregate(cell.bursts);
  cell.attached_p_move = att_p / n;
  cell.unattached_p_move = unatt_p / n;
  cell.attached_cais = att_c / n;
  cell.unattached_cais = unatt_c / n;
  cell.baseline_reward = base_r / n;
  cell.attached_reward = att_r / n;
  cell.extinction_reward = ext_r / n;
  return cell;
}

inline std::string plot_cell(const std::vector<RunSeries>& runs) {
  const RunSeries& first = runs.front();
  auto att = first.attached_mask();
  std::array<bool, kNumJoints> unatt{};
  for (int j = 0; j < kNumJoints; ++j) unatt[j] = !att[j];
  std::array<bool, kNumJoints> all{};
  all.fill(true);
  const int w = 25;
  std::vector<double> vlines = {static_cast<double>(first.protocol.baseline_steps),
                                static_cast<double>(first.protocol.attached_end())};

  SvgPanel reward_panel;
  reward_panel.title = "reward (joint mean, smoothed)";
  reward_panel.vlines = vlines;
  {
    SvgSeries s;
    s.name = "reward";
    s.color = "#7a3fb3";
    std::vector<double> mean, lo, hi;
    report_detail::step_stats(runs, report_detail::joint_mean_reward, mean, lo, hi);
    s.y = smooth(mean, w);
    s.lo = smooth(lo, w);
    s.hi = smooth(hi, w);
    reward_panel.series.push_back(std::move(s));
  }

  SvgPanel cais_panel;
  cais_panel.title = "cais(move), attached vs unattached joints";
  cais_panel.vlines = vlines;
  cais_panel.series.push_back(
      report_detail::masked_series(runs, att, true, "attached", "#c0392b", w));
  cais_panel.series.push_back(
      report_detail::masked_series(runs, unatt, true, "unattached", "#2471a3", w));

  SvgPanel p_panel;
  p_panel.title = "p_move, attached vs unattached joints";
  p_panel.vlines = vlines;
  p_panel.series.push_back(
      report_detail::masked_series(runs, att, false, "attached", "#c0392b", w));
  p_panel.series.push_back(
      report_detail::masked_series(runs, unatt, false, "unattached", "#2471a3", w));

  std::string title = std::string(condition_name(first.condition)) + " / " +
                      first.reward_name + " (" + std::to_string(runs.size()) +
                      " seeds)";
  return render_svg(title, {reward_panel, cais_panel, p_panel});
}

inline void write_summary_csv(std::ostream& os, const std::vector<CellReport>& cells) {
  os << "condition,reward,seeds,separation_mean,separation_std,burst_mean,burst_std,"
        "attached_p_move,unattached_p_move,attached_cais,unattached_cais,"
        "baseline_reward,attached_reward,extinction_reward\n";
  for (const CellReport& c : cells) {
    os << condition_name(c.condition) << ',' << c.reward << ',' << c.seeds.size()
       << ',' << fmt_g(c.separation.mean) << ',' << fmt_g(c.separation.stddev) << ','
       << fmt_g(c.burst.mean) << ',' << fmt_g(c.burst.stddev) << ','
       << fmt_g(c.attached_p_move) << ',' << fmt_g(c.unattached_p_move) << ','
       << fmt_g(c.attached_cais) << ',' << fmt_g(c.unattached_cais) << ','
       << fmt_g(c.baseline_reward) << ',' << fmt_g(c.attached_reward) << ','
       << fmt_g(c.extinction_reward) << '\n';
  }
}

inline void write_per_seed_csv(std::ostream& os, const std::vector<CellReport>& cells) {
  os << "condition,reward,seed,separation,extinction_burst\n";
  for (const CellReport& c : cells)
    for (std::size_t i = 0; i < c.seeds.size(); ++i)
      os << condition_name(c.condition) << ',' << c.reward << ',' << c.seeds[i] << ','
         << fmt_g(c.separations[i]) << ',' << fmt_g(c.bursts[i]) << '\n';
}

// Read every run under in_dir (layout <condition>/<reward>/<seed>.csv), write
// summary.csv, per_seed.csv and one SVG per cell into in_dir/plots/.
inline ReportResult write_report(const std::filesystem::path& in_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(in_dir))
    throw ConfigError("report input is not a directory: " + in_dir.string());

  std::map<std::pair<std::string, std::string>, std::vector<RunSeries>> cells;
  for (const auto& cond_dir : fs::directory_iterator(in_dir)) {
    if (!cond_dir.is_directory()) continue;
    std::string cond = cond_dir.path().filename().string();
    if (cond != "free" && cond != "noisy") continue;
    for (const auto& reward_dir : fs::directory_iterator(cond_dir.path())) {
      if (!reward_dir.is_directory()) continue;
      std::string reward = reward_dir.path().filename().string();
      for (const auto& f : fs::directory_iterator(reward_dir.path())) {
        if (f.path().extension() != ".csv") continue;
        cells[{cond, reward}].push_back(read_run_csv(f.path()));
      }
    }
  }
  if (cells.empty()) throw ConfigError("no run CSVs found under " + in_dir.string());

  ReportResult result;
  fs::create_directories(in_dir / "plots");
  for (auto& [key, runs] : cells) {
    std::sort(runs.begin(), runs.end(),
              [](const RunSeries& a, const RunSeries& b) { return a.seed < b.seed; });
    result.cells.push_back(summarize_cell(runs));
    std::ofstream svg(in_dir / "plots" / (key.first + "_" + key.second + ".svg"));
    if (!svg) throw ConfigError("cannot write plot for " + key.first + "/" + key.second);
    svg << plot_cell(runs);
    ++result.plots_written;
  }

  std::ofstream summary(in_dir / "summary.csv");
  if (!summary) throw ConfigError("cannot write summary.csv");
  write_summary_csv(summary, result.cells);
  std::ofstream per_seed(in_dir / "per_seed.csv");
  if (!per_seed) throw ConfigError("cannot write per_seed.csv");
  write_per_seed_csv(per_seed, result.cells);
  return result;
}

}  // namespace caislab
