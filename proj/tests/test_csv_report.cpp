#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "caislab/csv.hpp"
#include "caislab/report.hpp"
#include "caislab/svg.hpp"

using namespace caislab;

namespace {

RunSeries synthetic_series(std::uint64_t seed, double ramp_gain) {
  RunSeries s;
  s.condition = Condition::kFreeMobile;
  s.reward_name = "cais";
  s.seed = seed;
  s.attached_limb = Limb::kLeftLeg;
  s.protocol = ProtocolConfig{10, 20, 10, 5};
  int total = s.protocol.total_steps();
  for (int t = 1; t <= total; ++t) {
    RunRecord r;
    r.step = t;
    r.phase = s.protocol.phase_of(t);
    for (int j = 0; j < kNumJoints; ++j) {
      r.p_move[j] = 0.2;
      r.q_no[j] = 0.01 * j;
      r.q_move[j] = -0.02 * j + 1e-7;
      r.cais_move[j] = 0.001;
      r.reward[j] = 0.0;
      r.action[j] = (t + j) % 2;
    }
    // Attached joints ramp from 0 to ramp_gain across the run.
    for (int j : limb_joints(s.attached_limb))
      r.p_move[j] = ramp_gain * static_cast<double>(t - 1) / (total - 1);
    r.mtl = 0.123456789 * t;
    r.rtl = 1e-9 * t;
    r.surprise = 0.5 / t;
    r.mobile_speed = r.mtl / 0.6;
    s.records.push_back(r);
  }
  return s;
}

}  // namespace

TEST_CASE("run csv round trips through write and read") {
  RunSeries s = synthetic_series(42, 1.0);
  std::ostringstream os;
  write_run_csv(os, s);
  std::istringstream is(os.str());
  RunSeries back = read_run_csv(is, "test");

  CHECK(back.condition == s.condition);
  CHECK(back.reward_name == s.reward_name);
  CHECK(back.seed == s.seed);
  CHECK(back.attached_limb == s.attached_limb);
  CHECK(back.protocol.baseline_steps == s.protocol.baseline_steps);
  CHECK(back.protocol.burst_window == s.protocol.burst_window);
  REQUIRE(back.records.size() == s.records.size());
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    const RunRecord &a = s.records[i], &b = back.records[i];
    CHECK(a.step == b.step);
    CHECK(a.phase == b.phase);
    for (int j = 0; j < kNumJoints; ++j) {
      CHECK(a.action[j] == b.action[j]);
      CHECK(b.p_move[j] == Catch::Approx(a.p_move[j]).epsilon(1e-8).margin(1e-12));
      CHECK(b.q_move[j] == Catch::Approx(a.q_move[j]).epsilon(1e-8).margin(1e-12));
    }
    CHECK(b.mtl == Catch::Approx(a.mtl).epsilon(1e-8));
    CHECK(b.rtl == Catch::Approx(a.rtl).epsilon(1e-8).margin(1e-15));
    CHECK(b.surprise == Catch::Approx(a.surprise).epsilon(1e-8));
  }
}

TEST_CASE("csv write is byte-stable") {
  RunSeries s = synthetic_series(7, 0.8);
  std::ostringstream a, b;
  write_run_csv(a, s);
  write_run_csv(b, s);
  CHECK(a.str() == b.str());
}

TEST_CASE("malformed csv rows are rejected with a location") {
  std::istringstream is("# condition=free reward=cais seed=0 attached_limb=left_leg\n"
                        "# baseline_steps=1 attached_steps=1 extinction_steps=1 burst_window=1\n"
                        "header\n"
                        "1,baseline,too,few\n");
  try {
    read_run_csv(is, "bad");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad:4") != std::string::npos);
  }
}

TEST_CASE("missing metadata comments are rejected") {
  RunSeries s = synthetic_series(1, 1.0);
  std::ostringstream os;
  write_run_csv(os, s);
  std::string text = os.str();
  // Drop the first comment line (condition and friends).
  std::string cut = text.substr(text.find('\n', text.find("condition")) + 1);
  std::istringstream is("# caislab run\n" + cut);
  CHECK_THROWS_AS(read_run_csv(is, "cut"), ConfigError);
}

TEST_CASE("smooth keeps length and averages a trailing window") {
  std::vector<double> y{1, 1, 1, 4, 4, 4};
  std::vector<double> sm = smooth(y, 3);
  REQUIRE(sm.size() == y.size());
  CHECK(sm[0] == Catch::Approx(1.0));
  CHECK(sm[2] == Catch::Approx(1.0));
  CHECK(sm[3] == Catch::Approx(2.0));   // (1+1+4)/3
  CHECK(sm[5] == Catch::Approx(4.0));
}

TEST_CASE("svg renders a monotone ramp as monotone polyline coordinates") {
  // p_move of the attached joints ramps 0 -> 1; SVG y axis points down, so
  // plotted y coordinates must be non-increasing.
  RunSeries s = synthetic_series(0, 1.0);
  std::string svg = plot_cell({s});

  auto pos = svg.find("polyline id=\"attached\"");
  // Two panels share series names; p_move panel is the last one.
  auto last = pos;
  while ((pos = svg.find("polyline id=\"attached\"", pos + 1)) != std::string::npos)
    last = pos;
  REQUIRE(last != std::string::npos);
  auto points_at = svg.find("points=\"", last);
  REQUIRE(points_at != std::string::npos);
  points_at += 8;
  auto end = svg.find('"', points_at);
  std::istringstream pts(svg.substr(points_at, end - points_at));
  std::string pair;
  double prev_y = 1e18;
  int count = 0;
  // Skip the smoothing warm-up, then demand monotone non-increasing y.
  std::vector<double> ys;
  while (pts >> pair) {
    auto comma = pair.find(',');
    REQUIRE(comma != std::string::npos);
    ys.push_back(std::stod(pair.substr(comma + 1)));
  }
  REQUIRE(ys.size() == s.records.size());
  for (std::size_t i = 30; i < ys.size(); ++i) {
    CHECK(ys[i] <= prev_y + 1e-9);
    prev_y = ys[i];
    ++count;
  }
  CHECK(count > 5);
}

TEST_CASE("report writes summary, per-seed table and plots") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "caislab_report_test";
  fs::remove_all(dir);
  fs::create_directories(dir / "free" / "cais");

  RunSeries s0 = synthetic_series(0, 1.0);
  RunSeries s1 = synthetic_series(1, 0.8);
  write_run_csv(dir / "free" / "cais" / "0.csv", s0);
  write_run_csv(dir / "free" / "cais" / "1.csv", s1);

  ReportResult res = write_report(dir);
  REQUIRE(res.cells.size() == 1);
  const CellReport& cell = res.cells[0];
  CHECK(cell.reward == "cais");
  CHECK(cell.seeds.size() == 2);

  // Cross-check against direct metric computation.
  auto [first, last] = evaluation_window(s0.protocol);
  double sep0 = contingency_separation(s0, first, last);
  double sep1 = contingency_separation(s1, first, last);
  CHECK(cell.separation.mean == Catch::Approx(0.5 * (sep0 + sep1)).epsilon(1e-6));
  Aggregate direct = aggregate({sep0, sep1});
  CHECK(cell.separation.stddev == Catch::Approx(direct.stddev).epsilon(1e-6));

  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "per_seed.csv"));
  CHECK(fs::exists(dir / "plots" / "free_cais.svg"));

  std::ifstream summary(dir / "summary.csv");
  std::string header, row;
  std::getline(summary, header);
  std::getline(summary, row);
  CHECK(header.find("separation_mean") != std::string::npos);
  CHECK(row.find("free,cais,2") == 0);

  fs::remove_all(dir);
}

TEST_CASE("report refuses an empty directory") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "caislab_report_empty";
  fs::remove_all(dir);
  fs::create_directories(dir);
  CHECK_THROWS_AS(write_report(dir), ConfigError);
  fs::remove_all(dir);
}
