#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>

#include "doctest.h"
#include "pavemind/core/csv_io.hpp"
#include "pavemind/core/errors.hpp"
#include "pavemind/core/validate.hpp"
#include "pavemind/pipeline/config.hpp"
#include "pavemind/pipeline/pipeline.hpp"
#include "pavemind/pipeline/synth.hpp"
#include "test_util.hpp"

using namespace pavemind;
using namespace pavemind::pipeline;
namespace fs = std::filesystem;

namespace {

// Small network and short training so a full run takes a few seconds.
PipelineConfig quick_config(const fs::path& dir, const SyntheticSpec& spec) {
  const auto files = write_synthetic(dir, gen_synthetic(spec));
  PipelineConfig c;
  c.detection_path = files.detection;
  c.maintenance_path = files.maintenance;
  c.route_meta_path = files.route_meta;
  c.out_dir = dir / "out";
  c.end_year = spec.first_year + spec.years - 2;
  c.start_year = c.end_year - 1;
  c.forecast.hidden_candidates = {8};
  c.forecast.lstm.max_epochs = 150;
  c.dqn.epochs = 60;
  c.dqn.hidden_layers = {16, 16, 8};
  c.bayes_opt.iterations = 10;
  c.logistic.iterations = 200;
  return c;
}

SyntheticSpec small_spec(int routes = 2, int segments = 4, int years = 6) {
  SyntheticSpec s;
  s.seed = 3;
  s.n_routes = routes;
  s.n_segments = segments;
  s.years = years;
  return s;
}

std::size_t lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PAVEMIND_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("synthetic generator") {
  CHECK_THROWS_AS(gen_synthetic(small_spec(2, 4, 1)), std::invalid_argument);
  CHECK_THROWS_AS(gen_synthetic(small_spec(0, 4, 6)), std::invalid_argument);
  const auto data = gen_synthetic(SyntheticSpec{});
  CHECK(data.detection.size() == 3u * 20u * 9u);
  for (const auto& r : data.detection) {
    CHECK(r.pci >= 0.0);
    CHECK(r.pci <= 100.0);
  }
  CHECK(core::validate(data.detection, data.maintenance, data.metas).empty());
  const auto again = gen_synthetic(SyntheticSpec{});
  CHECK(again.detection == data.detection);
  CHECK(again.maintenance == data.maintenance);

  // the bundled fixture is this generator's default output
  const auto fixture = core::load_detection(testutil::data_dir() / "fixture" / "detection.csv").records;
  CHECK(fixture.size() == data.detection.size());
}

TEST_CASE("config text") {
  const auto c = parse_config("seed = 9\nbudget.amount = 25\nbudget.scope = route\n# note\ninput.detection = d.csv\n", "/base");
  CHECK(c.seed == 9);
  CHECK(c.budget.amount == 25.0);
  CHECK(c.budget.scope == core::BudgetScope::PerRoute);
  CHECK(c.detection_path == fs::path("/base/d.csv"));
  CHECK_THROWS_AS(parse_config("no.such.key = 1\n"), InputError);
  CHECK_THROWS_AS(parse_config("seed 9\n"), InputError);
  CHECK_THROWS_AS(parse_config("dqn.gamma = 1.5\n"), InputError);
  CHECK_THROWS_AS(parse_config("budget.scope = galaxy\n"), InputError);
  CHECK_THROWS_AS(load_config("/nonexistent/pavemind.conf"), InputError);

  auto d = parse_config("lstm.hidden_candidates = 4, 8\ndqn.hidden_layers = 12, 6\nseed = 5\n", "/x");
  const auto e = parse_config(format_config(d), "/x");
  CHECK(e.forecast.hidden_candidates == d.forecast.hidden_candidates);
  CHECK(e.dqn.hidden_layers == d.dqn.hidden_layers);
  CHECK(format_config(e) == format_config(d));
}

TEST_CASE("end-to-end run") {
  testutil::TempDir dir("e2e");
  auto spec = small_spec();
  auto cfg = quick_config(dir.path(), spec);
  const auto report = run_pipeline(cfg);

  REQUIRE(report.stages.size() == 4);
  CHECK(report.stages[0].stage == "predict");
  CHECK(report.stages[3].stage == "segment-rank");
  for (const char* f : {"forecasts.csv", "route_priority.csv", "dqn_loss.csv", "priority.csv", "plan.csv", "report.txt"})
    CHECK(fs::exists(cfg.out_dir / f));

  const auto plan = testutil::read_file(cfg.out_dir / "plan.csv");
  CHECK(lines(plan) == 1 + 2 * 4);
  std::set<std::string> seen;
  std::istringstream in(plan);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string idx, route, a, b;
    std::getline(row, idx, ',');
    std::getline(row, route, ',');
    std::getline(row, a, ',');
    std::getline(row, b, ',');
    CHECK(seen.insert(route + ":" + a + "-" + b).second);
  }
  CHECK(seen.size() == 8);
  CHECK(report.plan.segments == 8);
  CHECK(report.plan.selected_cost <= cfg.budget.amount + 1e-9);

  for (const auto& r : report.route_priorities) {
    const auto plot = cfg.out_dir / ("plot_" + r.route_id + ".csv");
    REQUIRE(fs::exists(plot));
    const auto text = testutil::read_file(plot);
    CHECK(lines(text) == 1 + 4);
    CHECK(text.find("_actual") != std::string::npos);
  }

  SUBCASE("same seed, same bytes") {
    auto again = cfg;
    again.out_dir = dir / "out2";
    run_pipeline(again);
    for (const char* f : {"plan.csv", "priority.csv", "forecasts.csv", "dqn_loss.csv", "route_priority.csv"})
      CHECK(testutil::read_file(cfg.out_dir / f) == testutil::read_file(again.out_dir / f));
  }
  SUBCASE("zero budget selects nothing") {
    auto zero = cfg;
    zero.out_dir = dir / "zero";
    zero.budget.amount = 0.0;
    const auto r = run_pipeline(zero);
    CHECK(r.plan.selected == 0);
    CHECK(lines(testutil::read_file(zero.out_dir / "plan.csv")) == 9);
  }
  SUBCASE("stopping early") {
    auto part = cfg;
    part.out_dir = dir / "part";
    const auto r = run_pipeline(part, Stage::RankRoutes);
    CHECK(r.stages.size() == 2);
    CHECK(fs::exists(part.out_dir / "route_priority.csv"));
    CHECK_FALSE(fs::exists(part.out_dir / "plan.csv"));
  }
}

TEST_CASE("plot data edge cases") {
  testutil::TempDir dir("plot");
  SUBCASE("single-segment routes") {
    auto cfg = quick_config(dir.path(), small_spec(3, 1, 6));
    const auto report = run_pipeline(cfg);
    for (const auto& r : report.route_priorities)
      CHECK(lines(testutil::read_file(cfg.out_dir / ("plot_" + r.route_id + ".csv"))) == 2);
  }
  SUBCASE("no following-year detections") {
    auto spec = small_spec(2, 3, 6);
    auto cfg = quick_config(dir.path(), spec);
    cfg.end_year = spec.first_year + spec.years - 1;
    cfg.start_year = cfg.end_year - 1;
    const auto report = run_pipeline(cfg);
    const auto text = testutil::read_file(cfg.out_dir / ("plot_" + report.route_priorities[0].route_id + ".csv"));
    CHECK(text.find("_actual") == std::string::npos);
    const bool warned = std::any_of(report.warnings.begin(), report.warnings.end(),
                                    [](const std::string& w) { return w.find("actual") != std::string::npos; });
    CHECK(warned);
  }
}

TEST_CASE("pipeline errors") {
  testutil::TempDir dir("err");
  auto cfg = quick_config(dir.path(), small_spec());
  SUBCASE("missing input is an input error") {
    cfg.detection_path = dir / "missing.csv";
    CHECK_THROWS_AS(run_pipeline(cfg), InputError);
  }
  SUBCASE("bad structure fails its stage") {
    testutil::write_file(dir / "bad.txt", "node MP : no|yes\nnode SS : 0|1\nedge MP -> SS\nedge SS -> MP\n");
    cfg.rank_structure = dir / "bad.txt";
    try {
      run_pipeline(cfg);
      FAIL("expected StageError");
    } catch (const StageError& e) {
      CHECK(e.stage() == "rank-routes");
    }
  }
}

TEST_CASE("command line") {
  testutil::TempDir dir("cli");
  const std::string data = (dir / "data").string();
  REQUIRE(run_cli("synth --out " + data + " --routes 2 --segments 3 --years 5 --seed 4") == 0);
  const fs::path conf = dir / "data" / "pavemind.conf";
  REQUIRE(fs::exists(conf));
  // shrink training for the test
  auto c = load_config(conf);
  c.forecast.hidden_candidates = {8};
  c.forecast.lstm.max_epochs = 100;
  c.dqn.epochs = 40;
  c.dqn.hidden_layers = {8, 8, 4};
  c.bayes_opt.iterations = 8;
  testutil::write_file(conf, format_config(c));

  const std::string out = (dir / "out").string();
  CHECK(run_cli("plan --config " + conf.string() + " --out " + out + " --budget 0") == 0);
  CHECK(fs::exists(dir / "out" / "plan.csv"));
  CHECK(run_cli("rank-routes --config " + conf.string() + " --out " + (dir / "rr").string()) == 0);
  CHECK(fs::exists(dir / "rr" / "route_priority.csv"));

  CHECK(run_cli("plan") == 1);
  CHECK(run_cli("plan --config " + (dir / "nope.conf").string()) == 1);
  CHECK(run_cli("synth --out " + (dir / "s").string() + " --years 1") == 1);
  testutil::write_file(dir / "unknown.conf", "colour = blue\n");
  CHECK(run_cli("plan --config " + (dir / "unknown.conf").string()) == 1);

  testutil::write_file(dir / "cyc.txt", "node MP : no|yes\nnode SS : 0|1\nedge MP -> SS\nedge SS -> MP\n");
  c.rank_structure = dir / "cyc.txt";
  testutil::write_file(dir / "cyc.conf", format_config(c));
  CHECK(run_cli("plan --config " + (dir / "cyc.conf").string() + " --out " + (dir / "cyc").string()) == 2);
}
