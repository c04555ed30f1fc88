// pavemind: command-line front end for the maintenance decision pipeline.
//
//   pavemind synth --out data/            fixture tables plus a config
//   pavemind plan --config data/pavemind.conf --budget 5 --out run/
//
// Exit codes: 0 success, 1 input error, 2 stage failure.
// PAVEMIND_LOG=trace|debug|info|warn|error|off sets log verbosity (default warn).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "pavemind/core/errors.hpp"
#include "pavemind/pipeline/config.hpp"
#include "pavemind/pipeline/pipeline.hpp"
#include "pavemind/pipeline/synth.hpp"
#include "pavemind/simd/kernels.hpp"

namespace pm = pavemind::pipeline;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("pavemind");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* level = std::getenv("PAVEMIND_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
}

struct RunFlags {
  std::string config;
  std::optional<double> budget;
  std::optional<std::string> scope;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "pipeline config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--budget", f.budget, "maintenance budget (overrides budget.amount)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--budget-scope", f.scope, "network or route")->check(CLI::IsMember({"network", "route"}));
  cmd->add_option("--seed", f.seed, "root seed (overrides seed)");
  cmd->add_option("--out", f.out, "output directory (overrides output.dir)");
}

int run(const RunFlags& f, pm::Stage last) {
  auto config = pm::load_config(f.config);
  if (f.budget) config.budget.amount = *f.budget;
  if (f.scope)
    config.budget.scope =
        *f.scope == "route" ? pavemind::core::BudgetScope::PerRoute : pavemind::core::BudgetScope::Network;
  if (f.seed) config.seed = *f.seed;
  if (f.out) config.out_dir = *f.out;
  spdlog::info("kernels: {}", pavemind::simd::backend_name(pavemind::simd::active_backend()));
  const auto report = pm::run_pipeline(config, last);
  std::cout << report.to_text() << "artifacts: " << config.out_dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Pavement maintenance decision engine"};
  app.require_subcommand(1);

  pm::SyntheticSpec spec;
  std::string synth_out = "data";
  auto* synth = app.add_subcommand("synth", "generate a synthetic road network and a matching config");
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--seed", spec.seed, "generator seed");
  synth->add_option("--routes", spec.n_routes, "number of routes")->check(CLI::PositiveNumber);
  synth->add_option("--segments", spec.n_segments, "10 m units per route")->check(CLI::PositiveNumber);
  synth->add_option("--years", spec.years, "years of detections (>= 2)");
  synth->add_option("--treatments", spec.treatment_vocab_size, "distinct treatment codes")->check(CLI::PositiveNumber);
  synth->add_option("--first-year", spec.first_year, "first detection year");

  RunFlags predict_flags, rank_flags, recommend_flags, plan_flags;
  auto* predict = app.add_subcommand("predict", "forecast route PCI");
  add_run_flags(predict, predict_flags);
  auto* rank = app.add_subcommand("rank-routes", "forecast and rank routes");
  add_run_flags(rank, rank_flags);
  auto* recommend = app.add_subcommand("recommend", "forecast, rank routes and train the treatment agent");
  add_run_flags(recommend, recommend_flags);
  auto* plan = app.add_subcommand("plan", "full pipeline with budgeted segment selection");
  add_run_flags(plan, plan_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (synth->parsed()) {
      const auto data = pm::gen_synthetic(spec);
      const auto files = pm::write_synthetic(synth_out, data);
      pm::PipelineConfig config;
      config.detection_path = files.detection.filename();
      config.maintenance_path = files.maintenance.filename();
      config.route_meta_path = files.route_meta.filename();
      config.out_dir = "run";
      config.end_year = spec.first_year + spec.years - 2;
      config.start_year = std::max(spec.first_year, config.end_year - 1);
      std::ofstream(std::filesystem::path(synth_out) / "pavemind.conf") << pm::format_config(config);
      std::cout << data.detection.size() << " detection rows, " << data.maintenance.size() << " treatments, "
                << data.metas.size() << " routes written to " << synth_out << '\n';
      return 0;
    }
    if (predict->parsed()) return run(predict_flags, pm::Stage::Predict);
    if (rank->parsed()) return run(rank_flags, pm::Stage::RankRoutes);
    if (recommend->parsed()) return run(recommend_flags, pm::Stage::Recommend);
    if (plan->parsed()) return run(plan_flags, pm::Stage::SegmentRank);
  } catch (const pavemind::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const pavemind::StageError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
