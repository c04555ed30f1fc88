#pragma once
// End-to-end run: forecast route PCI, rank routes, train the treatment
// agent, then order segments and select the budget-feasible prefix.
//
// Artifacts written to config.out_dir:
//   forecasts.csv, route_priority.csv, dqn_loss.csv, priority.csv, plan.csv,
//   plot_<route>.csv and report.txt

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pavemind/core/types.hpp"
#include "pavemind/forecast/forecaster.hpp"
#include "pavemind/pipeline/config.hpp"
#include "pavemind/priority/route_rank.hpp"
#include "pavemind/priority/segment_rank.hpp"
#include "pavemind/recommend/treatment.hpp"

namespace pavemind::pipeline {

enum class Stage { Predict, RankRoutes, Recommend, SegmentRank };
std::string stage_name(Stage s);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PlanSummary {
  std::size_t segments = 0;
  std::size_t selected = 0;
  double selected_cost = 0.0;
  std::map<std::string, std::size_t> action_counts;  // over all segments
};

struct RunReport {
  std::vector<StageTiming> stages;
  std::map<std::string, std::vector<forecast::SelectedFeature>> selected_features;
  std::vector<priority::RoutePriority> route_priorities;
  PlanSummary plan;
  std::vector<std::string> warnings;

  std::string to_text() const;
};

struct Inputs {
  std::vector<core::DetectionRecord> detection;  // rebucketed to evaluation units
  std::vector<core::MaintenanceRecord> maintenance;
  std::map<std::string, core::RouteMeta> metas;
};

// Loads, rebuckets and validates the input tables. Validation findings go to
// the report as warnings; a route without metadata is an InputError.
Inputs load_inputs(const PipelineConfig& config, RunReport& report);

std::vector<forecast::Forecast> stage_predict(const PipelineConfig& config, const Inputs& in, RunReport& report);

struct RouteRanking {
  std::vector<priority::RoutePriority> routes;  // priority order
  priority::FactorDomains domains;
  priority::RankModel model;
};

RouteRanking stage_rank_routes(const PipelineConfig& config, const Inputs& in,
                               const std::vector<forecast::Forecast>& forecasts, RunReport& report);

struct Recommendation {
  std::vector<recommend::TreatmentAction> actions;
  std::vector<recommend::MdpState> states;  // end-year state per segment
  std::vector<recommend::PlanEntry> plan;   // aligned with `states`
  std::vector<double> loss_trace;
};

Recommendation stage_recommend(const PipelineConfig& config, const Inputs& in,
                               const std::vector<forecast::Forecast>& forecasts, RunReport& report);

struct SegmentPlan {
  priority::PriorityList priority;
  std::vector<recommend::PlanEntry> ordered_plan;  // same order as priority.entries
};

SegmentPlan stage_segment_rank(const PipelineConfig& config, const Inputs& in, const RouteRanking& ranking,
                               const Recommendation& rec, RunReport& report);

// One file per route: priority_index,pci_<end>,[pci_<end+1>_actual,]recommended_effectiveness
// with recommended_effectiveness the expected PCI after the recommended action.
// The actual column is omitted (with a warning) when any segment of the
// route lacks a detection in the following year.
std::vector<std::filesystem::path> emit_plot_data(const PipelineConfig& config, const Inputs& in,
                                                  const Recommendation& rec, const SegmentPlan& plan,
                                                  RunReport& report);

// Runs every stage up to `last`. Stage failures are rethrown as StageError;
// input problems surface as InputError.
RunReport run_pipeline(const PipelineConfig& config, Stage last = Stage::SegmentRank);

}  // namespace pavemind::pipeline
