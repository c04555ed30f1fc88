#pragma once
// Segment-level maintenance priority: the eight-factor maintenance-project
// network and the logistic scoring / budgeted ordering of segments.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pavemind/bayesnet/bayesnet.hpp"
#include "pavemind/core/types.hpp"
#include "pavemind/priority/logistic.hpp"

namespace pavemind::priority {

// Factor node names: base type, pavement type, road grade, disease degree,
// historical treatment, administrative grade, area, special section.
inline const std::vector<std::string> kRankFactors = {"BT", "PT", "RG", "DD", "HTR", "AG", "A", "SS"};
inline const std::string kProjectNode = "MP";
inline const std::vector<std::string> kProjectLabels = {"no", "yes"};

struct SegmentFeatures {
  std::string base_type;
  std::string pavement_type;
  std::string road_grade;
  std::string disease_degree;
  std::string treatment_history;
  std::string admin_grade;
  std::string area;
  std::string special_section;

  // factor node -> label
  bayesnet::Evidence as_evidence() const;
};

// Quartile edges of a training sample; labels DD1 (lowest) to DD4.
struct QuartileBins {
  std::vector<double> edges;  // three cut points

  static QuartileBins fit(std::vector<double> values);
  std::string label(double value) const;
  static std::vector<std::string> labels();
};

using FactorDomains = std::map<std::string, std::vector<std::string>>;

// Default structure: MP is the sole parent of every factor, so the posterior
// of MP given all eight factors is a naive-Bayes inversion.
bayesnet::Dag rank_network(const FactorDomains& domains);

struct RankObservation {
  SegmentFeatures features;
  bool maintained = false;
};

struct RankModel {
  bayesnet::Dag dag;
  bayesnet::CptSet cpts;
};

// `structure` replaces the default network; it must declare MP with labels no|yes.
RankModel learn_rank_model(const std::vector<RankObservation>& history, const FactorDomains& domains,
                           double alpha = 1.0, const std::optional<bayesnet::Dag>& structure = {});

// P(MP = yes | factors). Throws std::invalid_argument on unknown labels.
double segment_maintenance_prob(const RankModel& model, const SegmentFeatures& seg);
double segment_maintenance_prob(const RankModel& model, const bayesnet::Evidence& evidence);

// One-hot encoding over the declared domains, factors in kRankFactors order.
class FeatureEncoder {
 public:
  explicit FeatureEncoder(FactorDomains domains);
  std::vector<double> encode(const SegmentFeatures& seg) const;
  std::size_t size() const { return columns_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  FactorDomains domains_;
  std::vector<std::string> columns_;
};

struct SegmentCandidate {
  core::SegmentKey segment;
  std::vector<double> encoded;
  double cost = 0.0;
};

struct PriorityEntry {
  core::SegmentKey segment;
  double score = 0.0;
  double cost = 0.0;
  double cumulative_cost = 0.0;  // running total within the budget scope
  bool selected = false;
};

struct PriorityList {
  std::vector<PriorityEntry> entries;  // score descending, segment ascending on ties
  // Network scope: the longest prefix whose cumulative cost fits the budget.
  // Per-route scope: the number of selected entries.
  std::size_t selected_prefix_len = 0;
};

// Scores candidates with w.x + b and selects the budget-feasible prefix,
// either across the network or separately within each route.
PriorityList priority_list(std::vector<SegmentCandidate> segments, const LogisticModel& model,
                           const core::Budget& budget);

// Recomputes cumulative costs and the selection of an already ordered list.
void apply_budget(PriorityList& list, const core::Budget& budget);

// CSV: rank,route_id,segment_start_m,segment_end_m,score,cost,cumulative_cost,selected
void write_priority(const std::filesystem::path& path, const PriorityList& list);

}  // namespace pavemind::priority
